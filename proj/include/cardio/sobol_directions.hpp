// Generated table of Sobol sequence direction numbers (Joe-Kuo), 64 dimensions x 32 bits.
#pragma once

#include <cstdint>

namespace cardio::detail {

inline constexpr int kSobolMaxDim = 64;
inline constexpr int kSobolBits = 32;

inline constexpr std::uint32_t kSobolDirections[64][32] = {
    {0x80000000u, 0x40000000u, 0x20000000u, 0x10000000u, 0x08000000u, 0x04000000u, 0x02000000u, 0x01000000u, 0x00800000u, 0x00400000u, 0x00200000u, 0x00100000u, 0x00080000u, 0x00040000u, 0x00020000u, 0x00010000u, 0x00008000u, 0x00004000u, 0x00002000u, 0x00001000u, 0x00000800u, 0x00000400u, 0x00000200u, 0x00000100u, 0x00000080u, 0x00000040u, 0x00000020u, 0x00000010u, 0x00000008u, 0x00000004u, 0x00000002u, 0x00000001u},
    {0x80000000u, 0xc0000000u, 0xa0000000u, 0xf0000000u, 0x88000000u, 0xcc000000u, 0xaa000000u, 0xff000000u, 0x80800000u, 0xc0c00000u, 0xa0a00000u, 0xf0f00000u, 0x88880000u, 0xcccc0000u, 0xaaaa0000u, 0xffff0000u, 0x80008000u, 0xc000c000u, 0xa000a000u, 0xf000f000u, 0x88008800u, 0xcc00cc00u, 0xaa00aa00u, 0xff00ff00u, 0x80808080u, 0xc0c0c0c0u, 0xa0a0a0a0u, 0xf0f0f0f0u, 0x88888888u, 0xccccccccu, 0xaaaaaaaau, 0xffffffffu},
    {0x80000000u, 0xc0000000u, 0x60000000u, 0x90000000u, 0xe8000000u, 0x5c000000u, 0x8e000000u, 0xc5000000u, 0x68800000u, 0x9cc00000u, 0xee600000u, 0x55900000u, 0x80680000u, 0xc09c0000u, 0x60ee0000u, 0x90550000u, 0xe8808000u, 0x5cc0c000u, 0x8e606000u, 0xc5909000u, 0x6868e800u, 0x9c9c5c00u, 0xeeee8e00u, 0x5555c500u, 0x8000e880u, 0xc0005cc0u, 0x60008e60u, 0x9000c590u, 0xe8006868u, 0x5c009c9cu, 0x8e00eeeeu, 0xc5005555u},
    {0x80000000u, 0xc0000000u, 0x20000000u, 0x50000000u, 0xf8000000u, 0x74000000u, 0xa2000000u, 0x93000000u, 0xd8800000u, 0x25400000u, 0x59e00000u, 0xe6d00000u, 0x78080000u, 0xb40c0000u, 0x82020000u, 0xc3050000u, 0x208f8000u, 0x51474000u, 0xfbea2000u, 0x75d93000u, 0xa0858800u, 0x914e5400u, 0xdbe79e00u, 0x25db6d00u, 0x58800080u, 0xe54000c0u, 0x79e00020u, 0xb6d00050u, 0x800800f8u, 0xc00c0074u, 0x200200a2u, 0x50050093u},
    {0x80000000u, 0x40000000u, 0x20000000u, 0xb0000000u, 0xf8000000u, 0xdc000000u, 0x7a000000u, 0x9d000000u, 0x5a800000u, 0x2fc00000u, 0xa1600000u, 0xf0b00000u, 0xda880000u, 0x6fc40000u, 0x81620000u, 0x40bb0000u, 0x22878000u, 0xb3c9c000u, 0xfb65a000u, 0xddb2d000u, 0x78022800u, 0x9c0b3c00u, 0x5a0fb600u, 0x2d0ddb00u, 0xa2878080u, 0xf3c9c040u, 0xdb65a020u, 0x6db2d0b0u, 0x800228f8u, 0x400b3cdcu, 0x200fb67au, 0xb00ddb9du},
    {0x80000000u, 0x40000000u, 0x60000000u, 0x30000000u, 0xc8000000u, 0x24000000u, 0x56000000u, 0xfb000000u, 0xe0800000u, 0x70400000u, 0xa8600000u, 0x14300000u, 0x9ec80000u, 0xdf240000u, 0xb6d60000u, 0x8bbb0000u, 0x48008000u, 0x64004000u, 0x36006000u, 0xcb003000u, 0x2880c800u, 0x54402400u, 0xfe605600u, 0xef30fb00u, 0x7e48e080u, 0xaf647040u, 0x1eb6a860u, 0x9f8b1430u, 0xd6c81ec8u, 0xbb249f24u, 0x80d6d6d6u, 0x40bbbbbbu},
    {0x80000000u, 0xc0000000u, 0xa0000000u, 0xd0000000u, 0x58000000u, 0x94000000u, 0x3e000000u, 0xe3000000u, 0xbe800000u, 0x23c00000u, 0x1e200000u, 0xf3100000u, 0x46780000u, 0x67840000u, 0x78460000u, 0x84670000u, 0xc6788000u, 0xa784c000u, 0xd846a000u, 0x5467d000u, 0x9e78d800u, 0x33845400u, 0xe6469e00u, 0xb7673300u, 0x20f86680u, 0x104477c0u, 0xf8668020u, 0x4477c010u, 0x668020f8u, 0x77c01044u, 0x8020f866u, 0xc0104477u},
    {0x80000000u, 0x40000000u, 0xa0000000u, 0x50000000u, 0x88000000u, 0x24000000u, 0x12000000u, 0x2d000000u, 0x76800000u, 0x9e400000u, 0x08200000u, 0x64100000u, 0xb2280000u, 0x7d140000u, 0xfea20000u, 0xba490000u, 0x1a248000u, 0x491b4000u, 0xc4b5a000u, 0xe3739000u, 0xf6800800u, 0xde400400u, 0xa8200a00u, 0x34100500u, 0x3a280880u, 0x59140240u, 0xeca20120u, 0x974902d0u, 0x6ca48768u, 0xd75b49e4u, 0xcc95a082u, 0x87639641u},
    {0x80000000u, 0x40000000u, 0xa0000000u, 0x50000000u, 0x28000000u, 0xd4000000u, 0x6a000000u, 0x71000000u, 0x38800000u, 0x58400000u, 0xea200000u, 0x31100000u, 0x98a80000u, 0x08540000u, 0xc22a0000u, 0xe5250000u, 0xf2b28000u, 0x79484000u, 0xfaa42000u, 0xbd731000u, 0x18a80800u, 0x48540400u, 0x622a0a00u, 0xb5250500u, 0xdab28280u, 0xad484d40u, 0x90a426a0u, 0xcc731710u, 0x20280b88u, 0x10140184u, 0x880a04a2u, 0x84350611u},
    {0x80000000u, 0x40000000u, 0xe0000000u, 0xb0000000u, 0x98000000u, 0x94000000u, 0x8a000000u, 0x5b000000u, 0x33800000u, 0xd9c00000u, 0x72200000u, 0x3f100000u, 0xc1b80000u, 0xa6ec0000u, 0x53860000u, 0x29f50000u, 0x0a3a8000u, 0x1b2ac000u, 0xd392e000u, 0x69ff7000u, 0xea380800u, 0xab2c0400u, 0x4ba60e00u, 0xfde50b00u, 0x60028980u, 0xf006c940u, 0x7834e8a0u, 0x241a75b0u, 0x123a8b38u, 0xcf2ac99cu, 0xb992e922u, 0x82ff78f1u},
    {0x80000000u, 0x40000000u, 0xa0000000u, 0x10000000u, 0x08000000u, 0x6c000000u, 0x9e000000u, 0x23000000u, 0x57800000u, 0xadc00000u, 0x7fa00000u, 0x91d00000u, 0x49880000u, 0xced40000u, 0x880a0000u, 0x2c0f0000u, 0x3e0d8000u, 0x3317c000u, 0x5fb06000u, 0xc1f8b000u, 0xe18d8800u, 0xb2d7c400u, 0x1e106a00u, 0x6328b100u, 0xf7858880u, 0xbdc3c2c0u, 0x77ba63e0u, 0xfdf7b330u, 0xd7800df8u, 0xedc0081cu, 0xdfa0041au, 0x81d00a2du},
    {0x80000000u, 0x40000000u, 0x20000000u, 0x30000000u, 0x58000000u, 0xac000000u, 0x96000000u, 0x2b000000u, 0xd4800000u, 0x09400000u, 0xe2a00000u, 0x52500000u, 0x4e280000u, 0xc71c0000u, 0x629e0000u, 0x12670000u, 0x6e138000u, 0xf731c000u, 0x3a98a000u, 0xbe449000u, 0xf83b8800u, 0xdc2dc400u, 0xee06a200u, 0xb7239300u, 0x1aa80d80u, 0x8e5c0ec0u, 0xa03e0b60u, 0x703701b0u, 0x783b88c8u, 0x9c2dca54u, 0xce06a74au, 0x87239795u},
    {0x80000000u, 0xc0000000u, 0xa0000000u, 0x50000000u, 0xf8000000u, 0x8c000000u, 0xe2000000u, 0x33000000u, 0x0f800000u, 0x21400000u, 0x95a00000u, 0x5e700000u, 0xd8080000u, 0x1c240000u, 0xba160000u, 0xef370000u, 0x15868000u, 0x9e6fc000u, 0x781b6000u, 0x4c349000u, 0x420e8800u, 0x630bcc00u, 0xf7ad6a00u, 0xad739500u, 0x77800780u, 0x6d4004c0u, 0xd7a00420u, 0x3d700630u, 0x2f880f78u, 0xb1640ad4u, 0xcdb6077au, 0x824706d7u},
    {0x80000000u, 0xc0000000u, 0x60000000u, 0x90000000u, 0x38000000u, 0xc4000000u, 0x42000000u, 0xa3000000u, 0xf1800000u, 0xaa400000u, 0xfce00000u, 0x85100000u, 0xe0080000u, 0x500c0000u, 0x58060000u, 0x54090000u, 0x7a038000u, 0x670c4000u, 0xb3842000u, 0x094a3000u, 0x0d6f1800u, 0x2f5aa400u, 0x1ce7ce00u, 0xd5145100u, 0xb8000080u, 0x040000c0u, 0x22000060u, 0x33000090u, 0xc9800038u, 0x6e4000c4u, 0xbee00042u, 0x261000a3u},
    {0x80000000u, 0x40000000u, 0x20000000u, 0xf0000000u, 0xa8000000u, 0x54000000u, 0x9a000000u, 0x9d000000u, 0x1e800000u, 0x5cc00000u, 0x7d200000u, 0x8d100000u, 0x24880000u, 0x71c40000u, 0xeba20000u, 0x75df0000u, 0x6ba28000u, 0x35d14000u, 0x4ba3a000u, 0xc5d2d000u, 0xe3a16800u, 0x91db8c00u, 0x79aef200u, 0x0cdf4100u, 0x672a8080u, 0x50154040u, 0x1a01a020u, 0xdd0dd0f0u, 0x3e83e8a8u, 0xaccacc54u, 0xd52d529au, 0xd91d919du},
    {0x80000000u, 0xc0000000u, 0x20000000u, 0xd0000000u, 0xd8000000u, 0xc4000000u, 0x46000000u, 0x85000000u, 0xa5800000u, 0x76c00000u, 0xada00000u, 0x6ab00000u, 0x2da80000u, 0xaabc0000u, 0x0daa0000u, 0x7ab10000u, 0xd5a78000u, 0xbebd4000u, 0x93a3e000u, 0x3bb51000u, 0x3629b800u, 0x4d727c00u, 0x9b836200u, 0x27c4d700u, 0xb629b880u, 0x8d727cc0u, 0xbb836220u, 0xf7c4d7d0u, 0x6e29b858u, 0x49727c04u, 0xfd836266u, 0x72c4d755u},
    {0x80000000u, 0x40000000u, 0x20000000u, 0xf0000000u, 0x38000000u, 0x14000000u, 0xf6000000u, 0x67000000u, 0x8f800000u, 0x50400000u, 0x8aa00000u, 0x0ff00000u, 0x12a80000u, 0xabf40000u, 0xfcaa0000u, 0x28fb0000u, 0xbd298000u, 0x0bba4000u, 0x4e06e000u, 0x330c3000u, 0x59861800u, 0xc74d3400u, 0x3d2cb200u, 0x4bb2cb00u, 0x6e061880u, 0xc30d3440u, 0x618cb220u, 0xd342cbf0u, 0xcb2e18b8u, 0x2cb93454u, 0xe186b2d6u, 0x9349cb97u},
    {0x80000000u, 0xc0000000u, 0x20000000u, 0xf0000000u, 0x68000000u, 0x64000000u, 0x36000000u, 0x6d000000u, 0x41800000u, 0xe0400000u, 0xd2e00000u, 0x9bf00000u, 0x0ce80000u, 0x52fc0000u, 0x5b6a0000u, 0x2fb30000u, 0xa00c8000u, 0x30054000u, 0x4807e000u, 0x940f9000u, 0x5e01f800u, 0x090e9400u, 0x778a5600u, 0x8d416b00u, 0x9369f880u, 0x7bb294c0u, 0xde005620u, 0xc9026bf0u, 0x578d78e8u, 0x7d4bd4a4u, 0xfb6db616u, 0x1fbefb9du},
    {0x80000000u, 0x40000000u, 0xa0000000u, 0x50000000u, 0x98000000u, 0xf4000000u, 0xae000000u, 0xbb000000u, 0xe7800000u, 0x95c00000u, 0x1c200000u, 0xd0300000u, 0xdba80000u, 0x55f40000u, 0xff820000u, 0x21c10000u, 0x12238000u, 0x3b3a4000u, 0xa42b6000u, 0x3430f000u, 0x4da69800u, 0x4af3ec00u, 0x2e043a00u, 0xfb0a1f00u, 0x47851880u, 0xc5c9ac40u, 0x842f5aa0u, 0x243aef50u, 0x75a38018u, 0xeefa40b4u, 0x180b600eu, 0xb400f0ebu},
    {0x80000000u, 0xc0000000u, 0xe0000000u, 0xb0000000u, 0xb8000000u, 0x3c000000u, 0xce000000u, 0x41000000u, 0x21800000u, 0x51c00000u, 0x09600000u, 0x85700000u, 0xf2780000u, 0x8e9c0000u, 0x60020000u, 0x70030000u, 0x58038000u, 0x8c02c000u, 0x7602e000u, 0x7d00f000u, 0xef833800u, 0x10c10400u, 0x28e08600u, 0xd4b14700u, 0xfb182580u, 0x0bee15c0u, 0x9279c9e0u, 0xfe9d3a70u, 0x38000008u, 0xfc00000cu, 0x2e00000eu, 0xf100000bu},
    {0x80000000u, 0xc0000000u, 0xe0000000u, 0xd0000000u, 0x68000000u, 0x3c000000u, 0x8a000000u, 0x51000000u, 0xa9800000u, 0xddc00000u, 0x5ba00000u, 0x39d00000u, 0x95f80000u, 0x56d40000u, 0x0a020000u, 0x91030000u, 0x49838000u, 0x0dc34000u, 0x33a1a000u, 0x05d0f000u, 0x1ffa2800u, 0x07d54400u, 0xa380a600u, 0x4cc07700u, 0x1222ee80u, 0x3413a740u, 0xa65bf7e0u, 0x5305ab50u, 0x15f80008u, 0x96d4000cu, 0xea02000eu, 0x4103000du},
    {0x80000000u, 0x40000000u, 0x60000000u, 0xd0000000u, 0x38000000u, 0x8c000000u, 0x7e000000u, 0x71000000u, 0xc8800000u, 0x04c00000u, 0x1ba00000u, 0xbb700000u, 0x4a980000u, 0xc3bc0000u, 0xa6020000u, 0x6d010000u, 0xee818000u, 0x29c34000u, 0x9520e000u, 0x42b23000u, 0xe7b9f800u, 0x0d0dc400u, 0x3fb92200u, 0x110d1300u, 0x19bbee80u, 0x3c0cadc0u, 0x973a4a60u, 0xc5cf7ef0u, 0x3a180008u, 0x0b7c0004u, 0xa3a20006u, 0x7771000du},
    {0x80000000u, 0xc0000000u, 0xa0000000u, 0x90000000u, 0x08000000u, 0x64000000u, 0x6a000000u, 0x89000000u, 0xa5800000u, 0xcb400000u, 0x18200000u, 0xad900000u, 0xaf880000u, 0x72f40000u, 0x25820000u, 0x0b430000u, 0xb8228000u, 0x3d924000u, 0xa7882000u, 0x16f59000u, 0x4f83a800u, 0x82412400u, 0x1da01600u, 0xf6d16d00u, 0xbfa84080u, 0xbb672640u, 0xe0091620u, 0xf0b4efd0u, 0x38228008u, 0xfd92400cu, 0x0788200au, 0x86f59009u},
    {0x80000000u, 0xc0000000u, 0x20000000u, 0xd0000000u, 0x48000000u, 0x8c000000u, 0xd6000000u, 0x39000000u, 0xd5800000u, 0x32400000u, 0xb2a00000u, 0x72100000u, 0x53d80000u, 0x82cc0000u, 0xcb820000u, 0x47430000u, 0x91208000u, 0xa9534000u, 0x7cf92000u, 0x4e9e3000u, 0xfcf95800u, 0x8e9fe400u, 0xdcf9d600u, 0x5e9c8900u, 0x94f96a80u, 0xd29fb840u, 0x42f9b760u, 0xeb9c9f30u, 0x97788008u, 0xd9df400cu, 0x25db2002u, 0xabcd300du},
    {0x80000000u, 0xc0000000u, 0x20000000u, 0x50000000u, 0xd8000000u, 0xf4000000u, 0x3e000000u, 0x95000000u, 0x8f800000u, 0x3d400000u, 0xf3200000u, 0x2ef00000u, 0xadc80000u, 0x0a0c0000u, 0x8b220000u, 0x4af30000u, 0x6bc88000u, 0x3b0d4000u, 0xe2a16000u, 0x16b0d000u, 0x29687800u, 0xbdbf1400u, 0x33cb5e00u, 0x0f0c2500u, 0xfca1b480u, 0xd3b0afc0u, 0x7eeb6920u, 0x74fe4d30u, 0xfee87808u, 0xb4ff140cu, 0xdeeb5e02u, 0xe4fc2505u},
    {0x80000000u, 0x40000000u, 0xa0000000u, 0xb0000000u, 0x98000000u, 0xa4000000u, 0x7a000000u, 0xd5000000u, 0x02800000u, 0x60400000u, 0x51e00000u, 0x88700000u, 0x8c280000u, 0x47c40000u, 0x0be20000u, 0xad710000u, 0xb6aa8000u, 0x3386c000u, 0xb8006000u, 0x54039000u, 0x42036800u, 0xc1019400u, 0xe0826a00u, 0x11431100u, 0x2960af80u, 0x3d3175c0u, 0xdf4a3aa0u, 0xaff49e10u, 0xd62b6808u, 0x62c59404u, 0x31606a0au, 0xd932110bu},
    {0x80000000u, 0xc0000000u, 0xa0000000u, 0x30000000u, 0x18000000u, 0x34000000u, 0x8a000000u, 0x9d000000u, 0x67800000u, 0x82400000u, 0x40e00000u, 0x60f00000u, 0x91480000u, 0x29440000u, 0x2d620000u, 0xbfb30000u, 0x162a8000u, 0xfbf4c000u, 0xe4ca6000u, 0xc207d000u, 0x2002a800u, 0xf001b400u, 0xb8037e00u, 0x04021900u, 0x92034b80u, 0xa90327c0u, 0xed81f320u, 0x1f40d810u, 0x27602808u, 0xe2b1740cu, 0xd1ab1e0au, 0x49b6c903u},
    {0x80000000u, 0x40000000u, 0xe0000000u, 0xd0000000u, 0x08000000u, 0x4c000000u, 0x02000000u, 0xb5000000u, 0x36800000u, 0xc2c00000u, 0x14200000u, 0x07500000u, 0x1bf80000u, 0x50340000u, 0x48a20000u, 0xac910000u, 0xd35b8000u, 0xbca74000u, 0x7bfa2000u, 0xc0343000u, 0xa0a18800u, 0x30909400u, 0xd95b7a00u, 0x45a57b00u, 0x4f7a7880u, 0xb7f6f940u, 0x82013de0u, 0xf502dfd0u, 0xd6820808u, 0x12c3d404u, 0x1c235a0eu, 0x4b504b0du},
    {0x80000000u, 0xc0000000u, 0xe0000000u, 0x50000000u, 0x68000000u, 0x4c000000u, 0x76000000u, 0xf7000000u, 0x36800000u, 0xd7400000u, 0x87e00000u, 0xef300000u, 0xa3a80000u, 0xd5440000u, 0x23aa0000u, 0x15470000u, 0xc3a98000u, 0x45464000u, 0xaba82000u, 0x09477000u, 0xdda9f800u, 0xfe44ac00u, 0xeb292200u, 0x2907f100u, 0x6ccb3d80u, 0xc6344dc0u, 0xcf61b320u, 0x137318d0u, 0xeccb3d88u, 0x06344dccu, 0x2f61b32eu, 0x437318d5u},
    {0x80000000u, 0x40000000u, 0x60000000u, 0x90000000u, 0xc8000000u, 0x74000000u, 0x52000000u, 0x03000000u, 0xeb800000u, 0x6f400000u, 0x64600000u, 0xdaf00000u, 0x17980000u, 0x297c0000u, 0xa59a0000u, 0xfa7d0000u, 0xe61b8000u, 0x713f4000u, 0x1878a000u, 0xdcce9000u, 0xb661e800u, 0x99f29c00u, 0x9c184600u, 0xd63e2100u, 0x09fa5780u, 0x548e0ac0u, 0xa380a9e0u, 0x5b413f30u, 0x56625788u, 0x49f20ac4u, 0x341aa9e6u, 0x323c3f39u},
    {0x80000000u, 0xc0000000u, 0xa0000000u, 0xd0000000u, 0xb8000000u, 0x04000000u, 0x6e000000u, 0x97000000u, 0xf2800000u, 0xedc00000u, 0x13600000u, 0x5c900000u, 0xdb580000u, 0x31e40000u, 0x09da0000u, 0xcc270000u, 0x02b88000u, 0x44b44000u, 0x0fe26000u, 0xe6505000u, 0x9ab9d800u, 0x50b50c00u, 0x79e29200u, 0xa552fb00u, 0xbe38bf80u, 0x2e77d940u, 0xf6000ae0u, 0x830112d0u, 0x84803f88u, 0xaec3994cu, 0x37e26aeau, 0x225142ddu},
    {0x80000000u, 0xc0000000u, 0xe0000000u, 0x30000000u, 0x68000000u, 0xec000000u, 0x22000000u, 0x2b000000u, 0x36800000u, 0x9d400000u, 0x6a200000u, 0x16700000u, 0x4de80000u, 0x330c0000u, 0x936a0000u, 0x824f0000u, 0x3b498000u, 0x8f3fc000u, 0x28202000u, 0xcd707000u, 0xf36aa800u, 0x724fdc00u, 0xb34bf200u, 0x533e6900u, 0x62207a80u, 0x0a7140c0u, 0xe7ea6520u, 0xc40d90f0u, 0xefe9fa88u, 0xd80e80ccu, 0x45ea452eu, 0x2f0de0f3u},
    {0x80000000u, 0xc0000000u, 0x20000000u, 0x30000000u, 0x28000000u, 0xd4000000u, 0x8a000000u, 0xff000000u, 0x84800000u, 0x73c00000u, 0x13200000u, 0xc2b00000u, 0xfb380000u, 0x361c0000u, 0x401a0000u, 0xe0af0000u, 0x11228000u, 0x19b3c000u, 0xfdb82000u, 0x5edf9000u, 0x75b88800u, 0x7adfac00u, 0xf7baba00u, 0x61ddf300u, 0xd1387e80u, 0x391e55c0u, 0xcc9ba860u, 0x776cbeb0u, 0xa000f688u, 0xf001f9ccu, 0x08011262u, 0xe4014db3u},
    {0x80000000u, 0x40000000u, 0xa0000000u, 0x50000000u, 0xb8000000u, 0x84000000u, 0x1a000000u, 0xaf000000u, 0xbd800000u, 0xdfc00000u, 0x14e00000u, 0x43500000u, 0xda380000u, 0x4e1c0000u, 0x4cda0000u, 0x364d0000u, 0x29608000u, 0xdc904000u, 0x6ed86000u, 0x5d4f5000u, 0x2ee08800u, 0xfc51ac00u, 0x7fb81e00u, 0x45dc8300u, 0xfa3a4580u, 0x5e1d6240u, 0x54dbd360u, 0xe24ec930u, 0x8b62cd88u, 0xf790ce44u, 0xc959cd6au, 0x2d8f4a35u},
    {0x80000000u, 0x40000000u, 0xe0000000u, 0x70000000u, 0x08000000u, 0xf4000000u, 0xf6000000u, 0x8b000000u, 0xc9800000u, 0x55400000u, 0x67200000u, 0xf3f00000u, 0x34780000u, 0x57440000u, 0x1ada0000u, 0xb1f50000u, 0xa9818000u, 0x6540c000u, 0x8f23a000u, 0x77f21000u, 0xca7bf800u, 0x2845fc00u, 0x255afe00u, 0x6fb67900u, 0x07233a80u, 0xc3f25ac0u, 0xdc7aed60u, 0xd34482d0u, 0xe4d94288u, 0xcef766c4u, 0x9603b36eu, 0xbb00ebd7u},
    {0x80000000u, 0x40000000u, 0xe0000000u, 0x90000000u, 0x68000000u, 0xf4000000u, 0x62000000u, 0xdf000000u, 0x79800000u, 0xdd400000u, 0x76e00000u, 0x2cf00000u, 0xcfb80000u, 0x51ec0000u, 0xc8da0000u, 0x845d0000u, 0x9b818000u, 0x42434000u, 0xef622000u, 0x61b19000u, 0xd1582800u, 0x891cac00u, 0x65626e00u, 0x0ab10900u, 0x2adbbd80u, 0x1b5d86c0u, 0x02014560u, 0x0f032470u, 0xf1821588u, 0xb9426ac4u, 0x7ce10b6eu, 0x07f3bd79u},
    {0x80000000u, 0xc0000000u, 0x60000000u, 0x50000000u, 0x18000000u, 0xdc000000u, 0x42000000u, 0x37000000u, 0x20800000u, 0xf1400000u, 0x28600000u, 0x94900000u, 0x87880000u, 0xa83c0000u, 0x556a0000u, 0xe6ef0000u, 0xf8038000u, 0x4c024000u, 0x3a01e000u, 0xbb023000u, 0x7a816800u, 0x1a43ac00u, 0x4ae18a00u, 0x52d31900u, 0x8f682380u, 0xcded9740u, 0xfa80bfa0u, 0xda43f2b0u, 0x2ae2cb88u, 0x02d07b4cu, 0x976ad5a6u, 0x11eddbb5u},
    {0x80000000u, 0xc0000000u, 0x20000000u, 0xf0000000u, 0xf8000000u, 0x34000000u, 0x62000000u, 0xf5000000u, 0xa8800000u, 0xfcc00000u, 0x8e200000u, 0x53f00000u, 0xc7780000u, 0x95740000u, 0xb8020000u, 0xd4e50000u, 0xb2808000u, 0xfdc0c000u, 0x64a02000u, 0xaa30f000u, 0x19d8f800u, 0x0e443400u, 0x935a6200u, 0xe761f500u, 0x657a2880u, 0x40913cc0u, 0xe0022e20u, 0xd0e563f0u, 0x08809f78u, 0xccc09174u, 0x56200202u, 0x97f0e5e5u},
    {0x80000000u, 0xc0000000u, 0xa0000000u, 0xf0000000u, 0xf8000000u, 0xec000000u, 0x7e000000u, 0x61000000u, 0x5c800000u, 0xe6c00000u, 0xdda00000u, 0x2a700000u, 0x93380000u, 0x13cc0000u, 0xd3ce0000u, 0x73790000u, 0x83a08000u, 0x7b70c000u, 0x97b8a000u, 0xe90cf000u, 0x886ef800u, 0xd409ec00u, 0x3218fe00u, 0xef7ca100u, 0xc556fc80u, 0x56c516c0u, 0x4556a5a0u, 0x96c50670u, 0xe556cd38u, 0x66c542ccu, 0x1d56574eu, 0x8ac549b9u},
    {0x80000000u, 0xc0000000u, 0x20000000u, 0xb0000000u, 0x58000000u, 0x2c000000u, 0x9a000000u, 0xf9000000u, 0x3c800000u, 0xb2c00000u, 0xad200000u, 0x3a300000u, 0x89980000u, 0x448c0000u, 0x2eea0000u, 0x6f810000u, 0xef208000u, 0x2f30c000u, 0x0f182000u, 0xbf4cb000u, 0xe74a5800u, 0xcb712c00u, 0x51981a00u, 0xa88c3900u, 0x94ea1c80u, 0x268102c0u, 0x8ba07520u, 0xb1f0d630u, 0x38383398u, 0x7c7c0d8cu, 0x52524a6au, 0x3d3df141u},
    {0x80000000u, 0xc0000000u, 0x20000000u, 0xb0000000u, 0xd8000000u, 0xac000000u, 0x8e000000u, 0x09000000u, 0x9e800000u, 0xa1c00000u, 0xcaa00000u, 0x33700000u, 0x95780000u, 0x085c0000u, 0x24b60000u, 0x6a350000u, 0x43788000u, 0x6d5cc000u, 0x14362000u, 0x72f5b000u, 0xcf585800u, 0x53ec6c00u, 0xc5eeae00u, 0x40d9b900u, 0xe016c680u, 0x9045cdc0u, 0x6880e4a0u, 0x74c04a70u, 0x2220f3f8u, 0x87b0b59cu, 0x9758b816u, 0x3fecfc45u},
    {0x80000000u, 0x40000000u, 0xe0000000u, 0xf0000000u, 0xa8000000u, 0x2c000000u, 0xa2000000u, 0x2d000000u, 0xda800000u, 0xf9400000u, 0xec600000u, 0x02b00000u, 0x3d480000u, 0x825c0000u, 0x7d4a0000u, 0x62610000u, 0x8dc88000u, 0xca1c4000u, 0xa1aae000u, 0x6891f000u, 0x8c602800u, 0xb2b06c00u, 0x75484200u, 0x5e5cdd00u, 0x774a7280u, 0x6361d540u, 0xf548ce60u, 0x1e5c6fb0u, 0x974a07c8u, 0x93618b1cu, 0x5d48b92au, 0x325c0cd1u},
    {0x80000000u, 0xc0000000u, 0xe0000000u, 0x30000000u, 0xc8000000u, 0x7c000000u, 0x82000000u, 0x4f000000u, 0xbe800000u, 0xedc00000u, 0x21600000u, 0xab700000u, 0x78680000u, 0x746c0000u, 0x1e9a0000u, 0xfdcb0000u, 0x39088000u, 0x2f1cc000u, 0x4ef2e000u, 0xc5a73000u, 0x6d924800u, 0xe1d7bc00u, 0x4b7ae200u, 0x487bbf00u, 0xbc801680u, 0x62c061c0u, 0x7fe08b60u, 0x76b0a870u, 0x91088ce8u, 0xa31caaacu, 0xe4f2037au, 0xc6a7f47bu},
    {0x80000000u, 0xc0000000u, 0x20000000u, 0x10000000u, 0x98000000u, 0x2c000000u, 0x06000000u, 0xcd000000u, 0x8a800000u, 0x1bc00000u, 0xffa00000u, 0xad500000u, 0x7af80000u, 0xb3dc0000u, 0x5b2e0000u, 0x1f290000u, 0x9d588000u, 0xf28cc000u, 0x07d62000u, 0x71f51000u, 0xd4f61800u, 0xda65ec00u, 0x632ea600u, 0xe3291d00u, 0x2358b280u, 0x038ce7c0u, 0x135641a0u, 0x8b355c50u, 0xa7d6ee78u, 0xa1f5891cu, 0x6cf6880eu, 0xe665b4b9u},
    {0x80000000u, 0x40000000u, 0xa0000000u, 0x90000000u, 0x98000000u, 0x54000000u, 0x3a000000u, 0x9d000000u, 0x7e800000u, 0x7f400000u, 0x17200000u, 0xab500000u, 0x6df80000u, 0x96a40000u, 0x83d20000u, 0x71e10000u, 0xc0d88000u, 0xe0f44000u, 0x30aaa000u, 0x08059000u, 0xcc2a1800u, 0x6e451400u, 0xa78a1a00u, 0xe3554d00u, 0x01d2c680u, 0x68e1fb40u, 0xbc589520u, 0xc6b4b250u, 0xfb0a1178u, 0x1515b0e4u, 0xf272c872u, 0xb1f12cf1u},
    {0x80000000u, 0xc0000000u, 0xe0000000u, 0xb0000000u, 0x08000000u, 0x84000000u, 0xb2000000u, 0xb9000000u, 0xbe800000u, 0x4fc00000u, 0x55600000u, 0xf8f00000u, 0xac280000u, 0x66d40000u, 0xb30a0000u, 0x8bb50000u, 0xc7c88000u, 0x11e4c000u, 0xaa42e000u, 0xa591b000u, 0xd0ea8800u, 0x78854400u, 0x6c80d200u, 0x86c0c900u, 0x03e05680u, 0x83307bc0u, 0x4348ef60u, 0xa324c5f0u, 0x13a2a0a8u, 0x1ba19014u, 0x9f22d8eau, 0x2d61fc85u},
    {0x80000000u, 0xc0000000u, 0x60000000u, 0x30000000u, 0x78000000u, 0x24000000u, 0x9e000000u, 0x47000000u, 0x67800000u, 0xf7400000u, 0xdf200000u, 0xb3100000u, 0x71680000u, 0x8c4c0000u, 0x32520000u, 0xe5d50000u, 0xaa528000u, 0x31d5c000u, 0x2c52e000u, 0x62d5f000u, 0xadd29800u, 0xf695d400u, 0x8b720600u, 0xf5c59300u, 0x42ba6180u, 0x3dd96440u, 0xdea0bea0u, 0xe750d750u, 0x37c84fc8u, 0xbf1c9b1cu, 0x839a1d9au, 0x09c94ec9u},
    {0x80000000u, 0xc0000000u, 0xe0000000u, 0xb0000000u, 0x78000000u, 0x9c000000u, 0xee000000u, 0x1b000000u, 0xcb800000u, 0xc3400000u, 0xc7a00000u, 0x05100000u, 0x88680000u, 0xc4740000u, 0x225a0000u, 0x3da10000u, 0x345a8000u, 0x7aa1c000u, 0xf1da6000u, 0x12e17000u, 0x85fa1800u, 0x48b1ec00u, 0x2432f600u, 0x92d5f700u, 0x45803d80u, 0xa8403440u, 0x94207a20u, 0xea50f150u, 0xd9c81248u, 0x46648524u, 0x8fb24812u, 0x21952485u},
    {0x80000000u, 0x40000000u, 0x60000000u, 0x10000000u, 0x58000000u, 0x7c000000u, 0xc2000000u, 0xe1000000u, 0x0d800000u, 0xd7c00000u, 0x2aa00000u, 0xf5300000u, 0x9ba80000u, 0xc0f40000u, 0x20c60000u, 0x702f0000u, 0x48668000u, 0x241f4000u, 0xbe4ee000u, 0x232b5000u, 0xec28b800u, 0xda342c00u, 0xfde6fa00u, 0xdfdf8d00u, 0x6eee1780u, 0x5b1b0ac0u, 0xe0000520u, 0x500093f0u, 0x38008488u, 0x6c008e04u, 0x9a000bceu, 0x9d00d8ebu},
    {0x80000000u, 0x40000000u, 0x20000000u, 0x30000000u, 0xb8000000u, 0xac000000u, 0x72000000u, 0xb1000000u, 0x03800000u, 0xd2c00000u, 0xc1600000u, 0x9b900000u, 0x4e480000u, 0x0b740000u, 0x864e0000u, 0x3f0b0000u, 0x68068000u, 0x447f4000u, 0x7648a000u, 0xe7747000u, 0xd44e9800u, 0xbe0b9c00u, 0xd3864a00u, 0x3abf5d00u, 0xc528d180u, 0xcde413c0u, 0x99865ae0u, 0x67bfd550u, 0x94a8c528u, 0x9e24cde4u, 0xe3669986u, 0x82ef67bfu},
    {0x80000000u, 0xc0000000u, 0xe0000000u, 0x70000000u, 0x88000000u, 0x44000000u, 0x4a000000u, 0x47000000u, 0xdd800000u, 0x42400000u, 0xc3200000u, 0x77100000u, 0x75b80000u, 0x966c0000u, 0x715e0000u, 0xfc950000u, 0xa6e68000u, 0xd9f9c000u, 0x28386000u, 0x142cb000u, 0x527e6800u, 0xfb853400u, 0x5b5e4200u, 0x0b95c300u, 0x1366f780u, 0xafb9b540u, 0x2918f6a0u, 0x603cc150u, 0xb0469498u, 0x68a9927cu, 0x34a09b66u, 0xc250ebb9u},
    {0x80000000u, 0xc0000000u, 0x20000000u, 0x50000000u, 0xd8000000u, 0xfc000000u, 0xf6000000u, 0xd5000000u, 0xbf800000u, 0x2c400000u, 0xeee00000u, 0x09700000u, 0x19080000u, 0x21640000u, 0xad6a0000u, 0xd3130000u, 0x22828000u, 0x9707c000u, 0x98e0a000u, 0x1c709000u, 0x8688f800u, 0x5d24ac00u, 0x9b8a2e00u, 0x26632900u, 0xcd8ac980u, 0x63633940u, 0x8a0af160u, 0xe323b530u, 0x4aea8fe8u, 0xc3534414u, 0x1a623a62u, 0x1b774b77u},
    {0x80000000u, 0x40000000u, 0x60000000u, 0x50000000u, 0x58000000u, 0xac000000u, 0x6a000000u, 0x85000000u, 0xfb800000u, 0xa8c00000u, 0x84200000u, 0xae300000u, 0x4b080000u, 0xe0740000u, 0x10860000u, 0x388f0000u, 0xfc2e8000u, 0x320b4000u, 0x2980e000u, 0x91c01000u, 0x2da03800u, 0x7ff0fc00u, 0x06a83200u, 0xcf842900u, 0x4e2e9180u, 0x5b0b2dc0u, 0xd800ffa0u, 0xec0046f0u, 0x0a00af28u, 0xd5001e44u, 0xa380038eu, 0x04c074fbu},
    {0x80000000u, 0xc0000000u, 0xa0000000u, 0x50000000u, 0xe8000000u, 0x44000000u, 0x5e000000u, 0xad000000u, 0xef800000u, 0x68400000u, 0x84600000u, 0xfe500000u, 0xfd280000u, 0x07f40000u, 0x2c620000u, 0xda4f0000u, 0x53068000u, 0x12dfc000u, 0x6f802000u, 0xa8403000u, 0x24602800u, 0xae501400u, 0x15283a00u, 0x43f41100u, 0x72621780u, 0x774f2b40u, 0xbc86bbe0u, 0x7a9fda10u, 0xebe00118u, 0x56100f94u, 0xd948174au, 0xa9a415fdu},
    {0x80000000u, 0xc0000000u, 0x60000000u, 0xb0000000u, 0x18000000u, 0x04000000u, 0xda000000u, 0x09000000u, 0x22800000u, 0xe8400000u, 0xbc600000u, 0x0e300000u, 0x7b580000u, 0x378c0000u, 0x14c20000u, 0x874d0000u, 0x99d48000u, 0xbfb94000u, 0x18802000u, 0x91403000u, 0xe6e01800u, 0x52702c00u, 0x05380600u, 0x34bc0100u, 0x971a3680u, 0x51810240u, 0x13f688a0u, 0xde847a10u, 0x466c8f18u, 0x1745738cu, 0x91fa26d6u, 0x73f111e3u},
    {0x80000000u, 0x40000000u, 0x20000000u, 0x50000000u, 0x88000000u, 0x9c000000u, 0x2e000000u, 0x05000000u, 0xab800000u, 0x1c400000u, 0x6e200000u, 0x25100000u, 0xfba80000u, 0x94040000u, 0xf26e0000u, 0x0b070000u, 0xfeaa8000u, 0x3fd1c000u, 0xee202000u, 0x65101000u, 0xdba80800u, 0xc4041400u, 0x7a6e2200u, 0x97072700u, 0xd0aa8b80u, 0x3ad1c140u, 0x45a00ae0u, 0x79501710u, 0xb5881388u, 0xe1141d44u, 0x81c61ceau, 0x03030201u},
    {0x80000000u, 0xc0000000u, 0x20000000u, 0x50000000u, 0xc8000000u, 0x3c000000u, 0x3e000000u, 0x67000000u, 0xf9800000u, 0xcc400000u, 0x66600000u, 0xb3100000u, 0xaba80000u, 0x5d240000u, 0xc4fe0000u, 0xb8cf0000u, 0x66bb8000u, 0x71a8c000u, 0x10602000u, 0x28103000u, 0x4c280800u, 0xa6641400u, 0x931e3200u, 0xfb9f0f00u, 0x95738f80u, 0xf89cd9c0u, 0x86b61e60u, 0x01bb0310u, 0x880d9198u, 0xdc13f8c4u, 0x4e6db8eau, 0xff03e849u},
    {0x80000000u, 0x40000000u, 0x20000000u, 0xb0000000u, 0x58000000u, 0x44000000u, 0x7e000000u, 0x69000000u, 0x5b800000u, 0xdc400000u, 0x5a200000u, 0x87100000u, 0xdad80000u, 0x9bec0000u, 0xbc420000u, 0xca0f0000u, 0x6f7c8000u, 0xc6d9c000u, 0xa1a02000u, 0xab501000u, 0xf8f80800u, 0xe8fc2c00u, 0x409a1600u, 0x7ce31100u, 0xf6be9f80u, 0xb996da40u, 0xcf7cb6e0u, 0x36d9e710u, 0xd9a03e88u, 0x5f501dc4u, 0xdef828b6u, 0xc5fc1bfbu},
    {0x80000000u, 0x40000000u, 0xa0000000u, 0xb0000000u, 0x48000000u, 0x74000000u, 0xc2000000u, 0xe7000000u, 0xb5800000u, 0xba400000u, 0x9b200000u, 0xa3d00000u, 0x2f180000u, 0x81840000u, 0xd82a0000u, 0xcc190000u, 0x5e078000u, 0xe138c000u, 0xd8982000u, 0x9cc41000u, 0x568a2800u, 0x65892c00u, 0xa23f9200u, 0xb76cdd00u, 0xedaa1080u, 0x365929c0u, 0x65278560u, 0xf2e8c290u, 0xbf8014c8u, 0x694025f4u, 0x4ca01346u, 0x4e9035a1u},
    {0x80000000u, 0x40000000u, 0xa0000000u, 0xf0000000u, 0x98000000u, 0xb4000000u, 0x52000000u, 0x07000000u, 0xbf800000u, 0x5a400000u, 0x3b200000u, 0x91d00000u, 0xd3380000u, 0xfdec0000u, 0x954a0000u, 0x58f10000u, 0xb5df8000u, 0x091dc000u, 0x86b82000u, 0xa4ac1000u, 0x7bea2800u, 0xd0613c00u, 0x2847a600u, 0x8c61ed00u, 0x166a3480u, 0xcd2111c0u, 0x0ce787e0u, 0xb7f1ea90u, 0x667208c8u, 0x151d1974u, 0x1895884eu, 0x15ecc2bbu},
    {0x80000000u, 0xc0000000u, 0xe0000000u, 0x70000000u, 0xf8000000u, 0x4c000000u, 0xa6000000u, 0x89000000u, 0x6e800000u, 0x1a400000u, 0x17600000u, 0x4bf00000u, 0xa2f80000u, 0x7c5c0000u, 0x7e360000u, 0x551b0000u, 0x40808000u, 0x272d4000u, 0x93982000u, 0x7eac3000u, 0x524e3800u, 0x43071c00u, 0xd1d6be00u, 0x75c65300u, 0xd7e08980u, 0xacdd5240u, 0xd16003a0u, 0x72f02a90u, 0xd47803d8u, 0x5a1c1dfcu, 0x37563f3eu, 0xdbeb2e57u},
    {0x80000000u, 0x40000000u, 0x20000000u, 0x30000000u, 0xb8000000u, 0x3c000000u, 0xde000000u, 0xdf000000u, 0x29800000u, 0x32400000u, 0xe9200000u, 0x62900000u, 0x71d80000u, 0x5e3c0000u, 0x9f2e0000u, 0x09e70000u, 0x026b8000u, 0x5176c000u, 0x5ef82000u, 0xafac1000u, 0x81760800u, 0xb69b0c00u, 0x3be5ae00u, 0xeb41cf00u, 0x33eb9780u, 0x2f36e7c0u, 0xf1d82260u, 0x1e3c1090u, 0xbf2e1c48u, 0x39e71ba4u, 0xba6b85f6u, 0x6d76ef4fu},
    {0x80000000u, 0x40000000u, 0xa0000000u, 0xd0000000u, 0xf8000000u, 0x3c000000u, 0x6e000000u, 0x19000000u, 0x50800000u, 0xca400000u, 0x7b200000u, 0xafd00000u, 0x97a80000u, 0x4b9c0000u, 0x55ae0000u, 0x64ef0000u, 0xf0288000u, 0x68524000u, 0x64082000u, 0x820c1000u, 0x8f262800u, 0x75a33400u, 0xf4aebe00u, 0xa8614f00u, 0x842ebb80u, 0xf2215640u, 0xa70e9c20u, 0xb1f15690u, 0xa6a6a8c8u, 0xdf6d40f4u, 0xcd88886au, 0x68c27fa7u},
    {0x80000000u, 0x40000000u, 0x60000000u, 0xd0000000u, 0xc8000000u, 0xbc000000u, 0x4e000000u, 0x57000000u, 0x80800000u, 0x0a400000u, 0xfd200000u, 0x8db00000u, 0xffa80000u, 0xa6840000u, 0x110e0000u, 0x4bdf0000u, 0x74d78000u, 0xb8724000u, 0x84082000u, 0x8a741000u, 0xbd061800u, 0xedab3400u, 0x2fd1b200u, 0x6ed96f00u, 0xad59b380u, 0x05ed45c0u, 0x23ff9820u, 0x38b66690u, 0x8e263548u, 0x771b286cu, 0x30f9866au, 0x121d6761u},
};

}  // namespace cardio::detail
