#include "cardio/hyperbox.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>

namespace cardio {

bool Hyperbox::contains(const std::vector<double>& p) const {
  if (p.size() != lo.size()) return false;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] < lo[i] || p[i] > hi[i]) return false;
  return true;
}

std::string Hyperbox::fingerprint() const {
  // FNV-1a over the raw bound bytes; stable across runs, good enough to
  // detect a mismatched box.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* data, std::size_t n) {
    const unsigned char* b = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  mix(lo.data(), lo.size() * sizeof(double));
  mix(hi.data(), hi.size() * sizeof(double));
  const unsigned char c = covid ? 1 : 0;
  mix(&c, 1);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

Hyperbox build_hyperbox(const ParameterSet& ref, bool covid) {
  Hyperbox box;
  box.covid = covid;
  box.lo.resize(kNumCalibratable);
  box.hi.resize(kNumCalibratable);
  for (int i = 0; i < kNumCalibratable; ++i) {
    const double r = get_calibratable(ref, i);
    box.lo[i] = (1.0 - 2.0 / 3.0) * r;
    box.hi[i] = (1.0 + 2.0 / 3.0) * r;
  }
  if (covid) {
    for (const char* n : {"EA_LA", "EA_LV", "EA_RA", "EA_RV"})
      box.lo[param_index(n)] /= 2.0;
    for (const char* n : {"R_AR_PUL", "R_C_PUL", "R_SH", "R_VEN_PUL"})
      box.hi[param_index(n)] *= 3.0;
    for (const char* n : {"C_AR_PUL", "C_C_PUL", "C_SH", "C_VEN_PUL"})
      box.lo[param_index(n)] /= 3.0;
  }
  return box;
}

}  // namespace cardio
