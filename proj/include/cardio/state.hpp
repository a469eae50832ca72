#pragma once

#include <array>
#include <string_view>

namespace cardio {

/// The 14 dynamical unknowns: 4 chamber volumes [mL], 6 compartment
/// pressures [mmHg], 4 inertial flow rates [mL/s].
using State = std::array<double, 14>;

enum StateIndex : int {
  iV_LA = 0,
  iV_LV,
  iV_RA,
  iV_RV,
  ip_AR_SYS,
  ip_C_SYS,
  ip_VEN_SYS,
  ip_AR_PUL,
  ip_C_PUL,
  ip_VEN_PUL,
  iQ_AR_SYS,
  iQ_VEN_SYS,
  iQ_AR_PUL,
  iQ_VEN_PUL,
};

inline constexpr std::array<std::string_view, 14> kStateNames = {
    "V_LA",      "V_LV",      "V_RA",      "V_RV",     "p_AR_SYS",
    "p_C_SYS",   "p_VEN_SYS", "p_AR_PUL",  "p_C_PUL",  "p_VEN_PUL",
    "Q_AR_SYS",  "Q_VEN_SYS", "Q_AR_PUL",  "Q_VEN_PUL"};

}  // namespace cardio
