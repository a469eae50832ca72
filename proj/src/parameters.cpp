#include "cardio/parameters.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cardio {

namespace {

void check(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("ParameterSet: " + what);
}

void check_chamber(const ChamberParams& c, const char* name, double T_HB) {
  const std::string n = name;
  check(c.EA > 0.0, "EA_" + n + " must be > 0");
  check(c.EB > 0.0, "EB_" + n + " must be > 0");
  check(c.VU >= 0.0, "VU_" + n + " must be >= 0");
  check(c.TC >= 0.0 && c.TR >= 0.0, "durations for " + n + " must be >= 0");
  check(c.TC + c.TR <= T_HB, "TC+TR for " + n + " exceeds the heartbeat");
  check(c.tC >= 0.0 && c.tC < T_HB, "tC_" + n + " outside [0, T_HB)");
}

void check_compartment(const CompartmentParams& c, const char* name) {
  const std::string n = name;
  check(c.R > 0.0, "R of " + n + " must be > 0");
  check(c.C > 0.0, "C of " + n + " must be > 0");
  check(c.L >= 0.0, "L of " + n + " must be >= 0");
}

}  // namespace

void ParameterSet::validate() const {
  check(HR > 0.0, "HR must be > 0");
  const double T = T_HB();
  check_chamber(LA, "LA", T);
  check_chamber(LV, "LV", T);
  check_chamber(RA, "RA", T);
  check_chamber(RV, "RV", T);
  check_compartment(AR_SYS, "AR_SYS");
  check_compartment(C_SYS, "C_SYS");
  check_compartment(VEN_SYS, "VEN_SYS");
  check_compartment(AR_PUL, "AR_PUL");
  check_compartment(C_PUL, "C_PUL");
  check_compartment(VEN_PUL, "VEN_PUL");
  check(R_SH > 0.0, "R_SH must be > 0");
  check(C_SH > 0.0, "C_SH must be > 0");
  check(R_min > 0.0, "R_min must be > 0");
  check(R_min < R_max, "R_min must be < R_max");
}

ParameterSet reference_parameters(double HR) {
  ParameterSet p{};
  p.HR = HR;
  const double T = p.T_HB();

  auto chamber = [T](double EA, double EB, double VU, double tC_frac,
                     double TC_frac, double TR_frac) {
    ChamberParams c{};
    c.EA = EA;
    c.EB = EB;
    c.VU = VU;
    c.tC = tC_frac * T;
    c.TC = TC_frac * T;
    c.tR = c.tC + c.TC;
    c.TR = TR_frac * T;
    return c;
  };

  p.LA = chamber(0.38, 0.27, 2.31, 0.75, 0.10, 0.80);
  p.LV = chamber(2.7, 0.069, 3.54, 0.00, 0.265, 0.40);
  p.RA = chamber(0.13, 0.20, 3.54, 0.80, 0.10, 0.70);
  p.RV = chamber(0.43, 0.041, 8.41, 0.00, 0.30, 0.40);

  p.R_min = 0.0063;
  p.R_max = 94168.0;

  p.AR_SYS = {0.59, 1.33, 0.00021};
  p.C_SYS = {0.022, 0.28, 0.0};
  p.VEN_SYS = {0.36, 75.0, 0.000021};
  p.AR_PUL = {0.071, 6.0, 0.000021};
  p.C_PUL = {0.018, 5.78, 0.0};
  p.VEN_PUL = {0.038, 13.18, 0.000021};
  p.R_SH = 0.35;
  p.C_SH = 0.049;
  return p;
}

const std::array<std::string_view, kNumCalibratable>& calibratable_names() {
  static const std::array<std::string_view, kNumCalibratable> names = {
      "EA_LA",     "EB_LA",     "VU_LA",     "EA_LV",      "EB_LV",
      "VU_LV",     "EA_RA",     "EB_RA",     "VU_RA",      "EA_RV",
      "EB_RV",     "VU_RV",     "R_min",     "R_max",      "R_AR_SYS",
      "C_AR_SYS",  "L_AR_SYS",  "R_C_SYS",   "C_C_SYS",    "R_VEN_SYS",
      "C_VEN_SYS", "L_VEN_SYS", "R_AR_PUL",  "C_AR_PUL",   "L_AR_PUL",
      "R_C_PUL",   "C_C_PUL",   "R_SH",      "C_SH",       "R_VEN_PUL",
      "C_VEN_PUL", "L_VEN_PUL"};
  return names;
}

int param_index(std::string_view name) {
  const auto& names = calibratable_names();
  for (int i = 0; i < kNumCalibratable; ++i)
    if (names[i] == name) return i;
  return -1;
}

std::string_view param_name(int id) {
  if (id < 0 || id >= kNumCalibratable)
    throw std::out_of_range("param_name: id out of range");
  return calibratable_names()[id];
}

namespace {

// Uniform access to the 32 calibratable scalars, in canonical order.
double* slot(ParameterSet& p, int id) {
  switch (id) {
    case 0: return &p.LA.EA;
    case 1: return &p.LA.EB;
    case 2: return &p.LA.VU;
    case 3: return &p.LV.EA;
    case 4: return &p.LV.EB;
    case 5: return &p.LV.VU;
    case 6: return &p.RA.EA;
    case 7: return &p.RA.EB;
    case 8: return &p.RA.VU;
    case 9: return &p.RV.EA;
    case 10: return &p.RV.EB;
    case 11: return &p.RV.VU;
    case 12: return &p.R_min;
    case 13: return &p.R_max;
    case 14: return &p.AR_SYS.R;
    case 15: return &p.AR_SYS.C;
    case 16: return &p.AR_SYS.L;
    case 17: return &p.C_SYS.R;
    case 18: return &p.C_SYS.C;
    case 19: return &p.VEN_SYS.R;
    case 20: return &p.VEN_SYS.C;
    case 21: return &p.VEN_SYS.L;
    case 22: return &p.AR_PUL.R;
    case 23: return &p.AR_PUL.C;
    case 24: return &p.AR_PUL.L;
    case 25: return &p.C_PUL.R;
    case 26: return &p.C_PUL.C;
    case 27: return &p.R_SH;
    case 28: return &p.C_SH;
    case 29: return &p.VEN_PUL.R;
    case 30: return &p.VEN_PUL.C;
    case 31: return &p.VEN_PUL.L;
    default: throw std::out_of_range("calibratable id out of range");
  }
}

}  // namespace

double get_calibratable(const ParameterSet& p, int id) {
  return *slot(const_cast<ParameterSet&>(p), id);
}

void set_calibratable(ParameterSet& p, int id, double value) {
  *slot(p, id) = value;
}

}  // namespace cardio
