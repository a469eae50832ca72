#pragma once

#include <array>
#include <string_view>

namespace cardio {

/// Elastance-based description of one cardiac chamber.
///
/// Pressure is generated as p_c(t) = E_c(t) * (V_c - VU), where the
/// time-varying elastance E_c(t) = EB + EA * e_c(t) follows the periodic
/// activation e_c(t). All times are absolute seconds within a heartbeat of
/// period T_HB.
struct ChamberParams {
  double EA;  ///< active elastance peak amplitude [mmHg/mL]
  double EB;  ///< passive (baseline) elastance [mmHg/mL]
  double VU;  ///< unloaded volume [mL]
  double tC;  ///< contraction onset [s]
  double TC;  ///< contraction duration [s]
  double tR;  ///< relaxation onset [s]
  double TR;  ///< relaxation duration [s]
};

/// One Windkessel vascular compartment. Capillary compartments carry L = 0
/// (blood inertia negligible there).
struct CompartmentParams {
  double R;  ///< resistance [mmHg*s/mL]
  double C;  ///< compliance [mL/mmHg]
  double L;  ///< inertance [mmHg*s^2/mL]
};

/// Full parameterization of the closed-loop circulation.
struct ParameterSet {
  ChamberParams LA, LV, RA, RV;
  CompartmentParams AR_SYS;   ///< systemic arteries (RLC)
  CompartmentParams C_SYS;    ///< systemic capillaries (RC, L = 0)
  CompartmentParams VEN_SYS;  ///< systemic veins (RLC)
  CompartmentParams AR_PUL;   ///< pulmonary arteries (RLC)
  CompartmentParams C_PUL;    ///< oxygenated pulmonary capillaries (RC)
  CompartmentParams VEN_PUL;  ///< pulmonary veins (RLC)
  double R_SH;   ///< shunt (non-oxygenated capillary) resistance [mmHg*s/mL]
  double C_SH;   ///< shunt compliance [mL/mmHg]
  double R_min;  ///< open-valve resistance [mmHg*s/mL]
  double R_max;  ///< closed-valve resistance [mmHg*s/mL]
  double HR;     ///< heart rate [beats/min]

  double T_HB() const { return 60.0 / HR; }

  /// Throws std::invalid_argument when any structural invariant is violated
  /// (non-positive R/C/E, R_min >= R_max, HR <= 0, activation windows longer
  /// than the heartbeat, ...).
  void validate() const;
};

/// Reference ("ideal healthy individual") parameter values. Activation
/// timings are fixed fractions of the heartbeat period, so they follow the
/// requested heart rate.
ParameterSet reference_parameters(double HR = 80.0);

/// The 32 calibratable parameters: everything except HR and the activation
/// timings, in canonical order.
inline constexpr int kNumCalibratable = 32;

const std::array<std::string_view, kNumCalibratable>& calibratable_names();

/// Canonical index of a calibratable parameter name, or -1 if unknown.
int param_index(std::string_view name);
std::string_view param_name(int id);

double get_calibratable(const ParameterSet& p, int id);
void set_calibratable(ParameterSet& p, int id, double value);

}  // namespace cardio
