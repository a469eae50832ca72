#pragma once

#include <cmath>

#include "cardio/parameters.hpp"
#include "cardio/state.hpp"

namespace cardio {

/// Periodic cardiac activation in [0, 1]: a raised-cosine ramp up over the
/// contraction window [tC, tC+TC), a raised-cosine ramp down over the
/// relaxation window [tR, tR+TR) (both modulo T_HB), zero elsewhere.
double activation(double t, const ChamberParams& ch, double T_HB);

/// E(t) = EB + EA * activation(t).
double elastance(double t, const ChamberParams& ch, double T_HB);

/// p = E(t) * (V - VU).
double chamber_pressure(double V, double t, const ChamberParams& ch,
                        double T_HB);

/// Smooth diode law for the valve leaflets: interpolates between R_max
/// (closed, dp << 0) and R_min (open, dp >> 0) through sqrt(R_min*R_max)
/// at dp = 0.
double valve_resistance(double dp, double R_min, double R_max);

/// Q(dp) = dp / valve_resistance(dp).
double valve_flow(double dp, double R_min, double R_max);

/// Right-hand side of the 14-state circulation ODE, with all parameter
/// combinations precomputed so repeated evaluations stay cheap.
class ModelRhs {
 public:
  explicit ModelRhs(const ParameterSet& p);

  /// dx = f(t, x). Throws std::domain_error when x contains a non-finite
  /// component (the message names it).
  void operator()(double t, const State& x, State& dx) const;

  /// Chamber activation/pressure helpers evaluated with the same
  /// precomputed timing data (c = 0..3 for LA, LV, RA, RV).
  double chamber_activation(int c, double t) const;
  double chamber_pressure_of(int c, double t, double V) const;
  double flow_through_valve(double dp) const;

 private:
  struct Chamber {
    double EA, EB, VU;
    double tC, TC, tR, TR;
    double pi_over_TC, pi_over_TR;
  };
  Chamber ch_[4];
  double T_;
  // valve law: Q = dp * inv_sqrt_rr * exp(c_ln * atan(100*pi*dp))
  double c_ln_, inv_sqrt_rr_;
  double R_AR_SYS_, R_VEN_SYS_, R_AR_PUL_, R_VEN_PUL_;
  double inv_R_C_SYS_, inv_R_C_PUL_, inv_R_SH_;
  double inv_C_AR_SYS_, inv_C_C_SYS_, inv_C_VEN_SYS_;
  double inv_C_AR_PUL_, inv_C_PULCAP_, inv_C_VEN_PUL_;
  double inv_L_AR_SYS_, inv_L_VEN_SYS_, inv_L_AR_PUL_, inv_L_VEN_PUL_;
};

/// Total stressed volume: sum of chamber volumes plus C_i * p_i over the six
/// pressure states, with the shunt compliance lumped into the p_C_PUL term.
/// Exactly conserved by the continuous dynamics.
double conserved_volume(const State& x, const ParameterSet& p);

/// Physiological default initial condition: chambers at VU + 40 mL (atria) /
/// VU + 60 mL (ventricles), compartment pressures chosen so that each
/// compartment holds the stressed volume it would hold at the reference
/// compliances and typical mean pressures (keeping the conserved total
/// volume independent of the sampled compliances), inertial flows at rest.
State default_initial_state(const ParameterSet& p);

}  // namespace cardio
