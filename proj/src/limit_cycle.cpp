#include "cardio/limit_cycle.hpp"

#include <cmath>

namespace cardio {

LimitCycleResult run_to_limit_cycle(const ParameterSet& p, const State& x0,
                                    const IntegratorConfig& cfg) {
  const double T_HB = p.T_HB();
  const double T = cfg.beats * T_HB;
  ModelRhs rhs(p);

  // Keep dense output only where it is needed: the final beat plus a margin
  // covering the periodicity sample at T - T_HB.
  const double store_from = T - 1.05 * T_HB;
  auto sol = integrate<14>(rhs, x0, 0.0, T, cfg, store_from);

  LimitCycleResult res;
  res.x_final = sol.y_end();
  res.n_accepted = sol.n_accepted();
  res.n_rhs_evals = sol.n_rhs_evals();

  State prev;
  sol.eval(T - T_HB, prev);
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 14; ++i) {
    const double d = res.x_final[i] - prev[i];
    num += d * d;
    den += res.x_final[i] * res.x_final[i];
  }
  res.periodicity_residual = std::sqrt(num) / std::sqrt(den);

  BeatTrajectory& b = res.beat;
  const int G = cfg.grid_points;
  b.t_begin = T - T_HB;
  b.t_end = T;
  b.t.resize(G + 1);
  b.x.resize(G + 1);
  b.p_LA.resize(G + 1);
  b.p_LV.resize(G + 1);
  b.p_RA.resize(G + 1);
  b.p_RV.resize(G + 1);
  b.Q_MV.resize(G + 1);
  b.Q_AV.resize(G + 1);
  b.Q_TV.resize(G + 1);
  b.Q_PV.resize(G + 1);
  b.Q_C_SYS.resize(G + 1);
  b.Q_C_PUL.resize(G + 1);
  b.Q_SH.resize(G + 1);

  const double dt = T_HB / G;
  for (int i = 0; i <= G; ++i) {
    const double t = (i == G) ? T : b.t_begin + i * dt;
    b.t[i] = t;
    sol.eval(t, b.x[i]);
    const State& x = b.x[i];
    b.p_LA[i] = rhs.chamber_pressure_of(0, t, x[iV_LA]);
    b.p_LV[i] = rhs.chamber_pressure_of(1, t, x[iV_LV]);
    b.p_RA[i] = rhs.chamber_pressure_of(2, t, x[iV_RA]);
    b.p_RV[i] = rhs.chamber_pressure_of(3, t, x[iV_RV]);
    b.Q_MV[i] = rhs.flow_through_valve(b.p_LA[i] - b.p_LV[i]);
    b.Q_AV[i] = rhs.flow_through_valve(b.p_LV[i] - x[ip_AR_SYS]);
    b.Q_TV[i] = rhs.flow_through_valve(b.p_RA[i] - b.p_RV[i]);
    b.Q_PV[i] = rhs.flow_through_valve(b.p_RV[i] - x[ip_AR_PUL]);
    b.Q_C_SYS[i] = (x[ip_C_SYS] - x[ip_VEN_SYS]) / p.C_SYS.R;
    b.Q_C_PUL[i] = (x[ip_C_PUL] - x[ip_VEN_PUL]) / p.C_PUL.R;
    b.Q_SH[i] = (x[ip_C_PUL] - x[ip_VEN_PUL]) / p.R_SH;
  }
  return res;
}

LimitCycleResult run_to_limit_cycle(const ParameterSet& p,
                                    const IntegratorConfig& cfg) {
  return run_to_limit_cycle(p, default_initial_state(p), cfg);
}

}  // namespace cardio
