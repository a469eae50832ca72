#pragma once

#include <cstddef>
#include <vector>

#include "cardio/integrator.hpp"
#include "cardio/model.hpp"
#include "cardio/parameters.hpp"
#include "cardio/state.hpp"

namespace cardio {

/// One converged heartbeat sampled on a uniform grid, with the derived
/// chamber pressures and algebraic flows evaluated alongside the states.
struct BeatTrajectory {
  double t_begin = 0.0, t_end = 0.0;      // [T - T_HB, T]
  std::vector<double> t;                  // grid_points + 1 entries
  std::vector<State> x;
  std::vector<double> p_LA, p_LV, p_RA, p_RV;
  std::vector<double> Q_MV, Q_AV, Q_TV, Q_PV;
  std::vector<double> Q_C_SYS, Q_C_PUL, Q_SH;

  std::size_t size() const { return t.size(); }
};

struct LimitCycleResult {
  BeatTrajectory beat;
  double periodicity_residual = 0.0;  // ||x(T) - x(T - T_HB)|| / ||x(T)||
  State x_final{};
  std::size_t n_accepted = 0;
  std::size_t n_rhs_evals = 0;
};

/// Integrate cfg.beats heartbeats from x0 and extract the last beat.
LimitCycleResult run_to_limit_cycle(const ParameterSet& p, const State& x0,
                                    const IntegratorConfig& cfg = {});

/// Same, starting from default_initial_state(p).
LimitCycleResult run_to_limit_cycle(const ParameterSet& p,
                                    const IntegratorConfig& cfg = {});

}  // namespace cardio
