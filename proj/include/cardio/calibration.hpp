#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "cardio/correlation.hpp"
#include "cardio/hyperbox.hpp"
#include "cardio/integrator.hpp"
#include "cardio/lbfgsb.hpp"
#include "cardio/outputs.hpp"
#include "cardio/parameters.hpp"

namespace cardio {

struct CalibrationDatum {
  std::string name;   // one of the raw output names
  double value;

  friend bool operator==(const CalibrationDatum&,
                         const CalibrationDatum&) = default;
};

class LossEvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A fixed model (base parameters, HR, optional BSA), a choice of free
/// parameters with bounds, and the measured data to match.
class CalibrationProblem {
 public:
  CalibrationProblem(ParameterSet base, std::vector<int> free_ids,
                     const Hyperbox& box, std::vector<CalibrationDatum> data,
                     std::optional<double> BSA = std::nullopt,
                     IntegratorConfig ode = {});

  int n_free() const { return static_cast<int>(free_ids_.size()); }
  int n_data() const { return static_cast<int>(data_.size()); }
  const std::vector<int>& free_ids() const { return free_ids_; }
  const std::vector<double>& lo() const { return lo_; }
  const std::vector<double>& hi() const { return hi_; }
  const std::vector<CalibrationDatum>& data() const { return data_; }
  const ParameterSet& base() const { return base_; }
  const IntegratorConfig& ode() const { return ode_; }
  std::optional<double> BSA() const { return BSA_; }
  BoxBounds box_bounds() const { return {lo_, hi_}; }

  /// Free-parameter values of the base set (the canonical initial guess).
  std::vector<double> initial_guess() const;

  ParameterSet assemble(const std::vector<double>& p_free) const;

  /// Simulate and return y_{j(i)} for every datum. Throws
  /// LossEvaluationError when the simulation fails.
  std::vector<double> model_outputs_for(const std::vector<double>& p_free) const;

  double mse(const std::vector<double>& p_free) const;
  double rmse(const std::vector<double>& p_free) const;
  double mse_of_outputs(const std::vector<double>& y) const;

  /// Loss against a different data vector (same tags), e.g. noise-free data.
  double mse_against(const std::vector<double>& p_free,
                     const std::vector<CalibrationDatum>& other) const;

 private:
  ParameterSet base_;
  std::vector<int> free_ids_;
  std::vector<double> lo_, hi_;
  std::vector<CalibrationDatum> data_;
  std::optional<double> BSA_;
  IntegratorConfig ode_;
};

struct TracePoint {
  int iter;
  double mse;
  char phase;  // 'c' = correlation-guided, 'q' = quasi-Newton

  friend bool operator==(const TracePoint&, const TracePoint&) = default;
};

struct CalibrationReport {
  std::string method;
  std::vector<std::string> param_names;
  std::vector<double> p_initial, p_final;
  double final_mse = 0.0, final_rmse = 0.0;
  bool success = false;  // final RMSE < 1e-1
  int iterations = 0;
  long n_sim = 0;
  std::vector<TracePoint> trace;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  bool saturated = false;       // a random step was blocked at a bound
  bool stalled = false;         // the search could make no further progress
  bool switch_reached = false;  // hybrid: CMC phase hit the switch loss
  std::string notes;

  friend bool operator==(const CalibrationReport&,
                         const CalibrationReport&) = default;
};

inline constexpr double kSuccessRmse = 1e-1;
inline constexpr double kHybridSwitchMse = 2.5e-2;

struct CmcOptions {
  // The loop tolerance sits well below the success threshold (RMSE 1e-1,
  // i.e. MSE 1e-2) so a successful run keeps refining its estimate.
  double tol_mse = 1e-3;
  int it_max = 500;
  bool stop_at_tol = true;     // false: keep refining until it_max
  double corr_cutoff = 0.05;   // significance threshold on |r|
  double small_error = 0.01;   // relative errors below this may grow freely
};

/// Surrogate directional derivative of the loss with respect to the chosen
/// parameter. e is the vector of relative errors, i_bar the index of the
/// datum being reduced, M_lbar[k] the correlation between the chosen
/// parameter and the output matched to datum k.
double surrogate_gradient(const std::vector<double>& e, int i_bar,
                          const std::vector<double>& M_lbar,
                          double active_threshold = 0.01);

/// One random calibration move: uniform draw on (value, hi] when
/// direction_sign > 0, on [lo, value) otherwise. A value already at the
/// relevant bound is returned unchanged with *saturated set.
double cmc_step(double value, double lo, double hi, double direction_sign,
                std::mt19937_64& rng, bool* saturated = nullptr);

/// Correlation-matrix calibration (the gradient-free method).
CalibrationReport cmc(const CalibrationProblem& problem,
                      const CorrelationMatrix& M, std::vector<double> p0,
                      const CmcOptions& opt, std::uint64_t seed);

CalibrationReport bounded_quasi_newton(const CalibrationProblem& problem,
                                       const std::vector<double>& p0,
                                       const QNOptions& opt = {});

struct HybridOptions {
  double switch_mse = kHybridSwitchMse;
  CmcOptions cmc;     // tol_mse is overridden by switch_mse
  QNOptions qn;
};

/// CMC until the loss drops below switch_mse (or the CMC budget runs out),
/// then quasi-Newton from the best CMC iterate.
CalibrationReport hybrid(const CalibrationProblem& problem,
                         const CorrelationMatrix& M, std::vector<double> p0,
                         const HybridOptions& opt, std::uint64_t seed);

/// Expected relative measurement error (standard deviation) for an output
/// used as calibration data. Throws for outputs without a noise model.
double noise_std(std::string_view output_name);

/// Multiplicative Gaussian noise: each datum scaled by (1 + eps),
/// eps ~ N(0, noise_std(name)).
std::vector<CalibrationDatum> add_noise(const std::vector<CalibrationDatum>& data,
                                        std::uint64_t seed);

struct SyntheticSample {
  std::vector<double> p_true;            // free-parameter values
  std::vector<CalibrationDatum> data;    // outputs of the true parameters

  friend bool operator==(const SyntheticSample&,
                         const SyntheticSample&) = default;
};

/// Uniform draw of the free parameters inside the problem bounds, one
/// simulation, and extraction of the problem's data outputs.
SyntheticSample generate_synthetic(const CalibrationProblem& problem,
                                   std::uint64_t seed);

}  // namespace cardio
