#include "cardio/calibration.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

#include "cardio/limit_cycle.hpp"

namespace cardio {

CalibrationProblem::CalibrationProblem(ParameterSet base,
                                       std::vector<int> free_ids,
                                       const Hyperbox& box,
                                       std::vector<CalibrationDatum> data,
                                       std::optional<double> BSA,
                                       IntegratorConfig ode)
    : base_(std::move(base)),
      free_ids_(std::move(free_ids)),
      data_(std::move(data)),
      BSA_(BSA),
      ode_(ode) {
  base_.validate();
  ode_.validate();
  if (free_ids_.empty()) throw std::invalid_argument("no free parameters");
  if (data_.empty()) throw std::invalid_argument("no calibration data");
  std::vector<bool> seen(kNumCalibratable, false);
  for (int id : free_ids_) {
    if (id < 0 || id >= kNumCalibratable)
      throw std::invalid_argument("unknown parameter id " + std::to_string(id));
    if (seen[id])
      throw std::invalid_argument("duplicate free parameter " +
                                  std::string(param_name(id)));
    seen[id] = true;
  }
  lo_.reserve(free_ids_.size());
  hi_.reserve(free_ids_.size());
  for (int id : free_ids_) {
    lo_.push_back(box.lo[id]);
    hi_.push_back(box.hi[id]);
  }
  const auto names = raw_output_names();
  for (const auto& d : data_) {
    if (std::find(names.begin(), names.end(), d.name) == names.end())
      throw std::invalid_argument("unknown output tag '" + d.name + "'");
    if (d.value == 0.0)
      throw std::invalid_argument("datum '" + d.name +
                                  "' is zero; relative error undefined");
  }
  for (int k = 0; k < n_free(); ++k) {
    const double v = get_calibratable(base_, free_ids_[k]);
    if (v < lo_[k] || v > hi_[k])
      throw std::invalid_argument("initial guess for " +
                                  std::string(param_name(free_ids_[k])) +
                                  " lies outside its bounds");
  }
}

std::vector<double> CalibrationProblem::initial_guess() const {
  std::vector<double> g(free_ids_.size());
  for (std::size_t k = 0; k < free_ids_.size(); ++k)
    g[k] = get_calibratable(base_, free_ids_[k]);
  return g;
}

ParameterSet CalibrationProblem::assemble(const std::vector<double>& p_free) const {
  if (p_free.size() != free_ids_.size())
    throw std::invalid_argument("free-parameter vector has wrong length");
  ParameterSet p = base_;
  for (std::size_t k = 0; k < free_ids_.size(); ++k)
    set_calibratable(p, free_ids_[k], p_free[k]);
  return p;
}

std::vector<double> CalibrationProblem::model_outputs_for(
    const std::vector<double>& p_free) const {
  ParameterSet p = assemble(p_free);
  try {
    p.validate();
    const LimitCycleResult lc = run_to_limit_cycle(p, ode_);
    const ModelOutputs out = compute_outputs(lc.beat, p, BSA_);
    std::vector<double> y(data_.size());
    for (std::size_t i = 0; i < data_.size(); ++i) {
      y[i] = output_by_name(out, data_[i].name);
      if (!std::isfinite(y[i]))
        throw LossEvaluationError("output '" + data_[i].name + "' is not finite");
    }
    return y;
  } catch (const LossEvaluationError&) {
    throw;
  } catch (const std::exception& ex) {
    throw LossEvaluationError(ex.what());
  }
}

double CalibrationProblem::mse_of_outputs(const std::vector<double>& y) const {
  double s = 0.0;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    const double e = (data_[i].value - y[i]) / data_[i].value;
    s += e * e;
  }
  return s / static_cast<double>(data_.size());
}

double CalibrationProblem::mse(const std::vector<double>& p_free) const {
  return mse_of_outputs(model_outputs_for(p_free));
}

double CalibrationProblem::rmse(const std::vector<double>& p_free) const {
  return std::sqrt(mse(p_free));
}

double CalibrationProblem::mse_against(
    const std::vector<double>& p_free,
    const std::vector<CalibrationDatum>& other) const {
  if (other.size() != data_.size())
    throw std::invalid_argument("data vectors have different lengths");
  const std::vector<double> y = model_outputs_for(p_free);
  double s = 0.0;
  for (std::size_t i = 0; i < other.size(); ++i) {
    if (other[i].name != data_[i].name)
      throw std::invalid_argument("data vectors have mismatched tags");
    const double e = (other[i].value - y[i]) / other[i].value;
    s += e * e;
  }
  return s / static_cast<double>(other.size());
}

double noise_std(std::string_view output_name) {
  static const std::map<std::string, double, std::less<>> table = {
      {"LA_Vmax", 0.05},       {"LV_EDV", 0.05},  {"LV_ESV", 0.05},
      {"SAP_min", 0.05},       {"PAP_max", 0.05}, {"LV_EF", 0.04},
      {"maxGradP_rAV", 0.04},  {"SAP_max", 0.04},
  };
  const auto it = table.find(output_name);
  if (it == table.end())
    throw std::invalid_argument("no noise model for output '" +
                                std::string(output_name) + "'");
  return it->second;
}

std::vector<CalibrationDatum> add_noise(const std::vector<CalibrationDatum>& data,
                                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<CalibrationDatum> noisy = data;
  for (auto& d : noisy) {
    std::normal_distribution<double> eps(0.0, noise_std(d.name));
    d.value *= 1.0 + eps(rng);
  }
  return noisy;
}

SyntheticSample generate_synthetic(const CalibrationProblem& problem,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  constexpr int kMaxTries = 100;
  for (int attempt = 0; attempt < kMaxTries; ++attempt) {
    SyntheticSample s;
    s.p_true.resize(problem.n_free());
    for (int k = 0; k < problem.n_free(); ++k) {
      std::uniform_real_distribution<double> u(problem.lo()[k], problem.hi()[k]);
      s.p_true[k] = u(rng);
    }
    try {
      const std::vector<double> y = problem.model_outputs_for(s.p_true);
      bool usable = true;
      for (double v : y)
        if (v == 0.0) usable = false;  // cannot serve as a relative-error datum
      if (!usable) continue;
      s.data.resize(problem.n_data());
      for (int i = 0; i < problem.n_data(); ++i)
        s.data[i] = {problem.data()[i].name, y[i]};
      return s;
    } catch (const LossEvaluationError&) {
      continue;  // pathological corner of the box; redraw
    }
  }
  throw std::runtime_error("could not generate a synthetic sample in " +
                           std::to_string(kMaxTries) + " attempts");
}

CalibrationReport bounded_quasi_newton(const CalibrationProblem& problem,
                                       const std::vector<double>& p0,
                                       const QNOptions& opt) {
  const auto t_start = std::chrono::steady_clock::now();
  CalibrationReport rep;
  rep.method = "lbfgsb";
  for (int id : problem.free_ids()) rep.param_names.emplace_back(param_name(id));
  rep.p_initial = p0;

  long n_sim = 0;
  const Objective f = [&](const std::vector<double>& x) -> double {
    ++n_sim;
    try {
      return problem.mse(x);
    } catch (const LossEvaluationError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  const QNResult res = minimize_box(f, p0, problem.box_bounds(), opt);

  rep.p_final = res.x;
  rep.final_mse = res.f;
  rep.final_rmse = std::sqrt(std::max(res.f, 0.0));
  rep.success = rep.final_rmse < kSuccessRmse;
  rep.iterations = res.iterations;
  rep.n_sim = n_sim;
  rep.stalled = res.stalled;
  rep.trace.reserve(res.f_trace.size());
  for (std::size_t i = 0; i < res.f_trace.size(); ++i)
    rep.trace.push_back({static_cast<int>(i), res.f_trace[i], 'q'});
  if (res.hit_max_iter) rep.notes = "iteration budget exhausted";
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return rep;
}

CalibrationReport hybrid(const CalibrationProblem& problem,
                         const CorrelationMatrix& M, std::vector<double> p0,
                         const HybridOptions& opt, std::uint64_t seed) {
  const auto t_start = std::chrono::steady_clock::now();

  CmcOptions copt = opt.cmc;
  copt.tol_mse = opt.switch_mse;
  copt.stop_at_tol = true;
  CalibrationReport phase1 = cmc(problem, M, std::move(p0), copt, seed);

  CalibrationReport rep = phase1;
  rep.method = "hybrid";
  rep.seed = seed;
  rep.switch_reached = phase1.final_mse < opt.switch_mse;

  CalibrationReport phase2 = bounded_quasi_newton(problem, phase1.p_final, opt.qn);
  if (phase2.final_mse <= phase1.final_mse) {
    rep.p_final = phase2.p_final;
    rep.final_mse = phase2.final_mse;
    rep.final_rmse = phase2.final_rmse;
  }
  rep.success = rep.final_rmse < kSuccessRmse;
  rep.iterations = phase1.iterations + phase2.iterations;
  rep.n_sim = phase1.n_sim + phase2.n_sim;
  rep.stalled = phase2.stalled;
  for (const TracePoint& tp : phase2.trace)
    rep.trace.push_back({phase1.iterations + tp.iter, tp.mse, 'q'});
  if (!phase1.notes.empty() || !phase2.notes.empty())
    rep.notes = phase1.notes.empty()
                    ? phase2.notes
                    : (phase2.notes.empty() ? phase1.notes
                                            : phase1.notes + "; " + phase2.notes);
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return rep;
}

}  // namespace cardio
