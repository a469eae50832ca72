// Command-line front end: simulation, sensitivity, correlation, synthetic
// data, calibration, and the three robustness test suites.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cardio/calibration.hpp"
#include "cardio/correlation.hpp"
#include "cardio/data_io.hpp"
#include "cardio/hyperbox.hpp"
#include "cardio/limit_cycle.hpp"
#include "cardio/outputs.hpp"
#include "cardio/parallel.hpp"
#include "cardio/sensitivity.hpp"
#include "cardio/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cardio;

namespace {

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t k) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ull * (k + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::function<void(std::size_t, std::size_t)> stderr_progress(
    const std::string& what) {
  auto last = std::make_shared<std::atomic<std::size_t>>(0);
  return [what, last](std::size_t done, std::size_t total) {
    const std::size_t prev = last->exchange(done);
    if (done == total || done / 100 != prev / 100)
      std::fprintf(stderr, "\r%s: %zu/%zu", what.c_str(), done, total);
    if (done == total) std::fprintf(stderr, "\n");
  };
}

std::vector<int> parse_param_list(const std::string& csv) {
  std::vector<int> ids;
  std::string tok;
  std::istringstream in(csv);
  while (std::getline(in, tok, ',')) {
    if (tok.empty()) continue;
    const int id = param_index(tok);
    if (id < 0)
      throw std::invalid_argument("unknown parameter '" + tok + "'");
    ids.push_back(id);
  }
  if (ids.empty()) throw std::invalid_argument("empty parameter list");
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

std::vector<int> ids_of_names(const std::vector<std::string>& names) {
  std::vector<int> ids;
  for (const auto& n : names) {
    const int id = param_index(n);
    if (id < 0) throw std::invalid_argument("unknown parameter '" + n + "'");
    ids.push_back(id);
  }
  return ids;
}

std::string range_str(const Range& r) {
  const auto side = [](double v, const char* spec) -> std::string {
    if (std::isinf(v)) return "-";
    char buf[32];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
  };
  return "[" + side(r.lo, "%g") + ", " + side(r.hi, "%g") + "]";
}

fs::path with_method_suffix(fs::path path, const std::string& method,
                            bool multiple) {
  if (!multiple) return path;
  fs::path stem = path.stem();
  stem += "_" + method;
  stem += path.extension();
  return path.parent_path() / stem;
}

// ---------------------------------------------------------------- simulate

struct SimulateOpts {
  std::string params_file;
  double hr = 80.0;
  int beats = 25;
  double rtol = 1e-7, atol = 1e-7;
  int grid = 1000;
  double bsa = kReferenceBSA;  // <= 0 disables indexed outputs
  std::string out_traj, out_outputs;
  bool as_json = false;
};

int cmd_simulate(const SimulateOpts& o) {
  const ParameterSet p = o.params_file.empty()
                             ? reference_parameters(o.hr)
                             : load_parameters(o.params_file);
  IntegratorConfig cfg;
  cfg.beats = o.beats;
  cfg.rtol = o.rtol;
  cfg.atol = o.atol;
  cfg.grid_points = o.grid;

  const auto t0 = std::chrono::steady_clock::now();
  const LimitCycleResult lc = run_to_limit_cycle(p, cfg);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  const std::optional<double> bsa =
      o.bsa > 0.0 ? std::optional<double>(o.bsa) : std::nullopt;
  const ModelOutputs outs = compute_outputs(lc.beat, p, bsa);

  if (lc.periodicity_residual > 1e-3)
    std::fprintf(stderr,
                 "warning: periodicity residual %.3g after %d beats; the "
                 "transient has not settled (increase --beats)\n",
                 lc.periodicity_residual, o.beats);

  const auto& ranges = healthy_ranges();
  json jout;
  jout["schema"] = "outputs";
  jout["version"] = 1;
  jout["HR"] = p.HR;
  jout["beats"] = o.beats;
  jout["periodicity_residual"] = lc.periodicity_residual;
  jout["wall_seconds"] = wall;
  jout["n_accepted_steps"] = lc.n_accepted;
  jout["n_rhs_evals"] = lc.n_rhs_evals;
  for (const auto& name : raw_output_names())
    jout["outputs"][name] = output_by_name(outs, name);

  if (!o.as_json)
    std::printf("%-14s %12s  %-14s %s\n", "output", "value", "range", "status");
  int out_of_range = 0;
  for (const auto& [name, value] : display_outputs(outs)) {
    const auto it = ranges.find(name);
    std::string range = "-", status = "-";
    bool ok = true;
    if (it != ranges.end()) {
      range = range_str(it->second);
      ok = it->second.contains(value);
      status = ok ? "in range" : "OUT OF RANGE";
      if (!ok) ++out_of_range;
    }
    jout["display"][name] = value;
    if (it != ranges.end()) jout["in_range"][name] = ok;
    if (!o.as_json)
      std::printf("%-14s %12.4g  %-14s %s\n", name.c_str(), value,
                  range.c_str(), status.c_str());
  }
  jout["n_out_of_range"] = out_of_range;
  if (!o.as_json)
    std::printf("periodicity residual %.3g   (%zu steps, %.2f s)\n",
                lc.periodicity_residual, lc.n_accepted, wall);

  if (!o.out_traj.empty()) save_trajectory_csv(lc.beat, o.out_traj);
  if (!o.out_outputs.empty()) write_text_atomic(o.out_outputs, jout.dump(2) + "\n");
  if (o.as_json) std::printf("%s\n", jout.dump(2).c_str());
  return 0;
}

// ------------------------------------------------------------------- sobol

struct SobolOpts {
  int n = 1024;
  bool covid = false;
  std::uint64_t seed = 2024;
  double hr = 80.0;
  int jobs = 0;
  double threshold = 0.1;
  std::string out = "sobol.json";
  std::string heatmap;
  bool as_json = false;
};

int cmd_sobol(const SobolOpts& o) {
  const ParameterSet ref = reference_parameters(o.hr);
  const Hyperbox box = build_hyperbox(ref, o.covid);
  const SensitivityResult s = total_sobol(box, ref, o.n, o.seed, o.jobs,
                                          stderr_progress("model runs"));
  save_sensitivity(s, o.out);
  if (!o.heatmap.empty())
    save_svg(sensitivity_heatmap_svg(s, calibration_output_names()), o.heatmap);

  const std::vector<int> sel =
      select_parameters(s, o.threshold, calibration_output_names());
  json j;
  j["file"] = o.out;
  j["n_base"] = s.n_base;
  j["n_evals"] = s.n_evals;
  j["n_failures"] = s.n_failures;
  j["threshold"] = o.threshold;
  for (int id : sel) j["selected"].push_back(std::string(param_name(id)));
  if (o.as_json) {
    std::printf("%s\n", j.dump(2).c_str());
  } else {
    std::printf("selected parameters (total index >= %g on a calibration "
                "output):\n",
                o.threshold);
    for (int id : sel)
      std::printf("  %s\n", std::string(param_name(id)).c_str());
    std::printf("%ld runs, %ld failures; written to %s\n", s.n_evals,
                s.n_failures, o.out.c_str());
  }
  return 0;
}

// -------------------------------------------------------------------- corr

struct CorrOpts {
  int n = 3200;
  bool covid = false;
  std::uint64_t seed = 77;
  double hr = 80.0;
  int jobs = 0;
  std::string out = "correlation.json";
  bool as_json = false;
};

int cmd_corr(const CorrOpts& o) {
  const ParameterSet ref = reference_parameters(o.hr);
  const Hyperbox box = build_hyperbox(ref, o.covid);
  const CorrelationMatrix m = build_correlation_matrix(
      ref, box, o.n, o.seed, o.jobs, stderr_progress("model runs"));
  save_correlation(m, o.out);
  json j;
  j["file"] = o.out;
  j["n_samples"] = m.n_samples;
  j["HR"] = m.HR;
  j["covid"] = m.covid;
  j["box_fingerprint"] = m.box_fingerprint;
  if (o.as_json)
    std::printf("%s\n", j.dump(2).c_str());
  else
    std::printf("correlation matrix (%d samples, HR %g%s) written to %s\n",
                m.n_samples, m.HR, m.covid ? ", covid box" : "",
                o.out.c_str());
  return 0;
}

// ---------------------------------------------------------------- gen-data

struct GenDataOpts {
  int n = 20;
  std::uint64_t seed = 1;
  double hr = 80.0;
  bool covid = false;
  std::string params;  // comma-separated override
  std::string out = "dataset.json";
  int jobs = 0;
  bool as_json = false;
};

CalibrationProblem placeholder_problem(const ParameterSet& ref,
                                       const std::vector<int>& ids,
                                       const Hyperbox& box) {
  std::vector<CalibrationDatum> tags;
  for (const auto& name : calibration_output_names()) tags.push_back({name, 1.0});
  return CalibrationProblem(ref, ids, box, std::move(tags));
}

int cmd_gen_data(const GenDataOpts& o) {
  const ParameterSet ref = reference_parameters(o.hr);
  const Hyperbox box = build_hyperbox(ref, o.covid);
  const std::vector<int> ids = o.params.empty()
                                   ? ids_of_names(selected_parameter_names())
                                   : parse_param_list(o.params);
  const CalibrationProblem prob = placeholder_problem(ref, ids, box);

  Dataset ds;
  for (int id : ids) ds.param_names.emplace_back(param_name(id));
  ds.output_names = calibration_output_names();
  ds.seed = o.seed;
  ds.box_fingerprint = box.fingerprint();
  ds.HR = o.hr;
  ds.covid = o.covid;
  ds.samples.resize(o.n);
  parallel_for(o.n, o.jobs, [&](int i) {
    ds.samples[i] = generate_synthetic(prob, mix_seed(o.seed, i));
  });
  save_dataset(ds, o.out);
  json j;
  j["file"] = o.out;
  j["n"] = o.n;
  j["param_names"] = ds.param_names;
  if (o.as_json)
    std::printf("%s\n", j.dump(2).c_str());
  else
    std::printf("%d synthetic samples over %zu parameters written to %s\n",
                o.n, ds.param_names.size(), o.out.c_str());
  return 0;
}

// ------------------------------------------------------------------- noise

struct NoiseOpts {
  std::string in;
  std::string out = "dataset_noisy.json";
  std::uint64_t seed = 2;
  bool as_json = false;
};

int cmd_noise(const NoiseOpts& o) {
  Dataset ds = load_dataset(o.in);
  for (std::size_t i = 0; i < ds.samples.size(); ++i)
    ds.samples[i].data = add_noise(ds.samples[i].data, mix_seed(o.seed, i));
  ds.noisy = true;
  ds.seed = o.seed;
  save_dataset(ds, o.out);
  json j;
  j["file"] = o.out;
  j["n"] = ds.samples.size();
  if (o.as_json)
    std::printf("%s\n", j.dump(2).c_str());
  else
    std::printf("noisy copy of %zu samples written to %s\n",
                ds.samples.size(), o.out.c_str());
  return 0;
}

// --------------------------------------------------------------- calibrate

struct CalibrateOpts {
  std::string methods = "cmc";
  std::string data_file;
  int sample = 0;
  std::string patient;
  std::string matrix;
  std::uint64_t seed = 1;
  double hr = 80.0;
  bool covid = false, no_covid = false;
  std::string params;
  std::string report = "report.json";
  std::string pvloop, trace;
  int it_max = 500;
  int qn_iters = 100;
  bool as_json = false;
};

std::vector<std::string> split_methods(const std::string& csv) {
  std::vector<std::string> out;
  std::string tok;
  std::istringstream in(csv);
  while (std::getline(in, tok, ',')) {
    if (tok == "all") return {"cmc", "qn", "hybrid"};
    if (tok != "cmc" && tok != "qn" && tok != "hybrid")
      throw std::invalid_argument("unknown method '" + tok +
                                  "' (use cmc, qn, hybrid)");
    out.push_back(tok);
  }
  if (out.empty()) throw std::invalid_argument("no method given");
  return out;
}

CalibrationReport run_method(const std::string& method,
                             const CalibrationProblem& problem,
                             const CorrelationMatrix* M,
                             const std::vector<double>& p0,
                             std::uint64_t seed, int it_max, int qn_iters) {
  if (method == "qn") {
    QNOptions qo;
    qo.max_iter = qn_iters;
    CalibrationReport rep = bounded_quasi_newton(problem, p0, qo);
    rep.seed = seed;
    return rep;
  }
  if (!M)
    throw std::invalid_argument("method '" + method +
                                "' requires --matrix (a correlation matrix)");
  if (method == "cmc") {
    CmcOptions co;
    co.it_max = it_max;
    return cmc(problem, *M, p0, co, seed);
  }
  HybridOptions ho;
  ho.cmc.it_max = it_max;
  ho.qn.max_iter = qn_iters;
  return hybrid(problem, *M, p0, ho, seed);
}

int cmd_calibrate(const CalibrateOpts& o) {
  const std::vector<std::string> methods = split_methods(o.methods);

  double HR = o.hr;
  bool covid = o.covid;
  std::optional<double> BSA;
  std::vector<CalibrationDatum> data;
  std::vector<int> ids;
  std::vector<double> p_true;  // dataset mode only

  if (!o.patient.empty()) {
    const ClinicalRecord rec = load_clinical(o.patient);
    HR = rec.HR;
    BSA = rec.BSA;
    data = rec.data;
    covid = !o.no_covid;  // both bundled records are covid cases
    ids = o.params.empty() ? default_free_parameters(rec)
                           : parse_param_list(o.params);
  } else if (!o.data_file.empty()) {
    const Dataset ds = load_dataset(o.data_file);
    if (o.sample < 0 || o.sample >= static_cast<int>(ds.samples.size()))
      throw std::invalid_argument(
          "--sample " + std::to_string(o.sample) + " out of range (dataset holds " +
          std::to_string(ds.samples.size()) + ")");
    HR = ds.HR;
    covid = ds.covid;
    data = ds.samples[o.sample].data;
    p_true = ds.samples[o.sample].p_true;
    ids = o.params.empty() ? ids_of_names(ds.param_names)
                           : parse_param_list(o.params);
  } else {
    throw std::invalid_argument("give either --patient or --data");
  }

  const ParameterSet ref = reference_parameters(HR);
  const Hyperbox box = build_hyperbox(ref, covid);
  const CalibrationProblem problem(ref, ids, box, data, BSA);

  std::optional<CorrelationMatrix> M;
  const bool needs_matrix =
      std::any_of(methods.begin(), methods.end(),
                  [](const std::string& m) { return m != "qn"; });
  if (needs_matrix) {
    if (o.matrix.empty())
      throw std::invalid_argument(
          "methods cmc/hybrid require --matrix (build one with 'corr')");
    M = load_correlation(o.matrix);
    if (std::abs(M->HR - HR) > 1e-9)
      std::fprintf(stderr,
                   "warning: correlation matrix was built at HR %g, "
                   "calibrating at HR %g\n",
                   M->HR, HR);
    if (M->box_fingerprint != box.fingerprint())
      std::fprintf(stderr,
                   "warning: correlation matrix box (%s) differs from the "
                   "calibration box (%s)\n",
                   M->box_fingerprint.c_str(), box.fingerprint().c_str());
  }

  const std::vector<double> p0 = problem.initial_guess();
  std::vector<std::pair<std::string, CalibrationReport>> reports;
  for (const auto& method : methods) {
    CalibrationReport rep = run_method(method, problem, M ? &*M : nullptr, p0,
                                       o.seed, o.it_max, o.qn_iters);
    const fs::path path = with_method_suffix(o.report, method, methods.size() > 1);
    save_report(rep, path);
    reports.emplace_back(method, std::move(rep));
  }

  if (!o.pvloop.empty() || !o.trace.empty()) {
    std::vector<std::pair<std::string, BeatTrajectory>> beats;
    beats.emplace_back("initial",
                       run_to_limit_cycle(problem.assemble(p0)).beat);
    for (const auto& [method, rep] : reports)
      beats.emplace_back(method,
                         run_to_limit_cycle(problem.assemble(rep.p_final)).beat);
    if (!o.pvloop.empty()) {
      std::vector<std::pair<std::string, const BeatTrajectory*>> refs;
      for (const auto& [label, beat] : beats) refs.emplace_back(label, &beat);
      save_svg(pv_loop_svg(refs, "LV"), o.pvloop + "_lv.svg");
      save_svg(pv_loop_svg(refs, "RV"), o.pvloop + "_rv.svg");
    }
    if (!o.trace.empty()) {
      std::vector<std::pair<std::string, const CalibrationReport*>> refs;
      for (const auto& [method, rep] : reports) refs.emplace_back(method, &rep);
      save_svg(loss_trace_svg(refs), o.trace);
    }
  }

  json j = json::array();
  for (const auto& [method, rep] : reports) {
    json e;
    e["method"] = method;
    e["final_rmse"] = rep.final_rmse;
    e["final_mse"] = rep.final_mse;
    e["success"] = rep.success;
    e["iterations"] = rep.iterations;
    e["n_sim"] = rep.n_sim;
    e["wall_seconds"] = rep.wall_seconds;
    if (!p_true.empty()) {
      double s = 0.0;
      for (std::size_t k = 0; k < p_true.size(); ++k) {
        const double r = (rep.p_final[k] - p_true[k]) / p_true[k];
        s += r * r;
      }
      e["param_rmse"] = std::sqrt(s / static_cast<double>(p_true.size()));
    }
    j.push_back(std::move(e));
    if (!o.as_json)
      std::printf("%-7s rmse %.4g  %s  (%d iterations, %ld simulations, "
                  "%.1f s)\n",
                  method.c_str(), rep.final_rmse,
                  rep.success ? "success" : "FAILURE", rep.iterations,
                  rep.n_sim, rep.wall_seconds);
  }
  if (o.as_json) std::printf("%s\n", j.dump(2).c_str());
  return 0;
}

// ------------------------------------------------------------------- suite

struct SuiteOpts {
  int test = 1;
  int n = 20;
  std::uint64_t seed = 1;
  std::string out = "suite";
  int jobs = 0;
  std::string matrix, dataset;
  double hr = 80.0;
  int corr_n = 3200;
  int cmc_it_max = 300;
  int qn_iters = 60;
  bool as_json = false;
};

struct RunOutcome {
  CalibrationReport rep;
  double rmse_actual = std::numeric_limits<double>::quiet_NaN();
  double param_rmse = std::numeric_limits<double>::quiet_NaN();
};

double relative_param_rmse(const std::vector<double>& est,
                           const std::vector<double>& truth) {
  double s = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const double r = (est[k] - truth[k]) / truth[k];
    s += r * r;
  }
  return std::sqrt(s / static_cast<double>(truth.size()));
}

int cmd_suite(const SuiteOpts& o) {
  if (o.test < 1 || o.test > 3)
    throw std::invalid_argument("--test must be 1, 2 or 3");
  fs::create_directories(o.out);
  const fs::path dir = o.out;

  const ParameterSet ref = reference_parameters(o.hr);
  const Hyperbox box = build_hyperbox(ref, false);

  // Shared inputs: synthetic dataset and correlation matrix, reused from
  // --dataset/--matrix when given (and saved into the suite directory when
  // they had to be computed here).
  Dataset ds;
  if (!o.dataset.empty()) {
    ds = load_dataset(o.dataset);
    if (ds.noisy) throw std::invalid_argument("suite needs a noise-free dataset");
  } else {
    const std::vector<int> ids = ids_of_names(selected_parameter_names());
    const CalibrationProblem prob = placeholder_problem(ref, ids, box);
    for (int id : ids) ds.param_names.emplace_back(param_name(id));
    ds.output_names = calibration_output_names();
    ds.seed = o.seed;
    ds.box_fingerprint = box.fingerprint();
    ds.HR = o.hr;
    const int n_needed = std::max(o.n, 7);
    ds.samples.resize(n_needed);
    std::fprintf(stderr, "generating %d synthetic samples...\n", n_needed);
    parallel_for(n_needed, o.jobs, [&](int i) {
      ds.samples[i] = generate_synthetic(prob, mix_seed(o.seed, i));
    });
    save_dataset(ds, dir / "dataset.json");
  }
  const std::vector<int> ids = ids_of_names(ds.param_names);

  CorrelationMatrix M;
  if (!o.matrix.empty()) {
    M = load_correlation(o.matrix);
  } else {
    std::fprintf(stderr, "building the correlation matrix (%d samples)...\n",
                 o.corr_n);
    M = build_correlation_matrix(ref, box, o.corr_n, mix_seed(o.seed, 9000),
                                 o.jobs, stderr_progress("model runs"));
    save_correlation(M, dir / "correlation.json");
  }

  const std::vector<std::string> methods = {"cmc", "qn", "hybrid"};
  const auto make_problem = [&](const std::vector<CalibrationDatum>& data) {
    return CalibrationProblem(ref, ids, box, data);
  };

  // One (sample x method) cell of a test, run in parallel across samples.
  struct Cell {
    std::vector<CalibrationDatum> data;  // calibration target
    std::vector<double> p0;              // initial guess
    std::uint64_t seed;
  };
  const auto run_cells =
      [&](const std::vector<Cell>& cells,
          const std::vector<double>* truth,            // per-cell p_true
          const std::vector<CalibrationDatum>* actual  // noise-free data
          ) -> std::map<std::string, std::vector<RunOutcome>> {
    std::map<std::string, std::vector<RunOutcome>> out;
    for (const auto& m : methods) out[m].resize(cells.size());
    std::atomic<int> done{0};
    parallel_for(static_cast<int>(cells.size()), o.jobs, [&](int i) {
      const CalibrationProblem problem = make_problem(cells[i].data);
      for (const auto& method : methods) {
        RunOutcome& oc = out[method][i];
        oc.rep = run_method(method, problem, &M, cells[i].p0, cells[i].seed,
                            o.cmc_it_max, o.qn_iters);
        if (truth) oc.param_rmse = relative_param_rmse(oc.rep.p_final, *truth);
        if (actual) {
          try {
            oc.rmse_actual =
                std::sqrt(problem.mse_against(oc.rep.p_final, *actual));
          } catch (const LossEvaluationError&) {
            oc.rmse_actual = std::numeric_limits<double>::infinity();
          }
        }
      }
      std::fprintf(stderr, "\rsample %d/%zu done", ++done, cells.size());
    });
    std::fprintf(stderr, "\n");
    return out;
  };

  json summary;
  summary["schema"] = "suite-summary";
  summary["version"] = 1;
  summary["test"] = o.test;
  summary["seed"] = o.seed;
  summary["methods"] = methods;
  summary["param_names"] = ds.param_names;

  std::string summary_csv = "test,sample,method,rmse,success,param_rmse,"
                            "rmse_actual,iterations,n_sim,wall_seconds\n";
  const auto csv_row = [&summary_csv, &o](int sample, const std::string& method,
                                          const RunOutcome& oc) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%d,%d,%s,%.6g,%d,%.6g,%.6g,%d,%ld,%.2f\n",
                  o.test, sample, method.c_str(), oc.rep.final_rmse,
                  oc.rep.success ? 1 : 0, oc.param_rmse, oc.rmse_actual,
                  oc.rep.iterations, oc.rep.n_sim, oc.rep.wall_seconds);
    summary_csv += buf;
  };

  if (o.test == 1) {
    const int n = std::min<int>(o.n, static_cast<int>(ds.samples.size()));
    std::vector<Cell> cells(n);
    for (int i = 0; i < n; ++i)
      cells[i] = {ds.samples[i].data,
                  CalibrationProblem(ref, ids, box, ds.samples[i].data)
                      .initial_guess(),
                  mix_seed(o.seed, 10 + i)};
    // Parameter truth differs per cell; run per-sample and patch in truth.
    std::map<std::string, std::vector<RunOutcome>> res;
    for (const auto& m : methods) res[m].resize(cells.size());
    std::atomic<int> done{0};
    parallel_for(n, o.jobs, [&](int i) {
      const CalibrationProblem problem = make_problem(cells[i].data);
      for (const auto& method : methods) {
        RunOutcome& oc = res[method][i];
        oc.rep = run_method(method, problem, &M, cells[i].p0, cells[i].seed,
                            o.cmc_it_max, o.qn_iters);
        oc.param_rmse =
            relative_param_rmse(oc.rep.p_final, ds.samples[i].p_true);
      }
      std::fprintf(stderr, "\rsample %d/%d done", ++done, n);
    });
    std::fprintf(stderr, "\n");

    std::vector<std::string> cats(n);
    std::vector<std::pair<std::string, std::vector<double>>> bars;
    for (const auto& method : methods) {
      int successes = 0;
      double wall = 0.0;
      std::vector<double> rmse_bars(n);
      for (int i = 0; i < n; ++i) {
        const RunOutcome& oc = res[method][i];
        cats[i] = std::to_string(i);
        successes += oc.rep.success;
        wall += oc.rep.wall_seconds;
        rmse_bars[i] = std::isfinite(oc.param_rmse) ? oc.param_rmse : 0.0;
        save_report(oc.rep, dir / ("test1_sample" + std::to_string(i) + "_" +
                                   method + ".json"));
        csv_row(i, method, oc);
      }
      // Mean parameter error over the samples every method solved.
      double joint_sum = 0.0;
      int joint_n = 0;
      for (int i = 0; i < n; ++i) {
        const bool joint = std::all_of(
            methods.begin(), methods.end(),
            [&](const std::string& m) { return res.at(m)[i].rep.success; });
        if (joint) {
          joint_sum += res.at(method)[i].param_rmse;
          ++joint_n;
        }
      }
      summary["results"][method] = {
          {"successes", successes},
          {"n", n},
          {"mean_param_rmse_joint",
           joint_n ? joint_sum / joint_n : std::numeric_limits<double>::quiet_NaN()},
          {"joint_successes", joint_n},
          {"total_wall_seconds", wall},
          {"mean_wall_seconds", wall / n}};
      bars.emplace_back(method, std::move(rmse_bars));
      std::printf("%-7s %d/%d successful, mean wall %.1f s\n", method.c_str(),
                  successes, n, wall / n);
    }
    save_svg(bar_chart_svg(cats, bars, "Parameter RMSE per sample",
                           "relative parameter RMSE"),
             dir / "test1_param_rmse.svg");
    std::vector<double> counts;
    for (const auto& m : methods)
      counts.push_back(summary["results"][m]["successes"].get<double>());
    save_svg(bar_chart_svg(methods, {{"successes", counts}},
                           "Successful calibrations", "count"),
             dir / "test1_success.svg");
  }

  if (o.test == 2 || o.test == 3) {
    if (ds.samples.size() < 7)
      throw std::invalid_argument("the dataset needs at least 7 samples");
    const SyntheticSample& anchor = ds.samples[6];  // "sample 7"
    summary["anchor_sample"] = 6;
    summary["p_true"] = anchor.p_true;

    std::vector<Cell> cells;
    const std::vector<CalibrationDatum>* actual = nullptr;
    if (o.test == 2) {
      // Random initial guesses inside the box, same (noise-free) target.
      const int n_guesses = o.n == 20 ? 19 : o.n;
      const CalibrationProblem probe = make_problem(anchor.data);
      for (int g = 0; g < n_guesses; ++g) {
        std::mt19937_64 rng(mix_seed(o.seed, 100 + g));
        std::vector<double> p0(ids.size());
        for (std::size_t k = 0; k < ids.size(); ++k) {
          std::uniform_real_distribution<double> u(probe.lo()[k], probe.hi()[k]);
          p0[k] = u(rng);
        }
        cells.push_back({anchor.data, std::move(p0), mix_seed(o.seed, 300 + g)});
      }
    } else {
      // Noisy replicates of the anchor data, reference initial guess.
      const CalibrationProblem probe = make_problem(anchor.data);
      for (int r = 0; r < o.n; ++r)
        cells.push_back({add_noise(anchor.data, mix_seed(o.seed, 200 + r)),
                         probe.initial_guess(), mix_seed(o.seed, 400 + r)});
      actual = &anchor.data;
    }

    const auto res = run_cells(cells, &anchor.p_true, actual);
    const int n = static_cast<int>(cells.size());
    const char* tag = o.test == 2 ? "test2" : "test3";

    std::vector<std::pair<std::string, std::vector<double>>> relstd_bars;
    for (const auto& method : methods) {
      int successes = 0, successes_actual = 0;
      double wall = 0.0;
      std::vector<std::vector<double>> estimates;  // successful runs only
      for (int i = 0; i < n; ++i) {
        const RunOutcome& oc = res.at(method)[i];
        successes += oc.rep.success;
        if (o.test == 3 && oc.rmse_actual < kSuccessRmse) ++successes_actual;
        wall += oc.rep.wall_seconds;
        if (oc.rep.success) estimates.push_back(oc.rep.p_final);
        save_report(oc.rep, dir / (std::string(tag) + "_run" +
                                   std::to_string(i) + "_" + method + ".json"));
        csv_row(i, method, oc);
      }
      // Relative standard deviation of each estimated parameter w.r.t. the
      // real value, over the successful runs.
      std::vector<double> rel_std(ids.size(),
                                  std::numeric_limits<double>::quiet_NaN());
      if (estimates.size() >= 2) {
        for (std::size_t k = 0; k < ids.size(); ++k) {
          double mean = 0.0;
          for (const auto& e : estimates) mean += e[k];
          mean /= static_cast<double>(estimates.size());
          double var = 0.0;
          for (const auto& e : estimates) {
            const double d = e[k] - mean;
            var += d * d;
          }
          var /= static_cast<double>(estimates.size() - 1);
          rel_std[k] = std::sqrt(var) / std::abs(anchor.p_true[k]);
        }
      }
      summary["results"][method] = {
          {"successes", successes},
          {"n", n},
          {"rel_std", rel_std},
          {"total_wall_seconds", wall},
          {"mean_wall_seconds", wall / n}};
      if (o.test == 3)
        summary["results"][method]["successes_actual"] = successes_actual;
      std::vector<double> bars(rel_std.size());
      for (std::size_t k = 0; k < rel_std.size(); ++k)
        bars[k] = std::isfinite(rel_std[k]) ? rel_std[k] : 0.0;
      relstd_bars.emplace_back(method, std::move(bars));
      std::printf("%-7s %d/%d successful%s, mean wall %.1f s\n",
                  method.c_str(), successes, n,
                  o.test == 3
                      ? (" (" + std::to_string(successes_actual) +
                         " vs actual data)").c_str()
                      : "",
                  wall / n);
    }
    save_svg(bar_chart_svg(ds.param_names, relstd_bars,
                           "Relative standard deviation of the estimates",
                           "std / true value"),
             dir / (std::string(o.test == 2 ? "test2" : "test3") +
                    "_rel_std.svg"));

    if (o.test == 3) {
      std::vector<std::string> cats(n);
      for (int i = 0; i < n; ++i) cats[i] = std::to_string(i);
      std::vector<std::pair<std::string, std::vector<double>>> bars;
      for (const auto& method : methods) {
        std::vector<double> v(n);
        for (int i = 0; i < n; ++i) {
          const double r = res.at(method)[i].rmse_actual;
          v[i] = std::isfinite(r) ? r : 0.0;
        }
        bars.emplace_back(method, std::move(v));
      }
      save_svg(bar_chart_svg(cats, bars, "RMSE against the actual data",
                             "RMSE"),
               dir / "test3_rmse_actual.svg");
    }
  }

  write_text_atomic(dir / "summary.json", summary.dump(2) + "\n");
  write_text_atomic(dir / "summary.csv", summary_csv);
  if (o.as_json) std::printf("%s\n", summary.dump(2).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lumped-parameter circulation model: simulation, sensitivity "
               "analysis, and calibration"};
  app.require_subcommand(1);

  SimulateOpts sim;
  auto* c_sim = app.add_subcommand("simulate",
                                   "Run to the limit cycle and report outputs");
  c_sim->add_option("--params", sim.params_file,
                    "parameters file (default: reference values)")
      ->check(CLI::ExistingFile);
  c_sim->add_option("--hr", sim.hr, "heart rate when no file is given");
  c_sim->add_option("--beats", sim.beats, "heartbeats to simulate");
  c_sim->add_option("--rtol", sim.rtol, "relative tolerance");
  c_sim->add_option("--atol", sim.atol, "absolute tolerance");
  c_sim->add_option("--grid", sim.grid, "grid points over the last beat");
  c_sim->add_option("--bsa", sim.bsa, "body surface area; 0 disables indexing");
  c_sim->add_option("--out", sim.out_traj, "trajectory CSV path");
  c_sim->add_option("--outputs", sim.out_outputs, "outputs JSON path");
  c_sim->add_flag("--json", sim.as_json, "print the summary as JSON");

  SobolOpts sob;
  auto* c_sob = app.add_subcommand("sobol", "Total-effect sensitivity sweep");
  c_sob->add_option("--n", sob.n, "base sample count");
  c_sob->add_flag("--covid", sob.covid, "use the covid-widened box");
  c_sob->add_option("--seed", sob.seed, "sequence scramble seed");
  c_sob->add_option("--hr", sob.hr, "heart rate");
  c_sob->add_option("--jobs", sob.jobs, "worker threads (0 = cores)");
  c_sob->add_option("--threshold", sob.threshold, "selection threshold");
  c_sob->add_option("--out", sob.out, "result JSON path");
  c_sob->add_option("--heatmap", sob.heatmap, "heatmap SVG path");
  c_sob->add_flag("--json", sob.as_json, "print the summary as JSON");

  CorrOpts cor;
  auto* c_cor = app.add_subcommand("corr", "Parameter-output correlation matrix");
  c_cor->add_option("--n", cor.n, "number of random model runs");
  c_cor->add_flag("--covid", cor.covid, "use the covid-widened box");
  c_cor->add_option("--seed", cor.seed, "sampling seed");
  c_cor->add_option("--hr", cor.hr, "heart rate");
  c_cor->add_option("--jobs", cor.jobs, "worker threads (0 = cores)");
  c_cor->add_option("--out", cor.out, "matrix JSON path");
  c_cor->add_flag("--json", cor.as_json, "print the summary as JSON");

  GenDataOpts gen;
  auto* c_gen = app.add_subcommand("gen-data", "Generate synthetic datasets");
  c_gen->add_option("--n", gen.n, "number of samples");
  c_gen->add_option("--seed", gen.seed, "sampling seed");
  c_gen->add_option("--hr", gen.hr, "heart rate");
  c_gen->add_flag("--covid", gen.covid, "use the covid-widened box");
  c_gen->add_option("--params", gen.params,
                    "comma-separated free parameters (default: screened set)");
  c_gen->add_option("--out", gen.out, "dataset JSON path");
  c_gen->add_option("--jobs", gen.jobs, "worker threads (0 = cores)");
  c_gen->add_flag("--json", gen.as_json, "print the summary as JSON");

  NoiseOpts noi;
  auto* c_noi = app.add_subcommand("noise", "Add measurement noise to a dataset");
  c_noi->add_option("--in", noi.in, "input dataset")->required()
      ->check(CLI::ExistingFile);
  c_noi->add_option("--out", noi.out, "output dataset path");
  c_noi->add_option("--seed", noi.seed, "noise seed");
  c_noi->add_flag("--json", noi.as_json, "print the summary as JSON");

  CalibrateOpts cal;
  auto* c_cal = app.add_subcommand("calibrate", "Calibrate to data");
  c_cal->add_option("--method", cal.methods,
                    "cmc, qn, hybrid, a comma list, or 'all'");
  c_cal->add_option("--data", cal.data_file, "synthetic dataset JSON")
      ->check(CLI::ExistingFile);
  c_cal->add_option("--sample", cal.sample, "sample index inside --data");
  c_cal->add_option("--patient", cal.patient, "clinical record name");
  c_cal->add_option("--matrix", cal.matrix, "correlation matrix JSON")
      ->check(CLI::ExistingFile);
  c_cal->add_option("--seed", cal.seed, "random-step seed");
  c_cal->add_option("--hr", cal.hr, "heart rate fallback");
  c_cal->add_flag("--no-covid", cal.no_covid,
                  "use the base box even for patient records");
  c_cal->add_option("--params", cal.params, "override the free parameters");
  c_cal->add_option("--report", cal.report, "report JSON path");
  c_cal->add_option("--pvloop", cal.pvloop, "PV-loop SVG path prefix");
  c_cal->add_option("--trace", cal.trace, "loss-trace SVG path");
  c_cal->add_option("--it-max", cal.it_max, "random-step budget");
  c_cal->add_option("--qn-iters", cal.qn_iters, "quasi-Newton iteration cap");
  c_cal->add_flag("--json", cal.as_json, "print the summary as JSON");

  SuiteOpts sui;
  auto* c_sui = app.add_subcommand("suite", "Robustness test suites");
  c_sui->add_option("--test", sui.test, "1: datasets, 2: guesses, 3: noise")
      ->required();
  c_sui->add_option("--n", sui.n, "runs per method");
  c_sui->add_option("--seed", sui.seed, "suite seed");
  c_sui->add_option("--out", sui.out, "output directory");
  c_sui->add_option("--jobs", sui.jobs, "worker threads (0 = cores)");
  c_sui->add_option("--matrix", sui.matrix, "reuse a correlation matrix")
      ->check(CLI::ExistingFile);
  c_sui->add_option("--dataset", sui.dataset, "reuse a dataset")
      ->check(CLI::ExistingFile);
  c_sui->add_option("--hr", sui.hr, "heart rate");
  c_sui->add_option("--corr-n", sui.corr_n, "correlation matrix sample count");
  c_sui->add_option("--cmc-it-max", sui.cmc_it_max, "random-step budget");
  c_sui->add_option("--qn-iters", sui.qn_iters, "quasi-Newton iteration cap");
  c_sui->add_flag("--json", sui.as_json, "print the summary as JSON");

  try {
    app.parse(argc, argv);
    if (*c_sim) return cmd_simulate(sim);
    if (*c_sob) return cmd_sobol(sob);
    if (*c_cor) return cmd_corr(cor);
    if (*c_gen) return cmd_gen_data(gen);
    if (*c_noi) return cmd_noise(noi);
    if (*c_cal) return cmd_calibrate(cal);
    if (*c_sui) return cmd_suite(sui);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
