#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "cardio/calibration.hpp"
#include "cardio/hyperbox.hpp"
#include "cardio/parameters.hpp"

using namespace cardio;

namespace {

// A light integrator setup: calibration unit tests only need a consistent
// forward map, not a fully converged limit cycle.
IntegratorConfig fast_ode() {
  IntegratorConfig c;
  c.beats = 12;
  c.rtol = 1e-6;
  c.atol = 1e-6;
  c.grid_points = 400;
  return c;
}

// One free parameter (systemic arterial resistance), two pressure data
// generated by the model itself at r_true, so the global minimum is exact.
CalibrationProblem one_param_problem(double r_true) {
  const ParameterSet base = reference_parameters();
  const Hyperbox box = build_hyperbox(base, false);
  const std::vector<int> ids{param_index("R_AR_SYS")};

  CalibrationProblem probe(base, ids, box,
                           {{"SAP_max", 100.0}, {"SAP_min", 60.0}},
                           std::nullopt, fast_ode());
  const auto y = probe.model_outputs_for({r_true});
  return CalibrationProblem(base, ids, box,
                            {{"SAP_max", y[0]}, {"SAP_min", y[1]}},
                            std::nullopt, fast_ode());
}

// Correlation matrix with hand-set physiological signs for the single free
// parameter; every other row stays zero.
CorrelationMatrix toy_matrix() {
  CorrelationMatrix M;
  for (const auto& n : calibratable_names()) M.param_names.emplace_back(n);
  M.output_names = calibration_output_names();
  M.M.assign(32, std::vector<double>(M.output_names.size(), 0.0));
  auto set = [&](const char* par, const char* out, double r) {
    M.M[param_index(par)][M.output_column(out)] = r;
  };
  set("R_AR_SYS", "SAP_max", 0.80);
  set("R_AR_SYS", "SAP_min", 0.90);
  set("R_AR_SYS", "LV_ESV", 0.50);
  set("R_AR_SYS", "LV_EF", -0.50);
  M.n_samples = 1;
  return M;
}

constexpr double kTrueR = 0.75;

}  // namespace

TEST_CASE("problem construction and validation") {
  const ParameterSet base = reference_parameters();
  const Hyperbox box = build_hyperbox(base, false);

  CalibrationProblem prob(base, {3, 14}, box,
                          {{"SAP_max", 110.0}, {"LV_EF", 60.0}}, 1.8);
  CHECK(prob.n_free() == 2);
  CHECK(prob.n_data() == 2);
  CHECK(prob.lo()[0] == box.lo[3]);
  CHECK(prob.hi()[1] == box.hi[14]);
  CHECK(prob.BSA() == 1.8);

  const auto guess = prob.initial_guess();
  CHECK(guess[0] == get_calibratable(base, 3));
  CHECK(guess[1] == get_calibratable(base, 14));

  const auto assembled = prob.assemble({1.1, 0.44});
  CHECK(get_calibratable(assembled, 3) == 1.1);
  CHECK(get_calibratable(assembled, 14) == 0.44);
  CHECK(get_calibratable(assembled, 0) == get_calibratable(base, 0));

  // rejects: unknown tag, non-positive datum, duplicate/invalid ids
  CHECK_THROWS_AS(CalibrationProblem(base, {3}, box, {{"bogus", 1.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(CalibrationProblem(base, {3}, box, {{"SAP_max", 0.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      CalibrationProblem(base, {3, 3}, box, {{"SAP_max", 110.0}}),
      std::invalid_argument);
  CHECK_THROWS_AS(
      CalibrationProblem(base, {55}, box, {{"SAP_max", 110.0}}),
      std::invalid_argument);
}

TEST_CASE("relative mean-square error formula") {
  const ParameterSet base = reference_parameters();
  const Hyperbox box = build_hyperbox(base, false);
  CalibrationProblem prob(base, {14}, box,
                          {{"SAP_max", 2.0}, {"SAP_min", 4.0}});
  // errors: (2-1)/2 and (4-3)/4
  CHECK(prob.mse_of_outputs({1.0, 3.0}) ==
        doctest::Approx(0.5 * (0.25 + 0.0625)).epsilon(1e-14));
  CHECK(prob.mse_of_outputs({2.0, 4.0}) == 0.0);
}

TEST_CASE("failed simulations surface as LossEvaluationError") {
  const ParameterSet base = reference_parameters();
  const Hyperbox box = build_hyperbox(base, false);
  IntegratorConfig starved = fast_ode();
  starved.max_steps = 5;  // cannot possibly finish a beat
  CalibrationProblem prob(base, {14}, box, {{"SAP_max", 110.0}}, std::nullopt,
                          starved);
  CHECK_THROWS_AS(prob.model_outputs_for({0.59}), LossEvaluationError);
}

TEST_CASE("synthetic samples hit zero loss at their own parameters") {
  const CalibrationProblem prob = one_param_problem(kTrueR);
  const SyntheticSample s1 = generate_synthetic(prob, 11);
  const SyntheticSample s2 = generate_synthetic(prob, 12);

  REQUIRE(s1.p_true.size() == 1);
  CHECK(s1.p_true[0] >= prob.lo()[0]);
  CHECK(s1.p_true[0] <= prob.hi()[0]);
  CHECK(s1.p_true[0] != s2.p_true[0]);
  REQUIRE(s1.data.size() == prob.data().size());
  CHECK(s1.data[0].name == "SAP_max");
  CHECK(s1.data[0].value > 0.0);

  CalibrationProblem prob1(prob.base(), prob.free_ids(),
                           build_hyperbox(prob.base(), false), s1.data,
                           std::nullopt, prob.ode());
  CHECK(prob1.mse(s1.p_true) < 1e-18);
  CHECK(prob1.mse_against(s1.p_true, s1.data) < 1e-18);
}

TEST_CASE("measurement-noise table") {
  CHECK(noise_std("LA_Vmax") == 0.05);
  CHECK(noise_std("LV_EDV") == 0.05);
  CHECK(noise_std("LV_ESV") == 0.05);
  CHECK(noise_std("SAP_min") == 0.05);
  CHECK(noise_std("PAP_max") == 0.05);
  CHECK(noise_std("LV_EF") == 0.04);
  CHECK(noise_std("maxGradP_rAV") == 0.04);
  CHECK(noise_std("SAP_max") == 0.04);
  CHECK_THROWS_AS(noise_std("CO"), std::invalid_argument);
}

TEST_CASE("noise is multiplicative, unbiased, and reproducible") {
  const std::vector<CalibrationDatum> clean{{"LA_Vmax", 80.0},
                                            {"SAP_max", 110.0}};
  CHECK(add_noise(clean, 7) == add_noise(clean, 7));
  CHECK_FALSE(add_noise(clean, 7) == add_noise(clean, 8));

  double sum5 = 0, sq5 = 0, sum4 = 0, sq4 = 0;
  const int n = 4000;
  for (int s = 0; s < n; ++s) {
    const auto noisy = add_noise(clean, 1000 + s);
    REQUIRE(noisy.size() == 2);
    CHECK(noisy[0].name == "LA_Vmax");
    const double e5 = noisy[0].value / 80.0 - 1.0;
    const double e4 = noisy[1].value / 110.0 - 1.0;
    sum5 += e5;
    sq5 += e5 * e5;
    sum4 += e4;
    sq4 += e4 * e4;
  }
  const double mean5 = sum5 / n, mean4 = sum4 / n;
  const double std5 = std::sqrt(sq5 / n - mean5 * mean5);
  const double std4 = std::sqrt(sq4 / n - mean4 * mean4);
  CHECK(std::abs(mean5) < 0.004);
  CHECK(std::abs(mean4) < 0.004);
  CHECK(std5 == doctest::Approx(0.05).epsilon(0.08));
  CHECK(std4 == doctest::Approx(0.04).epsilon(0.08));
}

TEST_CASE("surrogate gradient sign bookkeeping") {
  // sig > 0; k=0,1 helped (active errors), k=2 ignored (below threshold)
  CHECK(surrogate_gradient({0.2, -0.05, 0.005}, 0, {0.5, -0.3, 0.9}) ==
        doctest::Approx(-0.8).epsilon(1e-14));
  // k=1 now actively fights the move
  CHECK(surrogate_gradient({-0.2, 0.1}, 0, {0.4, 0.7}) ==
        doctest::Approx(-0.4 + 0.7).epsilon(1e-14));
  // uncorrelated outputs contribute nothing either way
  CHECK(surrogate_gradient({0.2}, 0, {0.6}) == doctest::Approx(-0.6));
  CHECK(surrogate_gradient({0.2, 0.3}, 0, {0.6, 0.0}) ==
        doctest::Approx(-0.6));

  CHECK_THROWS_AS(surrogate_gradient({0.1}, 0, {0.5, 0.5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(surrogate_gradient({0.1}, 1, {0.5}), std::invalid_argument);
}

TEST_CASE("random step distribution and saturation") {
  std::mt19937_64 rng(99);

  SUBCASE("upward draws are uniform on (value, hi]") {
    const double value = 0.3, lo = 0.1, hi = 0.9;
    const int n = 20000;
    std::vector<double> draws(n);
    for (auto& d : draws) {
      d = cmc_step(value, lo, hi, +1.0, rng);
      CHECK(d > value);
      CHECK(d <= hi);
    }
    std::sort(draws.begin(), draws.end());
    double ks = 0.0;
    for (int i = 0; i < n; ++i) {
      const double f = (draws[i] - value) / (hi - value);
      ks = std::max(ks, std::abs(f - (i + 1.0) / n));
      ks = std::max(ks, std::abs(f - static_cast<double>(i) / n));
    }
    CHECK(ks < 1.95 / std::sqrt(static_cast<double>(n)));
  }

  SUBCASE("downward draws stay in [lo, value)") {
    for (int i = 0; i < 2000; ++i) {
      const double d = cmc_step(0.7, 0.2, 0.9, -1.0, rng);
      CHECK(d >= 0.2);
      CHECK(d < 0.7);
    }
  }

  SUBCASE("a bound-pinned parameter is a flagged no-op") {
    bool sat = false;
    CHECK(cmc_step(0.9, 0.1, 0.9, +1.0, rng, &sat) == 0.9);
    CHECK(sat);
    CHECK(cmc_step(0.1, 0.1, 0.9, -1.0, rng, &sat) == 0.1);
    CHECK(sat);
    cmc_step(0.5, 0.1, 0.9, +1.0, rng, &sat);
    CHECK_FALSE(sat);
  }

  SUBCASE("values outside the box are rejected") {
    CHECK_THROWS_AS(cmc_step(1.5, 0.0, 1.0, 1.0, rng), std::invalid_argument);
  }
}

TEST_CASE("correlation-guided search improves a one-parameter problem") {
  const CalibrationProblem prob = one_param_problem(kTrueR);
  CmcOptions opt;
  opt.it_max = 40;
  opt.tol_mse = 1e-6;

  const auto rep = cmc(prob, toy_matrix(), prob.initial_guess(), opt, 314);
  CHECK(rep.method == "cmc");
  REQUIRE_FALSE(rep.trace.empty());
  CHECK(rep.trace.front().iter == 0);
  CHECK(rep.trace.front().phase == 'c');
  CHECK(rep.final_mse <= rep.trace.front().mse);
  CHECK(rep.success);
  CHECK(rep.final_rmse == doctest::Approx(std::sqrt(rep.final_mse)));
  CHECK(rep.p_final[0] >= prob.lo()[0]);
  CHECK(rep.p_final[0] <= prob.hi()[0]);
  CHECK(rep.n_sim >= rep.iterations);
  CHECK(rep.iterations <= opt.it_max + 1);
  CHECK(rep.wall_seconds > 0.0);
  // the loss actually moved toward the generator value
  CHECK(std::abs(rep.p_final[0] - kTrueR) < std::abs(rep.p_initial[0] - kTrueR));
  // deterministic replay (wall time aside)
  const auto rep2 = cmc(prob, toy_matrix(), prob.initial_guess(), opt, 314);
  CHECK(rep2.p_final == rep.p_final);
  CHECK(rep2.final_mse == rep.final_mse);
  CHECK(rep2.trace == rep.trace);
  CHECK(rep2.iterations == rep.iterations);
  CHECK(rep2.n_sim == rep.n_sim);
}

TEST_CASE("quasi-newton resolves the same problem sharply") {
  const CalibrationProblem prob = one_param_problem(kTrueR);
  QNOptions opt;
  opt.max_iter = 40;
  const auto rep = bounded_quasi_newton(prob, prob.initial_guess(), opt);
  CHECK(rep.method == "lbfgsb");
  CHECK(rep.success);
  CHECK(rep.final_rmse < 1e-2);
  CHECK(rep.p_final[0] == doctest::Approx(kTrueR).epsilon(0.02));
  CHECK(rep.n_sim > 0);
  REQUIRE_FALSE(rep.trace.empty());
  CHECK(rep.trace.back().phase == 'q');
}

TEST_CASE("hybrid hands over to the smooth solver and keeps the best") {
  const CalibrationProblem prob = one_param_problem(kTrueR);
  HybridOptions opt;
  opt.cmc.it_max = 30;
  opt.qn.max_iter = 40;
  const auto rep = hybrid(prob, toy_matrix(), prob.initial_guess(), opt, 2718);
  CHECK(rep.method == "hybrid");
  CHECK(rep.success);
  REQUIRE_FALSE(rep.trace.empty());
  CHECK(rep.trace.front().phase == 'c');
  const bool has_qn_phase =
      std::any_of(rep.trace.begin(), rep.trace.end(),
                  [](const TracePoint& t) { return t.phase == 'q'; });
  CHECK(has_qn_phase);
  // iteration numbering keeps rising across the phase switch
  for (std::size_t i = 1; i < rep.trace.size(); ++i)
    CHECK(rep.trace[i].iter >= rep.trace[i - 1].iter);
  // final answer is at least as good as any single correlation phase draw
  for (const auto& t : rep.trace)
    if (t.phase == 'c') CHECK(rep.final_mse <= t.mse + 1e-15);
  CHECK(rep.final_rmse < 1e-2);
}

TEST_CASE("cmc rejects malformed starts") {
  const CalibrationProblem prob = one_param_problem(kTrueR);
  CmcOptions opt;
  CHECK_THROWS_AS(cmc(prob, toy_matrix(), {0.0}, opt, 1),
                  std::invalid_argument);  // below lo
  CHECK_THROWS_AS(cmc(prob, toy_matrix(), {0.5, 0.5}, opt, 1),
                  std::invalid_argument);  // wrong length

  CorrelationMatrix bad = toy_matrix();
  bad.param_names.erase(bad.param_names.begin() + param_index("R_AR_SYS"));
  bad.M.erase(bad.M.begin() + param_index("R_AR_SYS"));
  CHECK_THROWS_AS(cmc(prob, bad, prob.initial_guess(), opt, 1),
                  std::invalid_argument);
}
