// C1 reference reproduction, C2 volume conservation, C3 limit-cycle
// convergence, C8 fast property battery.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "acceptance.hpp"
#include "cardio/lbfgsb.hpp"
#include "cardio/limit_cycle.hpp"
#include "cardio/model.hpp"
#include "cardio/outputs.hpp"
#include "cardio/sobol.hpp"

namespace acceptance {

using namespace cardio;

namespace {

Result c1_reference(const Context&) {
  Result r;
  const auto t0 = std::chrono::steady_clock::now();
  const ParameterSet p = reference_parameters();
  const auto lc = run_to_limit_cycle(p);
  const auto out = compute_outputs(lc.beat, p, kReferenceBSA);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  const auto table = display_outputs(out);
  const auto& ranges = healthy_ranges();
  const auto& expected = reference_display_values();

  int out_of_range = 0;
  double worst_rel = 0.0;
  std::string worst_name;
  for (const auto& [name, value] : table) {
    auto rng = ranges.find(name);
    if (rng != ranges.end() && !rng->second.contains(value)) {
      ++out_of_range;
      r.details.push_back(fmt("out of range: %s = %.4g", name.c_str(), value));
    }
    auto exp = expected.find(name);
    if (exp != expected.end()) {
      const double rel = std::abs(value - exp->second) / std::abs(exp->second);
      if (rel > worst_rel) {
        worst_rel = rel;
        worst_name = name;
      }
    }
  }

  r.details.push_back(fmt("31 outputs, %d outside their healthy range",
                          out_of_range));
  r.details.push_back(fmt("worst deviation from the reference table: %.2f%% (%s)",
                          100.0 * worst_rel, worst_name.c_str()));
  r.details.push_back(fmt("25-beat simulation + post-processing: %.2f s", secs));
  r.pass = out_of_range == 0 && worst_rel < 0.05 && secs < 5.0 &&
           table.size() == 31;
  return r;
}

Result c2_conservation(const Context&) {
  Result r;
  const ParameterSet p = reference_parameters();
  const State x0 = default_initial_state(p);
  const double v0 = conserved_volume(x0, p);
  const auto lc = run_to_limit_cycle(p, x0);  // rtol = atol = 1e-7 defaults
  const double v1 = conserved_volume(lc.x_final, p);
  const double drift = std::abs(v1 - v0) / v0;
  r.details.push_back(fmt("total stressed volume: %.6f -> %.6f mL", v0, v1));
  r.details.push_back(fmt("relative drift over 25 beats: %.3e (budget 1e-6)",
                          drift));
  r.pass = drift < 1e-6;
  return r;
}

Result c3_limit_cycle(const Context&) {
  Result r;
  const ParameterSet p = reference_parameters();

  const auto lc25 = run_to_limit_cycle(p);
  r.details.push_back(fmt("periodicity residual at beat 25: %.3e (budget 1e-3)",
                          lc25.periodicity_residual));

  IntegratorConfig cfg;
  cfg.beats = 50;
  const auto lc50 = run_to_limit_cycle(p, cfg);

  const auto out25 = display_outputs(compute_outputs(lc25.beat, p, kReferenceBSA));
  const auto out50 = display_outputs(compute_outputs(lc50.beat, p, kReferenceBSA));
  double worst = 0.0;
  std::string worst_name;
  for (std::size_t i = 0; i < out25.size(); ++i) {
    const double rel = std::abs(out50[i].second - out25[i].second) /
                       std::abs(out25[i].second);
    if (rel > worst) {
      worst = rel;
      worst_name = out25[i].first;
    }
  }
  r.details.push_back(
      fmt("largest output change when doubling to 50 beats: %.4f%% (%s)",
          100.0 * worst, worst_name.c_str()));
  r.pass = lc25.periodicity_residual < 1e-3 && worst < 1e-3;
  return r;
}

// ---------------------------------------------------------------------- C8

bool prop_valve(std::string& line) {
  const double rmin = 0.0063, rmax = 94168.0;
  double q_prev = -1e300;
  bool ok = true;
  for (double dp = -40.0; dp <= 40.0; dp += 0.125) {
    const double q = valve_flow(dp, rmin, rmax);
    const double res = valve_resistance(dp, rmin, rmax);
    ok &= q > q_prev && res >= rmin && res <= rmax;
    q_prev = q;
  }
  ok &= std::abs(valve_resistance(0.0, rmin, rmax) - std::sqrt(rmin * rmax)) <
        1e-9 * std::sqrt(rmin * rmax);
  line = "valve resistance bounded by [R_min, R_max], flow strictly monotone";
  return ok;
}

bool prop_activation(std::string& line) {
  const ParameterSet p = reference_parameters();
  const double T = p.T_HB();
  bool ok = true;
  for (const ChamberParams* ch : {&p.LA, &p.LV, &p.RA, &p.RV}) {
    ok &= std::abs(activation(ch->tC, *ch, T)) < 1e-12;
    ok &= std::abs(activation(ch->tC + ch->TC, *ch, T) - 1.0) < 1e-12;
    ok &= std::abs(activation(ch->tC + 0.5 * ch->TC, *ch, T) - 0.5) < 1e-12;
    ok &= std::abs(activation(ch->tR + ch->TR, *ch, T)) < 1e-12;
    for (double t = 0.0; t < T; t += T / 257) {
      const double a = activation(t, *ch, T);
      ok &= a >= 0.0 && a <= 1.0;
      ok &= std::abs(a - activation(t + 5 * T, *ch, T)) < 1e-12;
    }
  }
  line = "activation stays in [0,1] with exact branch endpoints (4 chambers)";
  return ok;
}

bool prop_pearson(std::string& line) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> g;
  std::vector<double> x(300), y(300), xs(300), ys(300), mono(300);
  for (int i = 0; i < 300; ++i) {
    x[i] = g(rng);
    y[i] = 0.7 * x[i] + 0.4 * g(rng);
    xs[i] = -2.5 * x[i] + 1.0;   // negative rescale flips the sign
    ys[i] = 4.0 * y[i] - 7.0;
    mono[i] = std::exp(x[i]);    // monotone transform keeps it
  }
  const double base = pearson(x, y);
  bool ok = std::abs(pearson(xs, ys) + base) < 1e-12;
  ok &= (pearson(x, mono) > 0.0) == (base > 0.0);
  std::vector<double> lin(50), aff(50);
  for (int i = 0; i < 50; ++i) {
    lin[i] = i;
    aff[i] = 3.0 * i - 11.0;
  }
  ok &= std::abs(pearson(lin, aff) - 1.0) < 1e-12;
  line = "Pearson: affine invariance, sign flip, monotone sign agreement";
  return ok;
}

bool prop_saltelli(std::string& line) {
  bool ok = true;
  for (int np : {2, 5}) {
    Hyperbox box;
    box.lo.assign(np, 0.0);
    box.hi.assign(np, 1.0);
    for (int n : {4, 16}) {
      const auto d = saltelli_sample(box, n, 1);
      ok &= d.rows.size() == static_cast<std::size_t>(2 * n * (np + 1));
      for (const auto& row : d.rows) ok &= box.contains(row);
    }
  }
  line = "Saltelli design size is 2N(Np+1) with every row inside the box";
  return ok;
}

bool prop_feasible(std::string& line) {
  BoxBounds bounds{{-1.0, 0.0}, {2.0, 3.5}};
  bool inside = true;
  Objective f = [&](const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i)
      inside &= v[i] >= bounds.lo[i] - 1e-12 && v[i] <= bounds.hi[i] + 1e-12;
    return std::cos(2.0 * v[0]) + (v[1] - 3.0) * (v[1] - 3.0) * (v[1] + 1.0);
  };
  const auto res = minimize_box(f, {2.0, 0.1}, bounds);
  line = fmt("optimizer feasibility: %ld evaluations, all inside the box",
             res.n_fev);
  return inside;
}

bool prop_sobol_analytic(std::string& line) {
  Hyperbox box;
  box.lo.assign(2, 0.0);
  box.hi.assign(2, 1.0);
  const auto d = saltelli_sample(box, 2048, 0);
  std::vector<std::vector<double>> values(d.rows.size(), std::vector<double>(1));
  for (std::size_t i = 0; i < d.rows.size(); ++i)
    values[i][0] = d.rows[i][0] + d.rows[i][1];  // equal-variance additive
  const auto s = total_sobol_from_values(d, values, {"y"});
  bool ok = true;
  for (int k = 0; k < 2; ++k) {
    const double half = std::max(2.6 * s.ci_half[k][0], 0.02);
    ok &= std::abs(s.total[k][0] - 0.5) < half;
  }
  line = fmt("analytic totals 0.5/0.5 recovered: %.3f and %.3f (N=2048)",
             s.total[0][0], s.total[1][0]);
  return ok;
}

bool prop_fd(std::string& line) {
  Objective f = [](const std::vector<double>& v) {
    return std::exp(std::sin(2.0 * v[0])) + v[0] * v[1] * v[1] +
           std::log(2.0 + std::cos(v[2]));
  };
  BoxBounds bounds{std::vector<double>(3, -5.0), std::vector<double>(3, 5.0)};
  QNOptions opt;
  double worst = 0.0;
  for (const auto& x : {std::vector<double>{0.4, -1.0, 2.2},
                        std::vector<double>{-1.7, 0.3, 0.0},
                        std::vector<double>{2.0, 2.0, -2.0}}) {
    long n_fev = 0;
    const auto g = fd_gradient(f, x, f(x), bounds, opt, n_fev);
    for (std::size_t i = 0; i < 3; ++i) {
      auto probe = [&](double h) {
        auto xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        return (f(xp) - f(xm)) / (2.0 * h);
      };
      const double d1 = probe(1e-3), d2 = probe(5e-4), d3 = probe(2.5e-4);
      const double r1 = (4.0 * d2 - d1) / 3.0, r2 = (4.0 * d3 - d2) / 3.0;
      const double oracle = (16.0 * r2 - r1) / 15.0;
      worst = std::max(worst, std::abs(g[i] - oracle) /
                                  std::max(1.0, std::abs(oracle)));
    }
  }
  line = fmt("finite differences vs Richardson oracle: worst %.2e (budget 1e-4)",
             worst);
  return worst < 1e-4;
}

Result c8_properties(const Context&) {
  Result r;
  r.pass = true;
  using Prop = bool (*)(std::string&);
  const Prop props[] = {prop_valve,    prop_activation, prop_pearson,
                        prop_saltelli, prop_feasible,   prop_sobol_analytic,
                        prop_fd};
  for (Prop prop : props) {
    std::string line;
    const bool ok = prop(line);
    r.details.push_back(fmt("%s: %s", ok ? "ok" : "FAIL", line.c_str()));
    r.pass &= ok;
  }
  return r;
}

}  // namespace

std::vector<Criterion> core_criteria() {
  return {
      {"C1", "reference simulation matches the stored healthy-individual table", c1_reference},
      {"C2", "total stressed volume is conserved to 1e-6", c2_conservation},
      {"C3", "the periodic regime is reached and stable", c3_limit_cycle},
      {"C8", "fast property battery", c8_properties},
  };
}

}  // namespace acceptance
