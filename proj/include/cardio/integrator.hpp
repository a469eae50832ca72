#pragma once

// Dormand-Prince 5(4) embedded Runge-Kutta pair with FSAL, PI step-size
// control and the classical quartic dense-output interpolant.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace cardio {

struct IntegratorConfig {
  double rtol = 1e-7;
  double atol = 1e-7;
  double h_init = 0.0;   // 0 -> automatic
  double h_min = 1e-9;
  double h_max = 0.0;    // 0 -> t1 - t0
  long max_steps = 4'000'000;
  int beats = 25;        // heartbeats for limit-cycle runs
  int grid_points = 1000;  // samples per beat in the extracted trajectory

  void validate() const {
    if (!(rtol > 0.0) || !(atol > 0.0))
      throw std::invalid_argument("IntegratorConfig: tolerances must be > 0");
    if (!(h_min > 0.0) || (h_max > 0.0 && h_min >= h_max))
      throw std::invalid_argument("IntegratorConfig: need 0 < h_min < h_max");
    if (beats < 2)
      throw std::invalid_argument("IntegratorConfig: beats must be >= 2");
    if (grid_points < 2)
      throw std::invalid_argument("IntegratorConfig: grid_points must be >= 2");
  }
};

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double t,
                   std::vector<double> state)
      : std::runtime_error(what), t_last(t), x_last(std::move(state)) {}
  double t_last;
  std::vector<double> x_last;
};

namespace dp5 {
// Butcher tableau of the Dormand-Prince 5(4) pair.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                        c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                        a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - bhat (error weights, including the k7 term).
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                        e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense-output coefficients.
inline constexpr double d1 = -12715105075.0 / 11282082432.0;
inline constexpr double d3 = 87487479700.0 / 32700410799.0;
inline constexpr double d4 = -10690763975.0 / 1880347072.0;
inline constexpr double d5 = 701980252875.0 / 199316789632.0;
inline constexpr double d6 = -1453857185.0 / 822651844.0;
inline constexpr double d7 = 69997945.0 / 29380423.0;
}  // namespace dp5

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
struct DenseStep {
  double t0, h;
  Vec<N> r1, r2, r3, r4, r5;
};

/// Piecewise-quartic interpolant assembled from accepted solver steps.
template <std::size_t N>
class DenseSolution {
 public:
  double t_begin() const { return t_begin_; }
  double t_end() const { return t_end_; }
  const Vec<N>& y_end() const { return y_end_; }
  std::size_t n_accepted() const { return n_accepted_; }
  std::size_t n_rejected() const { return n_rejected_; }
  std::size_t n_rhs_evals() const { return n_rhs_; }
  double stored_from() const {
    return steps_.empty() ? t_end_ : steps_.front().t0;
  }

  Vec<N> operator()(double t) const {
    Vec<N> y;
    eval(t, y);
    return y;
  }

  void eval(double t, Vec<N>& y) const {
    if (steps_.empty())
      throw std::out_of_range("DenseSolution: no stored steps");
    const double lo = steps_.front().t0;
    const double hi = steps_.back().t0 + steps_.back().h;
    const double slack = 1e-10 * (1.0 + std::abs(hi));
    if (t < lo - slack || t > hi + slack)
      throw std::out_of_range("DenseSolution: t outside stored window");
    t = std::clamp(t, lo, hi);
    // Last step whose start is <= t.
    auto it = std::upper_bound(
        steps_.begin(), steps_.end(), t,
        [](double v, const DenseStep<N>& s) { return v < s.t0; });
    if (it != steps_.begin()) --it;
    const DenseStep<N>& s = *it;
    const double th = (t - s.t0) / s.h;
    const double th1 = 1.0 - th;
    for (std::size_t i = 0; i < N; ++i)
      y[i] = s.r1[i] +
             th * (s.r2[i] + th1 * (s.r3[i] + th * (s.r4[i] + th1 * s.r5[i])));
  }

  // Populated by integrate().
  std::vector<DenseStep<N>> steps_;
  double t_begin_ = 0.0, t_end_ = 0.0;
  Vec<N> y_end_{};
  std::size_t n_accepted_ = 0, n_rejected_ = 0, n_rhs_ = 0;
};

/// Integrate dy/dt = rhs(t, y) from (t0, y0) to t1 > t0. Dense-output
/// coefficients are stored for every accepted step that ends at or after
/// `store_from` (pass t0 or -inf to keep the whole solution).
template <std::size_t N, class RHS>
DenseSolution<N> integrate(RHS&& rhs, const Vec<N>& y0, double t0, double t1,
                           const IntegratorConfig& cfg,
                           double store_from = -std::numeric_limits<double>::infinity()) {
  cfg.validate();
  if (!(t1 > t0))
    throw std::invalid_argument("integrate: need t1 > t0");

  constexpr double kSafe = 0.9, kFac1 = 0.2, kFac2 = 10.0, kBeta = 0.04;
  constexpr double kExpo1 = 0.2 - kBeta * 0.75;
  constexpr double kFacc1 = 1.0 / kFac1, kFacc2 = 1.0 / kFac2;

  const double h_max = cfg.h_max > 0.0 ? cfg.h_max : t1 - t0;

  DenseSolution<N> sol;
  sol.t_begin_ = t0;

  Vec<N> y = y0, ynew, ytmp, ysti;
  Vec<N> k1, k2, k3, k4, k5, k6, k7;
  double t = t0;

  auto finite = [](const Vec<N>& v) {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  };
  auto fail = [&](const char* msg) {
    throw IntegrationError(msg, t, std::vector<double>(y.begin(), y.end()));
  };

  if (!finite(y)) fail("integrate: non-finite initial state");
  rhs(t, y, k1);
  sol.n_rhs_ = 1;

  // Starting step size (Hairer's hinit heuristic).
  double h = cfg.h_init;
  if (h <= 0.0) {
    double dnf = 0.0, dny = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sk = cfg.atol + cfg.rtol * std::abs(y[i]);
      dnf += (k1[i] / sk) * (k1[i] / sk);
      dny += (y[i] / sk) * (y[i] / sk);
    }
    h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
    h = std::min(h, h_max);
    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * k1[i];
    rhs(t + h, ytmp, k2);
    ++sol.n_rhs_;
    double der2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sk = cfg.atol + cfg.rtol * std::abs(y[i]);
      der2 += ((k2[i] - k1[i]) / sk) * ((k2[i] - k1[i]) / sk);
    }
    der2 = std::sqrt(der2) / h;
    const double der12 = std::max(std::sqrt(dnf), der2);
    const double h1 =
        der12 <= 1e-15 ? std::max(1e-6, h * 1e-3)
                       : std::pow(0.01 / der12, 0.2);
    h = std::min({100.0 * h, h1, h_max});
  }

  double facold = 1e-4;
  bool last = false, rejected = false;
  long nstep = 0;

  while (true) {
    if (nstep++ > cfg.max_steps)
      fail("integrate: step budget exhausted");
    if (t + 1.01 * h - t1 > 0.0) {
      h = t1 - t;
      last = true;
    }
    if (h < cfg.h_min && !last)
      fail("integrate: step size underflow below h_min");

    using namespace dp5;
    bool blown = false;
    auto stage = [&](double c, const Vec<N>& yin, Vec<N>& kout) {
      if (!finite(yin)) {
        blown = true;
        return;
      }
      rhs(t + c * h, yin, kout);
      ++sol.n_rhs_;
      if (!finite(kout)) blown = true;
    };

    for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
    stage(c2, ytmp, k2);
    if (!blown) {
      for (std::size_t i = 0; i < N; ++i)
        ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
      stage(c3, ytmp, k3);
    }
    if (!blown) {
      for (std::size_t i = 0; i < N; ++i)
        ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      stage(c4, ytmp, k4);
    }
    if (!blown) {
      for (std::size_t i = 0; i < N; ++i)
        ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] +
                              a54 * k4[i]);
      stage(c5, ytmp, k5);
    }
    if (!blown) {
      for (std::size_t i = 0; i < N; ++i)
        ysti[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                              a64 * k4[i] + a65 * k5[i]);
      stage(1.0, ysti, k6);
    }
    if (!blown) {
      for (std::size_t i = 0; i < N; ++i)
        ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] +
                              b5 * k5[i] + b6 * k6[i]);
      stage(1.0, ynew, k7);
    }

    double err;
    if (blown) {
      err = 1e10;
    } else {
      err = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        const double sk =
            cfg.atol + cfg.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
        const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                               e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        err += (ei / sk) * (ei / sk);
      }
      err = std::sqrt(err / static_cast<double>(N));
    }

    const double fac11 = std::pow(err, kExpo1);
    if (err <= 1.0) {
      // Accepted.
      facold = std::max(err, 1e-4);
      double fac = fac11 / std::pow(facold, kBeta);
      fac = std::max(kFacc2, std::min(kFacc1, fac / kSafe));
      double hnew = h / fac;

      if (t + h >= store_from) {
        DenseStep<N> s;
        s.t0 = t;
        s.h = h;
        for (std::size_t i = 0; i < N; ++i) {
          const double dy = ynew[i] - y[i];
          const double bspl = h * k1[i] - dy;
          s.r1[i] = y[i];
          s.r2[i] = dy;
          s.r3[i] = bspl;
          s.r4[i] = dy - h * k7[i] - bspl;
          s.r5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                         d6 * k6[i] + d7 * k7[i]);
        }
        sol.steps_.push_back(s);
      }

      k1 = k7;  // FSAL
      y = ynew;
      t += h;
      ++sol.n_accepted_;
      if (rejected) hnew = std::min(std::abs(hnew), std::abs(h));
      rejected = false;
      if (last) break;
      h = std::min(hnew, h_max);
    } else {
      // Rejected.
      double hnew = h / std::min(kFacc1, fac11 / kSafe);
      rejected = true;
      last = false;
      ++sol.n_rejected_;
      if (hnew < cfg.h_min) fail("integrate: step size underflow below h_min");
      h = hnew;
    }
  }

  sol.t_end_ = t;
  sol.y_end_ = y;
  return sol;
}

}  // namespace cardio
