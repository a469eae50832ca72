#include "cardio/lbfgsb.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace cardio {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> clip(std::vector<double> x, const BoxBounds& b) {
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = std::clamp(x[i], b.lo[i], b.hi[i]);
  return x;
}

}  // namespace

std::vector<double> fd_gradient(const Objective& f, const std::vector<double>& x,
                                double f_at_x, const BoxBounds& bounds,
                                const QNOptions& opt, long& n_fev) {
  const std::size_t n = x.size();
  std::vector<double> g(n, 0.0);
  std::vector<double> xp = x;
  for (std::size_t i = 0; i < n; ++i) {
    const double h = std::max(opt.fd_abs, opt.fd_rel * std::abs(x[i]));
    const bool can_up = x[i] + h <= bounds.hi[i];
    const bool can_dn = x[i] - h >= bounds.lo[i];
    double gi;
    if (can_up && can_dn) {
      xp[i] = x[i] + h;
      const double fp = f(xp);
      xp[i] = x[i] - h;
      const double fm = f(xp);
      n_fev += 2;
      if (std::isfinite(fp) && std::isfinite(fm)) {
        gi = (fp - fm) / (2.0 * h);
      } else if (std::isfinite(fp)) {
        gi = (fp - f_at_x) / h;
      } else if (std::isfinite(fm)) {
        gi = (f_at_x - fm) / h;
      } else {
        gi = 0.0;
      }
    } else if (can_up) {
      xp[i] = x[i] + h;
      const double fp = f(xp);
      ++n_fev;
      gi = std::isfinite(fp) ? (fp - f_at_x) / h : 0.0;
    } else if (can_dn) {
      xp[i] = x[i] - h;
      const double fm = f(xp);
      ++n_fev;
      gi = std::isfinite(fm) ? (f_at_x - fm) / h : 0.0;
    } else {
      gi = 0.0;  // degenerate box in this coordinate
    }
    g[i] = gi;
    xp[i] = x[i];
  }
  return g;
}

QNResult minimize_box(const Objective& f, const std::vector<double>& x0,
                      const BoxBounds& bounds, const QNOptions& opt) {
  const std::size_t n = x0.size();
  if (bounds.lo.size() != n || bounds.hi.size() != n)
    throw std::invalid_argument("minimize_box: bounds/x0 size mismatch");
  for (std::size_t i = 0; i < n; ++i)
    if (!(bounds.lo[i] <= bounds.hi[i]))
      throw std::invalid_argument("minimize_box: lo > hi");

  QNResult res;
  std::vector<double> x = clip(x0, bounds);
  double fx = f(x);
  res.n_fev = 1;
  if (!std::isfinite(fx))
    throw std::runtime_error("minimize_box: objective not finite at x0");
  std::vector<double> g = fd_gradient(f, x, fx, bounds, opt, res.n_fev);
  res.f_trace.push_back(fx);

  std::deque<std::pair<std::vector<double>, std::vector<double>>> pairs;  // (s, y)

  auto projected_grad = [&](const std::vector<double>& xx,
                            const std::vector<double>& gg) {
    std::vector<double> pg = gg;
    for (std::size_t i = 0; i < n; ++i) {
      const bool at_lo = xx[i] <= bounds.lo[i];
      const bool at_hi = xx[i] >= bounds.hi[i];
      if ((at_lo && gg[i] > 0.0) || (at_hi && gg[i] < 0.0)) pg[i] = 0.0;
    }
    return pg;
  };
  auto inf_norm = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double a : v) m = std::max(m, std::abs(a));
    return m;
  };

  auto two_loop = [&](const std::vector<double>& gg) {
    std::vector<double> q = gg;
    const int m = static_cast<int>(pairs.size());
    std::vector<double> alpha(m), rho(m);
    for (int i = m - 1; i >= 0; --i) {
      const auto& [s, y] = pairs[i];
      rho[i] = 1.0 / dot(y, s);
      alpha[i] = rho[i] * dot(s, q);
      for (std::size_t j = 0; j < n; ++j) q[j] -= alpha[i] * y[j];
    }
    double gamma = 1.0;
    if (m > 0) {
      const auto& [s, y] = pairs.back();
      gamma = dot(s, y) / dot(y, y);
    }
    for (std::size_t j = 0; j < n; ++j) q[j] *= gamma;
    for (int i = 0; i < m; ++i) {
      const auto& [s, y] = pairs[i];
      const double beta = rho[i] * dot(y, q);
      for (std::size_t j = 0; j < n; ++j) q[j] += (alpha[i] - beta) * s[j];
    }
    for (std::size_t j = 0; j < n; ++j) q[j] = -q[j];
    return q;  // descent direction
  };

  int stagnation = 0;
  for (int iter = 1; iter <= opt.max_iter; ++iter) {
    res.iterations = iter - 1;
    if (inf_norm(projected_grad(x, g)) < opt.pg_tol) {
      res.converged = true;
      break;
    }

    std::vector<double> d = two_loop(g);
    // Block directions that immediately leave the box.
    auto block = [&](std::vector<double>& dd) {
      for (std::size_t i = 0; i < n; ++i) {
        if (x[i] <= bounds.lo[i] && dd[i] < 0.0) dd[i] = 0.0;
        if (x[i] >= bounds.hi[i] && dd[i] > 0.0) dd[i] = 0.0;
      }
    };
    block(d);
    double gd = dot(g, d);
    if (!(gd < 0.0)) {
      // Not a descent direction (stale curvature); restart from the
      // projected steepest descent.
      pairs.clear();
      d = projected_grad(x, g);
      for (auto& v : d) v = -v;
      block(d);
      gd = dot(g, d);
      if (!(gd < 0.0)) {
        res.converged = true;  // nothing locally feasible to improve
        break;
      }
    }

    // First bound intersection along d.
    double a_max = kInf;
    for (std::size_t i = 0; i < n; ++i) {
      if (d[i] > 0.0) a_max = std::min(a_max, (bounds.hi[i] - x[i]) / d[i]);
      else if (d[i] < 0.0) a_max = std::min(a_max, (bounds.lo[i] - x[i]) / d[i]);
    }
    if (!(a_max > 0.0)) a_max = 0.0;

    double alpha = std::min(1.0, a_max);
    double f_new = kInf;
    std::vector<double> x_new;
    bool accepted = false;
    for (int ls = 0; ls < opt.max_line_steps && alpha * inf_norm(d) > 1e-16;
         ++ls) {
      std::vector<double> xt(n);
      for (std::size_t i = 0; i < n; ++i) xt[i] = x[i] + alpha * d[i];
      if (alpha >= a_max) xt = clip(xt, bounds);  // land exactly on the face
      const double ft = f(xt);
      ++res.n_fev;
      if (std::isfinite(ft) && ft <= fx + opt.c1 * alpha * gd) {
        x_new = std::move(xt);
        f_new = ft;
        accepted = true;
        break;
      }
      // Quadratic interpolation with safeguards.
      double next = alpha * 0.5;
      if (std::isfinite(ft)) {
        const double denom = 2.0 * (ft - fx - gd * alpha);
        if (denom > 0.0) next = -gd * alpha * alpha / denom;
      }
      alpha = std::clamp(next, 0.1 * alpha, 0.5 * alpha);
    }
    if (!accepted) {
      res.stalled = true;
      break;
    }

    std::vector<double> g_new =
        fd_gradient(f, x_new, f_new, bounds, opt, res.n_fev);

    // Curvature half of the strong Wolfe conditions: if the slope is still
    // steeply negative and the bound has not been reached, lengthen.
    int extensions = 0;
    while (extensions < 3 && alpha < a_max && dot(g_new, d) < opt.c2 * gd) {
      const double trial = std::min(2.0 * alpha, a_max);
      std::vector<double> xt(n);
      for (std::size_t i = 0; i < n; ++i) xt[i] = x[i] + trial * d[i];
      if (trial >= a_max) xt = clip(xt, bounds);
      const double ft = f(xt);
      ++res.n_fev;
      if (!std::isfinite(ft) || ft > fx + opt.c1 * trial * gd) break;
      alpha = trial;
      x_new = std::move(xt);
      f_new = ft;
      g_new = fd_gradient(f, x_new, f_new, bounds, opt, res.n_fev);
      ++extensions;
    }

    std::vector<double> s(n), yv(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = x_new[i] - x[i];
      yv[i] = g_new[i] - g[i];
    }
    const double sy = dot(s, yv);
    if (sy > 1e-10 * std::sqrt(dot(s, s)) * std::sqrt(dot(yv, yv))) {
      pairs.emplace_back(std::move(s), std::move(yv));
      if (static_cast<int>(pairs.size()) > opt.memory) pairs.pop_front();
    }

    const double decrease = fx - f_new;
    x = std::move(x_new);
    fx = f_new;
    g = std::move(g_new);
    res.f_trace.push_back(fx);
    res.iterations = iter;

    if (decrease <= opt.rel_f_tol * std::max(1.0, std::abs(fx))) {
      if (++stagnation >= 2) {
        res.converged = true;
        break;
      }
    } else {
      stagnation = 0;
    }
  }
  if (!res.converged && !res.stalled && res.iterations >= opt.max_iter)
    res.hit_max_iter = true;

  res.x = std::move(x);
  res.f = fx;
  res.g = std::move(g);
  return res;
}

}  // namespace cardio
