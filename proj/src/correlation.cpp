#include "cardio/correlation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "cardio/limit_cycle.hpp"
#include "cardio/outputs.hpp"
#include "cardio/parallel.hpp"

namespace cardio {

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw std::invalid_argument("pearson: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) throw std::invalid_argument("pearson: need at least 2 points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0)
    throw std::invalid_argument("pearson: zero variance");
  return sxy / std::sqrt(sxx * syy);
}

int CorrelationMatrix::output_column(const std::string& name) const {
  auto it = std::find(output_names.begin(), output_names.end(), name);
  if (it == output_names.end())
    throw std::invalid_argument("CorrelationMatrix: unknown output '" + name + "'");
  return static_cast<int>(it - output_names.begin());
}

CorrelationMatrix build_correlation_matrix(
    const ParameterSet& reference, const Hyperbox& box, int n,
    std::uint64_t seed, int jobs,
    std::function<void(std::size_t, std::size_t)> progress) {
  const int np = static_cast<int>(box.lo.size());
  if (n < 8) throw std::invalid_argument("build_correlation_matrix: n too small");

  // Draw all samples up front so the sweep order cannot change the design.
  std::vector<std::vector<double>> samples(n, std::vector<double>(np));
  {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < np; ++k)
        samples[i][k] = box.lo[k] + (box.hi[k] - box.lo[k]) * unit(rng);
  }

  const auto& out_names = raw_output_names();
  const int ny = static_cast<int>(out_names.size());
  std::vector<std::vector<double>> outputs(
      n, std::vector<double>(ny, std::numeric_limits<double>::quiet_NaN()));

  std::atomic<std::size_t> done{0};
  parallel_for(static_cast<std::size_t>(n), jobs, [&](std::size_t i) {
    ParameterSet p = reference;
    for (int k = 0; k < np; ++k) set_calibratable(p, k, samples[i][k]);
    try {
      auto lc = run_to_limit_cycle(p);
      auto out = compute_outputs(lc.beat, p);
      for (int j = 0; j < ny; ++j)
        outputs[i][j] = output_by_name(out, out_names[j]);
    } catch (const std::exception&) {
      // dropped below
    }
    const std::size_t d = ++done;
    if (progress && (d % 32 == 0 || d == static_cast<std::size_t>(n)))
      progress(d, n);
  });

  std::vector<int> ok;
  ok.reserve(n);
  for (int i = 0; i < n; ++i) {
    bool good = true;
    for (int j = 0; j < ny && good; ++j)
      if (!std::isfinite(outputs[i][j])) good = false;
    if (good) ok.push_back(i);
  }
  const int dropped = n - static_cast<int>(ok.size());
  if (dropped > 0.01 * n)
    throw std::runtime_error(
        "build_correlation_matrix: more than 1% of simulations failed (" +
        std::to_string(dropped) + "/" + std::to_string(n) + ")");

  CorrelationMatrix m;
  m.n_samples = static_cast<int>(ok.size());
  m.seed = seed;
  m.box_fingerprint = box.fingerprint();
  m.covid = box.covid;
  m.HR = reference.HR;
  m.output_names = out_names;
  m.param_names.reserve(np);
  for (int k = 0; k < np; ++k) m.param_names.emplace_back(param_name(k));
  m.M.assign(np, std::vector<double>(ny, 0.0));

  std::vector<double> xs(ok.size()), ys(ok.size());
  for (int k = 0; k < np; ++k) {
    for (std::size_t i = 0; i < ok.size(); ++i) xs[i] = samples[ok[i]][k];
    for (int j = 0; j < ny; ++j) {
      for (std::size_t i = 0; i < ok.size(); ++i) ys[i] = outputs[ok[i]][j];
      m.M[k][j] = pearson(xs, ys);
    }
  }
  return m;
}

}  // namespace cardio
