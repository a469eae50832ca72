#include "cardio/sensitivity.hpp"

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

namespace {

// Jansen totals for one output over the rows listed in `base_ids`.
// fa/fb/fab[k]/fba[k] are indexed by the base sample id.
struct OutputSlices {
  const std::vector<double>* fa;
  const std::vector<double>* fb;
  const std::vector<std::vector<double>>* fab;
  const std::vector<std::vector<double>>* fba;
};

std::vector<double> jansen_totals(const OutputSlices& s,
                                  const std::vector<int>& base_ids,
                                  bool* degenerate) {
  const int np = static_cast<int>(s.fab->size());
  const std::size_t n = base_ids.size();

  double mean = 0.0;
  for (int id : base_ids) mean += (*s.fa)[id] + (*s.fb)[id];
  mean /= static_cast<double>(2 * n);
  double var = 0.0;
  for (int id : base_ids) {
    const double da = (*s.fa)[id] - mean;
    const double db = (*s.fb)[id] - mean;
    var += da * da + db * db;
  }
  var /= static_cast<double>(2 * n - 1);

  std::vector<double> st(np, 0.0);
  const double scale = std::abs(mean) + 1.0;
  if (var <= 1e-24 * scale * scale) {
    if (degenerate) *degenerate = true;
    return st;
  }
  if (degenerate) *degenerate = false;
  for (int k = 0; k < np; ++k) {
    double acc = 0.0;
    for (int id : base_ids) {
      const double d1 = (*s.fa)[id] - (*s.fab)[k][id];
      const double d2 = (*s.fb)[id] - (*s.fba)[k][id];
      acc += d1 * d1 + d2 * d2;
    }
    // Each side is Jansen's (1/2N) sum of squared differences over Var;
    // averaging the two sides halves the estimator variance.
    st[k] = acc / (4.0 * static_cast<double>(n) * var);
  }
  return st;
}

}  // namespace

SensitivityResult total_sobol_from_values(
    const SaltelliDesign& design,
    const std::vector<std::vector<double>>& values,
    const std::vector<std::string>& output_names, int bootstrap,
    std::uint64_t bootstrap_seed) {
  const int N = design.n_base;
  const int np = design.n_params;
  const int ny = static_cast<int>(output_names.size());
  if (values.size() != design.rows.size())
    throw std::invalid_argument("total_sobol_from_values: values/design size mismatch");

  SensitivityResult res;
  res.n_base = N;
  res.output_names = output_names;
  res.param_names.reserve(np);
  for (int k = 0; k < np; ++k)
    res.param_names.emplace_back(param_name(k % kNumCalibratable));
  res.n_evals = static_cast<long>(values.size());

  // Reorganize by output into base-indexed slices, dropping base samples
  // with any non-finite evaluation across their 2(np+1) rows.
  std::vector<int> ok_ids;
  ok_ids.reserve(N);
  for (int n = 0; n < N; ++n) {
    bool ok = true;
    auto check_row = [&](std::size_t r) {
      for (int j = 0; j < ny && ok; ++j)
        if (!std::isfinite(values[r][j])) ok = false;
    };
    check_row(design.idx_A(n));
    check_row(design.idx_B(n));
    for (int k = 0; k < np && ok; ++k) {
      check_row(design.idx_AB(k, n));
      check_row(design.idx_BA(k, n));
    }
    if (ok) ok_ids.push_back(n);
  }
  res.n_failures = static_cast<long>(values.size()) -
                   static_cast<long>(ok_ids.size()) * 2 * (np + 1);
  if (ok_ids.size() < 8)
    throw std::runtime_error("total_sobol: too many failed evaluations");

  res.total.assign(np, std::vector<double>(ny, 0.0));
  res.ci_half.assign(np, std::vector<double>(ny, 0.0));
  res.degenerate.assign(ny, false);

  for (int j = 0; j < ny; ++j) {
    std::vector<double> fa(N, 0.0), fb(N, 0.0);
    std::vector<std::vector<double>> fab(np, std::vector<double>(N, 0.0));
    std::vector<std::vector<double>> fba(np, std::vector<double>(N, 0.0));
    for (int n : ok_ids) {
      fa[n] = values[design.idx_A(n)][j];
      fb[n] = values[design.idx_B(n)][j];
      for (int k = 0; k < np; ++k) {
        fab[k][n] = values[design.idx_AB(k, n)][j];
        fba[k][n] = values[design.idx_BA(k, n)][j];
      }
    }
    OutputSlices slices{&fa, &fb, &fab, &fba};

    bool degen = false;
    auto st = jansen_totals(slices, ok_ids, &degen);
    res.degenerate[j] = degen;
    for (int k = 0; k < np; ++k) res.total[k][j] = st[k];
    if (degen || bootstrap <= 0) continue;

    // Percentile bootstrap over the base-sample index.
    std::mt19937_64 rng(bootstrap_seed + static_cast<std::uint64_t>(j));
    std::uniform_int_distribution<std::size_t> pick(0, ok_ids.size() - 1);
    std::vector<std::vector<double>> reps(bootstrap);
    std::vector<int> ids(ok_ids.size());
    for (int b = 0; b < bootstrap; ++b) {
      for (auto& id : ids) id = ok_ids[pick(rng)];
      reps[b] = jansen_totals(slices, ids, nullptr);
    }
    for (int k = 0; k < np; ++k) {
      std::vector<double> v(bootstrap);
      for (int b = 0; b < bootstrap; ++b) v[b] = reps[b][k];
      std::sort(v.begin(), v.end());
      const auto q = [&](double f) {
        const double pos = f * (bootstrap - 1);
        const int i0 = static_cast<int>(pos);
        const int i1 = std::min(i0 + 1, bootstrap - 1);
        return v[i0] + (pos - i0) * (v[i1] - v[i0]);
      };
      res.ci_half[k][j] = 0.5 * (q(0.975) - q(0.025));
    }
  }
  return res;
}

SensitivityResult total_sobol(const Hyperbox& box,
                              const ParameterSet& reference, int N,
                              std::uint64_t seed, int jobs,
                              std::function<void(std::size_t, std::size_t)>
                                  progress) {
  auto design = saltelli_sample(box, N, seed);
  const auto& names = raw_output_names();
  const int ny = static_cast<int>(names.size());

  std::vector<std::vector<double>> values(
      design.rows.size(), std::vector<double>(ny, std::numeric_limits<double>::quiet_NaN()));

  std::atomic<std::size_t> done{0};
  parallel_for(design.rows.size(), jobs, [&](std::size_t r) {
    ParameterSet p = reference;
    for (int k = 0; k < kNumCalibratable; ++k)
      set_calibratable(p, k, design.rows[r][k]);
    try {
      auto lc = run_to_limit_cycle(p);
      auto out = compute_outputs(lc.beat, p);
      for (int j = 0; j < ny; ++j)
        values[r][j] = output_by_name(out, names[j]);
    } catch (const std::exception&) {
      // leave NaN; the estimator drops the whole base sample
    }
    const std::size_t d = ++done;
    if (progress && (d % 64 == 0 || d == design.rows.size()))
      progress(d, design.rows.size());
  });

  auto res = total_sobol_from_values(design, values, names);
  res.seed = seed;
  res.box_fingerprint = box.fingerprint();
  return res;
}

std::vector<int> select_parameters(const SensitivityResult& s,
                                   double threshold,
                                   const std::vector<std::string>& outputs_subset) {
  if (outputs_subset.empty())
    throw std::invalid_argument("select_parameters: empty output subset");
  std::vector<int> cols;
  for (const auto& name : outputs_subset) {
    auto it = std::find(s.output_names.begin(), s.output_names.end(), name);
    if (it == s.output_names.end())
      throw std::invalid_argument("select_parameters: unknown output '" + name + "'");
    cols.push_back(static_cast<int>(it - s.output_names.begin()));
  }
  std::vector<int> picked;
  for (std::size_t k = 0; k < s.total.size(); ++k) {
    double best = 0.0;
    for (int j : cols) best = std::max(best, s.total[k][j]);
    if (best >= threshold) picked.push_back(static_cast<int>(k));
  }
  return picked;
}

}  // namespace cardio
