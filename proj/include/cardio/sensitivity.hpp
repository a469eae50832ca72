#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cardio/hyperbox.hpp"
#include "cardio/sobol.hpp"

namespace cardio {

struct SensitivityResult {
  std::vector<std::string> param_names;   // N_p
  std::vector<std::string> output_names;  // N_y
  // total[k][j]: total-effect index of parameter k on output j.
  std::vector<std::vector<double>> total;
  std::vector<std::vector<double>> ci_half;  // bootstrap half-widths
  std::vector<bool> degenerate;              // per output: ~zero variance
  int n_base = 0;
  std::uint64_t seed = 0;
  std::string box_fingerprint;
  long n_evals = 0;
  long n_failures = 0;

  friend bool operator==(const SensitivityResult&,
                         const SensitivityResult&) = default;
};

/// Jansen total-effect estimator on a Saltelli design. `values[r][j]` holds
/// output j of design row r; rows with any non-finite entry are dropped
/// (the whole base index n is discarded for consistency). Both radial sides
/// (A vs AB_k and B vs BA_k) are averaged. Bootstrap confidence half-widths
/// use `bootstrap` resamples over the base index.
SensitivityResult total_sobol_from_values(
    const SaltelliDesign& design, const std::vector<std::vector<double>>& values,
    const std::vector<std::string>& output_names, int bootstrap = 100,
    std::uint64_t bootstrap_seed = 12345);

/// Full pipeline: sample the box, run the model on every row (jobs-way
/// parallel sweep), estimate totals for all raw outputs.
SensitivityResult total_sobol(const Hyperbox& box,
                              const ParameterSet& reference, int N,
                              std::uint64_t seed, int jobs = 0,
                              std::function<void(std::size_t, std::size_t)>
                                  progress = nullptr);

/// Parameters whose total index reaches `threshold` for at least one of the
/// outputs in `outputs_subset` (ids into the canonical calibratable order).
std::vector<int> select_parameters(const SensitivityResult& s,
                                   double threshold,
                                   const std::vector<std::string>& outputs_subset);

}  // namespace cardio
