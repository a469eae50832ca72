#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cardio/hyperbox.hpp"
#include "cardio/parameters.hpp"

namespace cardio {

/// Sample Pearson correlation coefficient. Throws std::invalid_argument for
/// fewer than two points or a zero-variance argument.
double pearson(std::span<const double> x, std::span<const double> y);

/// Parameter-output sample correlations over a uniform sweep of a hyperbox.
struct CorrelationMatrix {
  std::vector<std::string> param_names;   // N_p
  std::vector<std::string> output_names;  // N_y
  std::vector<std::vector<double>> M;     // N_p x N_y
  int n_samples = 0;
  std::uint64_t seed = 0;
  std::string box_fingerprint;
  bool covid = false;
  double HR = 0.0;

  int output_column(const std::string& name) const;

  friend bool operator==(const CorrelationMatrix&,
                         const CorrelationMatrix&) = default;
};

/// Uniform i.i.d. sampling of the box (n draws, default 100 per parameter),
/// one limit-cycle simulation per draw, column-wise Pearson against every
/// raw output. Failed simulations are dropped; more than 1% failures reject
/// the whole matrix.
CorrelationMatrix build_correlation_matrix(
    const ParameterSet& reference, const Hyperbox& box, int n,
    std::uint64_t seed, int jobs = 0,
    std::function<void(std::size_t, std::size_t)> progress = nullptr);

}  // namespace cardio
