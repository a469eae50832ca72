#pragma once

#include <cstdint>
#include <vector>

#include "cardio/hyperbox.hpp"

namespace cardio {

/// Gray-code Sobol low-discrepancy sequence (up to 64 dimensions, 32 bits).
/// The all-zero first point of the raw sequence is skipped. A nonzero seed
/// applies a per-dimension digital shift (XOR scramble), which preserves the
/// low-discrepancy structure while decorrelating replicate designs.
class SobolSequence {
 public:
  explicit SobolSequence(int dim, std::uint64_t seed = 0);

  int dim() const { return dim_; }

  /// Next point in [0,1)^dim.
  void next(double* out);
  std::vector<double> next();

 private:
  int dim_;
  std::uint64_t index_ = 0;  // points generated so far (raw index)
  std::vector<std::uint32_t> x_;
  std::vector<std::uint32_t> shift_;
};

/// Saltelli design over the box: blocks A, B (N rows each), then for every
/// parameter k the radial blocks AB_k (A with column k from B) and BA_k.
/// Matrix layout is row-major with row count 2N(N_p + 1).
struct SaltelliDesign {
  int n_base = 0;
  int n_params = 0;
  std::vector<std::vector<double>> rows;

  std::size_t idx_A(int n) const { return n; }
  std::size_t idx_B(int n) const { return n_base + n; }
  std::size_t idx_AB(int k, int n) const {
    return static_cast<std::size_t>(2 + 2 * k) * n_base + n;
  }
  std::size_t idx_BA(int k, int n) const {
    return static_cast<std::size_t>(3 + 2 * k) * n_base + n;
  }
};

SaltelliDesign saltelli_sample(const Hyperbox& box, int N,
                               std::uint64_t seed = 0);

}  // namespace cardio
