#include "cardio/sobol.hpp"

#include <bit>
#include <random>
#include <stdexcept>

#include "cardio/sobol_directions.hpp"

namespace cardio {

SobolSequence::SobolSequence(int dim, std::uint64_t seed) : dim_(dim) {
  if (dim < 1 || dim > detail::kSobolMaxDim)
    throw std::invalid_argument("SobolSequence: dimension out of range");
  x_.assign(dim, 0);
  shift_.assign(dim, 0);
  if (seed != 0) {
    std::mt19937_64 rng(seed);
    for (int d = 0; d < dim_; ++d)
      shift_[d] = static_cast<std::uint32_t>(rng());
  }
  // Advance once: the raw sequence starts at the origin, which is a
  // degenerate sample for a box sweep.
  index_ = 1;
  for (int d = 0; d < dim_; ++d) x_[d] ^= detail::kSobolDirections[d][0];
}

void SobolSequence::next(double* out) {
  constexpr double scale = 1.0 / 4294967296.0;  // 2^-32
  for (int d = 0; d < dim_; ++d)
    out[d] = (x_[d] ^ shift_[d]) * scale;
  // Gray-code update for the following point.
  const int c = std::countr_zero(index_ + 1);
  for (int d = 0; d < dim_; ++d) x_[d] ^= detail::kSobolDirections[d][c];
  ++index_;
}

std::vector<double> SobolSequence::next() {
  std::vector<double> p(dim_);
  next(p.data());
  return p;
}

SaltelliDesign saltelli_sample(const Hyperbox& box, int N,
                               std::uint64_t seed) {
  const int np = static_cast<int>(box.lo.size());
  if (N < 1) throw std::invalid_argument("saltelli_sample: N must be >= 1");

  SaltelliDesign d;
  d.n_base = N;
  d.n_params = np;
  d.rows.assign(static_cast<std::size_t>(2 * N) * (np + 1),
                std::vector<double>(np));

  SobolSequence seq(2 * np, seed);
  std::vector<double> u(2 * np);
  std::vector<double> a(np), b(np);
  for (int n = 0; n < N; ++n) {
    seq.next(u.data());
    for (int k = 0; k < np; ++k) {
      a[k] = box.lo[k] + (box.hi[k] - box.lo[k]) * u[k];
      b[k] = box.lo[k] + (box.hi[k] - box.lo[k]) * u[np + k];
    }
    d.rows[d.idx_A(n)] = a;
    d.rows[d.idx_B(n)] = b;
    for (int k = 0; k < np; ++k) {
      auto& ab = d.rows[d.idx_AB(k, n)];
      auto& ba = d.rows[d.idx_BA(k, n)];
      ab = a;
      ab[k] = b[k];
      ba = b;
      ba[k] = a[k];
    }
  }
  return d;
}

}  // namespace cardio
