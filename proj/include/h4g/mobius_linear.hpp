#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "h4g/linalg.hpp"
#include "h4g/poincare.hpp"

namespace h4g {

/// K square n x n blocks placed along the diagonal of a (K n) x (K n) matrix.
/// Values are immutable; training replaces whole scalings.
class BlockDiagScaling {
 public:
  /// Throws UsageError if blocks is empty, blocks differ in size, a block is
  /// not square, or an entry is non-finite.
  explicit BlockDiagScaling(std::vector<Matrix> blocks);

  static BlockDiagScaling identity(std::size_t block_count, std::size_t block_size);

  std::size_t block_count() const noexcept { return blocks_.size(); }
  std::size_t block_size() const noexcept { return blocks_.front().rows(); }
  std::size_t dimension() const noexcept { return block_count() * block_size(); }
  const std::vector<Matrix>& blocks() const noexcept { return blocks_; }
  const Matrix& block(std::size_t k) const { return blocks_.at(k); }

  /// The full block-diagonal matrix.  Intended for tests and diagnostics.
  Matrix dense() const;

  bool operator==(const BlockDiagScaling&) const = default;

 private:
  std::vector<Matrix> blocks_;
};

/// M (x)_c x = tanh(|Mx| / |x| artanh(sqrt c |x|)) Mx / (sqrt c |Mx|).
/// The origin maps to the origin, as does any x with Mx = 0.
PoincarePoint mobius_matvec(const Matrix& m, const PoincarePoint& x);

/// Equivalent to mobius_matvec(s.dense(), x) without materialising the
/// dense matrix.
PoincarePoint apply_block_scaling(const BlockDiagScaling& s, const PoincarePoint& x);

/// Each block I_n + E with E_ij ~ N(0, sigma^2), drawn from a generator seeded
/// with `seed` in block-major, row-major order.
BlockDiagScaling init_near_identity(std::size_t block_count, std::size_t block_size, double sigma,
                                    std::uint64_t seed);

struct ScalingStats {
  double mean_singular_value = 0.0;
  double min_singular_value = 0.0;
  double max_singular_value = 0.0;
  /// sqrt(sum_k |S_k - I|_F^2)
  double frobenius_dist_to_identity = 0.0;
};

ScalingStats scaling_stats(const BlockDiagScaling& s);

namespace ball {

/// Scratch state kept between the forward and backward Mobius mat-vec.
struct MatvecCache {
  std::vector<double> product;  // Mx before the norm correction
};

/// out = S (x)_c x for block-diagonal S given as blocks.  Fills `cache`.
void block_matvec(std::span<const Matrix> blocks, std::span<const double> x, double c,
                  std::span<double> out, MatvecCache& cache);

/// Accumulates dL/dx into grad_x and dL/dS_k into grad_blocks[k].
void block_matvec_backward(std::span<const Matrix> blocks, std::span<const double> x, double c,
                           const MatvecCache& cache, std::span<const double> grad_out,
                           std::span<double> grad_x, std::span<Matrix> grad_blocks);

}  // namespace ball

}  // namespace h4g
