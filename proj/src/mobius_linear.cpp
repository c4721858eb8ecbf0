#include "h4g/mobius_linear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "h4g/errors.hpp"
#include "h4g/kernels.hpp"
#include "h4g/rng.hpp"

namespace h4g {

BlockDiagScaling::BlockDiagScaling(std::vector<Matrix> blocks) : blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw UsageError("block-diagonal scaling needs at least one block");
  const std::size_t n = blocks_.front().rows();
  if (n == 0) throw UsageError("block size must be positive");
  for (const Matrix& b : blocks_) {
    if (b.rows() != n || b.cols() != n) {
      throw UsageError("every scaling block must be " + std::to_string(n) + "x" + std::to_string(n));
    }
    if (!all_finite(b.values())) throw UsageError("scaling block has non-finite entries");
  }
}

BlockDiagScaling BlockDiagScaling::identity(std::size_t block_count, std::size_t block_size) {
  if (block_count == 0 || block_size == 0) throw UsageError("K and n must be at least 1");
  return BlockDiagScaling(std::vector<Matrix>(block_count, Matrix::identity(block_size)));
}

Matrix BlockDiagScaling::dense() const {
  const std::size_t n = block_size();
  Matrix m(dimension(), dimension());
  for (std::size_t k = 0; k < block_count(); ++k) {
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) m(k * n + r, k * n + c) = blocks_[k](r, c);
    }
  }
  return m;
}

namespace {

// Shared tail of the Mobius mat-vec: given x and the Euclidean product Mx,
// write the norm-corrected result.
void correct_norm(std::span<const double> x, std::span<const double> product, double c,
                  std::span<double> out) {
  const double xn = norm(x);
  const double pn = norm(product);
  if (xn < kZeroNorm || pn < kZeroNorm) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const double sqrt_c = std::sqrt(c);
  const double a = std::atanh(std::min(sqrt_c * xn, 1.0 - kBallEps));
  const double t = std::min(std::tanh(pn / xn * a), 1.0 - kBallEps);
  const double f = t / (sqrt_c * pn);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f * product[i];
}

}  // namespace

PoincarePoint mobius_matvec(const Matrix& m, const PoincarePoint& x) {
  if (m.rows() != x.dimension() || m.cols() != x.dimension()) {
    throw UsageError("mobius_matvec: matrix is " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()) + " but point has dimension " +
                     std::to_string(x.dimension()));
  }
  std::vector<double> product(x.dimension());
  matvec(m, x.coords(), product);
  std::vector<double> out(x.dimension());
  correct_norm(x.coords(), product, x.curvature().value(), out);
  return project_to_ball(out, x.curvature());
}

PoincarePoint apply_block_scaling(const BlockDiagScaling& s, const PoincarePoint& x) {
  if (s.dimension() != x.dimension()) {
    throw UsageError("apply_block_scaling: scaling has dimension " + std::to_string(s.dimension()) +
                     " but point has dimension " + std::to_string(x.dimension()));
  }
  std::vector<double> out(x.dimension());
  ball::MatvecCache cache;
  ball::block_matvec(s.blocks(), x.coords(), x.curvature().value(), out, cache);
  return project_to_ball(out, x.curvature());
}

BlockDiagScaling init_near_identity(std::size_t block_count, std::size_t block_size, double sigma,
                                    std::uint64_t seed) {
  if (block_count == 0 || block_size == 0) throw UsageError("K and n must be at least 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw UsageError("sigma must be finite and >= 0");
  Rng rng(seed);
  std::vector<Matrix> blocks;
  blocks.reserve(block_count);
  for (std::size_t k = 0; k < block_count; ++k) {
    Matrix b = Matrix::identity(block_size);
    for (double& v : b.values()) v += sigma * rng.normal();
    blocks.push_back(std::move(b));
  }
  return BlockDiagScaling(std::move(blocks));
}

ScalingStats scaling_stats(const BlockDiagScaling& s) {
  ScalingStats stats;
  stats.min_singular_value = std::numeric_limits<double>::infinity();
  stats.max_singular_value = 0.0;
  double total = 0.0;
  double frob = 0.0;
  std::size_t count = 0;
  for (const Matrix& b : s.blocks()) {
    for (double sv : singular_values(b)) {
      total += sv;
      stats.min_singular_value = std::min(stats.min_singular_value, sv);
      stats.max_singular_value = std::max(stats.max_singular_value, sv);
      ++count;
    }
    frob += squared_distance_to_identity(b);
  }
  stats.mean_singular_value = total / static_cast<double>(count);
  stats.frobenius_dist_to_identity = std::sqrt(frob);
  return stats;
}

namespace ball {

void block_matvec(std::span<const Matrix> blocks, std::span<const double> x, double c,
                  std::span<double> out, MatvecCache& cache) {
  const std::size_t n = blocks.front().rows();
  cache.product.assign(x.size(), 0.0);
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    matvec(blocks[k], x.subspan(k * n, n), std::span<double>(cache.product).subspan(k * n, n));
  }
  correct_norm(x, cache.product, c, out);
}

void block_matvec_backward(std::span<const Matrix> blocks, std::span<const double> x, double c,
                           const MatvecCache& cache, std::span<const double> grad_out,
                           std::span<double> grad_x, std::span<Matrix> grad_blocks) {
  const std::size_t n = blocks.front().rows();
  const std::size_t d = x.size();
  const std::span<const double> y = cache.product;
  const double xn = norm(x);
  const double yn = norm(y);
  std::vector<double> grad_y(d, 0.0);

  if (xn < kZeroNorm) {
    // Near the origin M (x) x ~ Mx: pass the gradient through M^T only.
    grad_y.assign(grad_out.begin(), grad_out.end());
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      matvec_transposed_add(blocks[k], std::span<const double>(grad_y).subspan(k * n, n),
                            grad_x.subspan(k * n, n));
    }
    return;
  }
  if (yn < kZeroNorm) return;

  const double sqrt_c = std::sqrt(c);
  const double sx = sqrt_c * xn;
  const bool a_clamped = sx > 1.0 - kBallEps;
  const double a = std::atanh(a_clamped ? 1.0 - kBallEps : sx);
  const double u = yn / xn * a;
  const double raw_t = std::tanh(u);
  const bool t_clamped = raw_t > 1.0 - kBallEps;
  const double t = t_clamped ? 1.0 - kBallEps : raw_t;

  // out = (t / (sqrt_c |y|)) y
  const double f = t / (sqrt_c * yn);
  const double gy_dot = kernels::dot(grad_out, y);
  for (std::size_t i = 0; i < d; ++i) grad_y[i] = f * grad_out[i];
  const double g_t = gy_dot / (sqrt_c * yn);
  double g_yn = -t * gy_dot / (sqrt_c * yn * yn);

  const double g_u = t_clamped ? 0.0 : g_t * (1.0 - t) * (1.0 + t);
  g_yn += g_u * a / xn;
  const double g_a = g_u * yn / xn;
  double g_xn = -g_u * yn * a / (xn * xn);
  if (!a_clamped) g_xn += g_a * sqrt_c / ((1.0 - sx) * (1.0 + sx));

  kernels::axpy(g_yn / yn, y, grad_y);
  kernels::axpy(g_xn / xn, x, grad_x);

  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const auto gy_k = std::span<const double>(grad_y).subspan(k * n, n);
    outer_add(gy_k, x.subspan(k * n, n), grad_blocks[k]);
    matvec_transposed_add(blocks[k], gy_k, grad_x.subspan(k * n, n));
  }
}

}  // namespace ball

}  // namespace h4g
