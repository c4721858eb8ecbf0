#include "h4g/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "h4g/errors.hpp"
#include "h4g/kernels.hpp"

namespace h4g {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != rows * cols) {
    throw UsageError("matrix of shape " + std::to_string(rows) + "x" + std::to_string(cols) +
                     " given " + std::to_string(data_.size()) + " values");
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void matvec(const Matrix& m, std::span<const double> x, std::span<double> out) {
  for (std::size_t r = 0; r < m.rows(); ++r) out[r] = kernels::dot(m.row(r), x);
}

void matvec_transposed_add(const Matrix& m, std::span<const double> g, std::span<double> out) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (g[r] != 0.0) kernels::axpy(g[r], m.row(r), out);
  }
}

void outer_add(std::span<const double> a, std::span<const double> b, Matrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (a[r] != 0.0) kernels::axpy(a[r], b, m.row(r));
  }
}

double norm(std::span<const double> x) { return std::sqrt(kernels::squared_norm(x)); }

bool all_finite(std::span<const double> x) noexcept {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

double squared_distance_to_identity(const Matrix& m) {
  double total = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const double e = m(r, c) - (r == c ? 1.0 : 0.0);
      total += e * e;
    }
  }
  return total;
}

std::vector<double> singular_values(const Matrix& m) {
  if (m.rows() != m.cols()) throw UsageError("singular_values expects a square matrix");
  const std::size_t n = m.rows();
  // Columns of A are rotated pairwise until mutually orthogonal; their norms
  // are then the singular values.
  std::vector<double> a(m.values().begin(), m.values().end());
  auto col = [&](std::size_t r, std::size_t c) -> double& { return a[r * n + c]; };
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          alpha += col(r, p) * col(r, p);
          beta += col(r, q) * col(r, q);
          gamma += col(r, p) * col(r, q);
        }
        if (gamma == 0.0) continue;
        const double scale = std::sqrt(alpha * beta);
        if (scale == 0.0) continue;
        off = std::max(off, std::abs(gamma) / scale);
        if (std::abs(gamma) <= 1e-15 * scale) continue;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = cs * t;
        for (std::size_t r = 0; r < n; ++r) {
          const double ap = col(r, p);
          const double aq = col(r, q);
          col(r, p) = cs * ap - sn * aq;
          col(r, q) = sn * ap + cs * aq;
        }
      }
    }
    if (off <= 1e-15) break;
  }
  std::vector<double> sv(n);
  for (std::size_t c = 0; c < n; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < n; ++r) s += col(r, c) * col(r, c);
    sv[c] = std::sqrt(s);
  }
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

}  // namespace h4g
