#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace h4g {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  /// Throws UsageError unless values.size() == rows * cols.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// out = M x
void matvec(const Matrix& m, std::span<const double> x, std::span<double> out);
/// out += M^T g
void matvec_transposed_add(const Matrix& m, std::span<const double> g, std::span<double> out);
/// M += a b^T
void outer_add(std::span<const double> a, std::span<const double> b, Matrix& m);

double norm(std::span<const double> x);
bool all_finite(std::span<const double> x) noexcept;

/// Squared Frobenius norm of (M - I); M must be square.
double squared_distance_to_identity(const Matrix& m);

/// Singular values of a square matrix, descending, by one-sided Jacobi.
std::vector<double> singular_values(const Matrix& m);

}  // namespace h4g
