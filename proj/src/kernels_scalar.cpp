#include "h4g/kernels.hpp"

namespace h4g::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) lane[i % 4] += a[i] * b[i];
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double squared_distance_scalar(const double* a, const double* b, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const double diff = a[i] - b[i];
    lane[i % 4] += diff * diff;
  }
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

constexpr Table kScalar{Isa::scalar, dot_scalar, squared_distance_scalar, axpy_scalar};

}  // namespace

const Table& scalar_table() noexcept { return kScalar; }

}  // namespace h4g::kernels
