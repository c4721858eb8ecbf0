#include <immintrin.h>

#include "h4g/kernels.hpp"

namespace h4g::kernels {
namespace {

// Lane k of the vector accumulator holds exactly the scalar kernel's lane k.
double finish(__m256d acc, const double* a, const double* b, std::size_t i, std::size_t n,
              bool diff) {
  alignas(32) double lane[4];
  _mm256_store_pd(lane, acc);
  for (; i < n; ++i) {
    const double t = diff ? a[i] - b[i] : a[i];
    lane[i % 4] += diff ? t * t : t * b[i];
  }
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  return finish(acc, a, b, i, n, false);
}

double squared_distance_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  return finish(acc, a, b, i, n, true);
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

constexpr Table kAvx2{Isa::avx2, dot_avx2, squared_distance_avx2, axpy_avx2};

}  // namespace

namespace detail {
const Table& avx2_kernels() noexcept { return kAvx2; }
}  // namespace detail

}  // namespace h4g::kernels
