#include <arm_neon.h>

#include "h4g/kernels.hpp"

namespace h4g::kernels {
namespace {

// Two 2-lane registers emulate the four canonical lanes: lo = {0,1}, hi = {2,3}.
double finish(float64x2_t lo, float64x2_t hi, const double* a, const double* b, std::size_t i,
              std::size_t n, bool diff) {
  double lane[4];
  vst1q_f64(lane, lo);
  vst1q_f64(lane + 2, hi);
  for (; i < n; ++i) {
    const double t = diff ? a[i] - b[i] : a[i];
    lane[i % 4] += diff ? t * t : t * b[i];
  }
  return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t lo = vdupq_n_f64(0.0);
  float64x2_t hi = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    lo = vaddq_f64(lo, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    hi = vaddq_f64(hi, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
  }
  return finish(lo, hi, a, b, i, n, false);
}

double squared_distance_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t lo = vdupq_n_f64(0.0);
  float64x2_t hi = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float64x2_t d0 = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    const float64x2_t d1 = vsubq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    lo = vaddq_f64(lo, vmulq_f64(d0, d0));
    hi = vaddq_f64(hi, vmulq_f64(d1, d1));
  }
  return finish(lo, hi, a, b, i, n, true);
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

constexpr Table kNeon{Isa::neon, dot_neon, squared_distance_neon, axpy_neon};

}  // namespace

namespace detail {
const Table& neon_kernels() noexcept { return kNeon; }
}  // namespace detail

}  // namespace h4g::kernels
