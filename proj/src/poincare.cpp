#include "h4g/poincare.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "h4g/errors.hpp"
#include "h4g/kernels.hpp"

namespace h4g {

namespace {

void require_same_space(const PoincarePoint& x, const PoincarePoint& y, const char* op) {
  if (x.dimension() != y.dimension()) {
    throw UsageError(std::string(op) + ": dimension mismatch (" + std::to_string(x.dimension()) +
                     " vs " + std::to_string(y.dimension()) + ")");
  }
  if (!(x.curvature() == y.curvature())) {
    throw UsageError(std::string(op) + ": curvature mismatch");
  }
}

// artanh(s) given 1 - s^2 computed without cancellation:
// artanh(s) = log1p(2s / (1 - s)) / 2 and 1 - s = (1 - s^2) / (1 + s).
double artanh_from_complement(double s, double one_minus_s2) {
  return 0.5 * std::log1p(2.0 * s * (1.0 + s) / one_minus_s2);
}

// 1 - 2c<x,y> + c^2|x|^2|y|^2 written as c|x - y|^2 + (1 - c|x|^2)(1 - c|y|^2),
// a sum of nonnegative terms, so nearby points at the boundary do not cancel.
double gyro_denominator(double q, double xx, double yy, double c) {
  return c * q + (1.0 - c * xx) * (1.0 - c * yy);
}

}  // namespace

Curvature::Curvature(double c) : c_(c), sqrt_c_(std::sqrt(c)) {
  if (!std::isfinite(c) || !(c > 0.0)) {
    throw UsageError("curvature magnitude must be finite and positive, got " + std::to_string(c));
  }
}

TangentVector::TangentVector(std::vector<double> coords) : coords_(std::move(coords)) {
  if (!all_finite(coords_)) throw UsageError("tangent vector has non-finite entries");
}

PoincarePoint::PoincarePoint(std::vector<double> coords, Curvature c)
    : coords_(std::move(coords)), c_(c) {
  if (!all_finite(coords_)) throw UsageError("point has non-finite entries");
  // Clamped points may exceed the bound by a few ulps of rounding.
  if (c_.sqrt_c() * h4g::norm(coords_) > (1.0 - kBallEps) * (1.0 + 1e-14)) {
    throw UsageError("point lies outside the clamped Poincare ball");
  }
}

PoincarePoint PoincarePoint::origin(std::size_t dimension, Curvature c) {
  return PoincarePoint(Unchecked{}, std::vector<double>(dimension, 0.0), c);
}

double PoincarePoint::norm() const { return h4g::norm(coords_); }

PoincarePoint project_to_ball(std::span<const double> raw, Curvature c) {
  if (!all_finite(raw)) throw UsageError("project_to_ball: non-finite input");
  std::vector<double> coords(raw.begin(), raw.end());
  ball::clamp(coords, c.value());
  return PoincarePoint(PoincarePoint::Unchecked{}, std::move(coords), c);
}

PoincarePoint mobius_add(const PoincarePoint& x, const PoincarePoint& y) {
  require_same_space(x, y, "mobius_add");
  std::vector<double> out(x.dimension());
  ball::mobius_add(x.coords(), y.coords(), x.curvature().value(), out);
  return project_to_ball(out, x.curvature());
}

PoincarePoint mobius_neg(const PoincarePoint& x) {
  std::vector<double> out(x.coords().begin(), x.coords().end());
  for (double& v : out) v = -v;
  return project_to_ball(out, x.curvature());
}

double distance(const PoincarePoint& x, const PoincarePoint& y) {
  require_same_space(x, y, "distance");
  return ball::distance(x.coords(), y.coords(), x.curvature().value());
}

double radius(const PoincarePoint& x) { return ball::radius(x.coords(), x.curvature().value()); }

PoincarePoint exp_map_origin(const TangentVector& v, Curvature c) {
  std::vector<double> out(v.dimension());
  ball::exp_map(v.coords(), c.value(), out);
  return project_to_ball(out, c);
}

TangentVector log_map_origin(const PoincarePoint& x, bool* saturated) {
  const double sqrt_c = x.curvature().sqrt_c();
  const double n = x.norm();
  if (saturated != nullptr) *saturated = sqrt_c * n >= (1.0 - kBallEps) * (1.0 - 1e-12);
  std::vector<double> out(x.dimension());
  ball::log_map(x.coords(), x.curvature().value(), out);
  return TangentVector(std::move(out));
}

namespace ball {

bool clamp(std::span<double> x, double c) {
  const double sqrt_c = std::sqrt(c);
  const double n = norm(x);
  const double limit = (1.0 - kBallEps) / sqrt_c;
  if (n <= limit) return false;
  const double s = limit / n;
  for (double& v : x) v *= s;
  return true;
}

void mobius_add(std::span<const double> x, std::span<const double> y, double c, std::span<double> out) {
  const double xy = kernels::dot(x, y);
  const double xx = kernels::squared_norm(x);
  const double yy = kernels::squared_norm(y);
  const double den = 1.0 + 2.0 * c * xy + c * c * xx * yy;
  if (!(std::abs(den) >= kDenominatorEps)) {
    throw DegenerateInputError("mobius_add: denominator below guard");
  }
  const double a = (1.0 + 2.0 * c * xy + c * yy) / den;
  const double b = (1.0 - c * xx) / den;
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = a * x[i] + b * y[i];
}

double gyro_distance_squared(std::span<const double> x, std::span<const double> y, double c) {
  const double q = kernels::squared_distance(x, y);
  return q / gyro_denominator(q, kernels::squared_norm(x), kernels::squared_norm(y), c);
}

double distance(std::span<const double> x, std::span<const double> y, double c) {
  if (x.size() != y.size()) throw UsageError("distance: dimension mismatch");
  const double q = kernels::squared_distance(x, y);
  if (q == 0.0) return 0.0;
  const double xx = kernels::squared_norm(x);
  const double yy = kernels::squared_norm(y);
  const double den = gyro_denominator(q, xx, yy, c);
  if (!(den >= kDenominatorEps)) throw DegenerateInputError("distance: denominator below guard");
  const double s = std::sqrt(c * q / den);
  const double complement = (1.0 - c * xx) * (1.0 - c * yy) / den;
  return 2.0 / std::sqrt(c) * artanh_from_complement(s, complement);
}

void distance_backward(std::span<const double> x, std::span<const double> y, double c, double grad,
                       std::span<double> grad_x, std::span<double> grad_y) {
  const double q = kernels::squared_distance(x, y);
  if (q == 0.0 || grad == 0.0) return;
  const double xx = kernels::squared_norm(x);
  const double yy = kernels::squared_norm(y);
  const double den = gyro_denominator(q, xx, yy, c);
  const double p = (1.0 - c * xx) * (1.0 - c * yy);
  // dd = sqrt(D/q) / P * (dq - (q/D) dD)
  const double k = grad * std::sqrt(den / q) / p;
  const double r = q / den;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double diff = x[i] - y[i];
    grad_x[i] += k * (2.0 * diff - r * (-2.0 * c * y[i] + 2.0 * c * c * yy * x[i]));
    grad_y[i] += k * (-2.0 * diff - r * (-2.0 * c * x[i] + 2.0 * c * c * xx * y[i]));
  }
}

double radius(std::span<const double> x, double c) {
  const double xx = kernels::squared_norm(x);
  if (xx == 0.0) return 0.0;
  const double s = std::sqrt(c * xx);
  return 2.0 / std::sqrt(c) * artanh_from_complement(s, 1.0 - c * xx);
}

void exp_map(std::span<const double> v, double c, std::span<double> out) {
  const double n = norm(v);
  if (n < kZeroNorm) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const double sqrt_c = std::sqrt(c);
  const double t = std::min(std::tanh(sqrt_c * n), 1.0 - kBallEps);
  const double f = t / (sqrt_c * n);
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = f * v[i];
}

void exp_map_backward(std::span<const double> v, double c, std::span<const double> grad_out,
                      std::span<double> grad_v) {
  const double n = norm(v);
  if (n < kZeroNorm) {
    // Forward returns the origin; the Jacobian's limit at zero is the identity.
    for (std::size_t i = 0; i < v.size(); ++i) grad_v[i] += grad_out[i];
    return;
  }
  const double sqrt_c = std::sqrt(c);
  const double raw = std::tanh(sqrt_c * n);
  const bool clamped = raw > 1.0 - kBallEps;
  const double t = clamped ? 1.0 - kBallEps : raw;
  const double dt = clamped ? 0.0 : sqrt_c * (1.0 - t) * (1.0 + t);
  const double f = t / (sqrt_c * n);
  const double df = dt / (sqrt_c * n) - t / (sqrt_c * n * n);
  const double radial = df * kernels::dot(grad_out, v) / n;
  for (std::size_t i = 0; i < v.size(); ++i) grad_v[i] += f * grad_out[i] + radial * v[i];
}

void log_map(std::span<const double> x, double c, std::span<double> out) {
  const double n = norm(x);
  if (n < kZeroNorm) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const double sqrt_c = std::sqrt(c);
  const double s = std::min(sqrt_c * n, 1.0 - kBallEps);
  const double f = std::atanh(s) / (sqrt_c * n);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = f * x[i];
}

}  // namespace ball

}  // namespace h4g
