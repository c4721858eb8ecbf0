#pragma once

// Curvature -c Poincare ball: points, tangent vectors at the origin, and the
// guarded primitives every other module builds on.  Two layers:
//
//  * typed API (Curvature / PoincarePoint / TangentVector) that validates
//    inputs and throws on misuse;
//  * `ball::` span kernels with matching reverse-mode rules, used by the
//    training loop where per-call allocation and validation would dominate.

#include <cstddef>
#include <span>
#include <vector>

#include "h4g/linalg.hpp"

namespace h4g {

/// Clamp margin: every point satisfies sqrt(c)|x| <= 1 - kBallEps.
inline constexpr double kBallEps = 1e-5;
/// Smallest admissible denominator magnitude in Mobius addition.
inline constexpr double kDenominatorEps = 1e-15;
/// Tolerance for "same point".
inline constexpr double kEqualityEps = 1e-12;
/// Below this norm, x / |x| is taken to be the zero vector.
inline constexpr double kZeroNorm = 1e-12;

class Curvature {
 public:
  /// Throws UsageError unless c is finite and positive.
  explicit Curvature(double c);

  double value() const noexcept { return c_; }
  double sqrt_c() const noexcept { return sqrt_c_; }
  /// 1 / sqrt(c), the (open) ball radius.
  double ball_radius() const noexcept { return 1.0 / sqrt_c_; }
  /// Largest Euclidean norm a point may have after clamping.
  double max_norm() const noexcept { return (1.0 - kBallEps) / sqrt_c_; }

  bool operator==(const Curvature&) const = default;

 private:
  double c_;
  double sqrt_c_;
};

class TangentVector {
 public:
  /// Throws UsageError on non-finite entries.
  explicit TangentVector(std::vector<double> coords);

  std::size_t dimension() const noexcept { return coords_.size(); }
  std::span<const double> coords() const noexcept { return coords_; }

  bool operator==(const TangentVector&) const = default;

 private:
  std::vector<double> coords_;
};

class PoincarePoint {
 public:
  /// Throws UsageError if coords are non-finite or sqrt(c)|coords| exceeds
  /// 1 - kBallEps (up to rounding).  Use project_to_ball to clamp instead.
  PoincarePoint(std::vector<double> coords, Curvature c);

  static PoincarePoint origin(std::size_t dimension, Curvature c);

  std::size_t dimension() const noexcept { return coords_.size(); }
  std::span<const double> coords() const noexcept { return coords_; }
  Curvature curvature() const noexcept { return c_; }
  double norm() const;

  bool operator==(const PoincarePoint&) const = default;

 private:
  struct Unchecked {};
  PoincarePoint(Unchecked, std::vector<double> coords, Curvature c)
      : coords_(std::move(coords)), c_(c) {}
  friend PoincarePoint project_to_ball(std::span<const double>, Curvature);

  std::vector<double> coords_;
  Curvature c_;
};

/// Gyrovector addition
///   x (+) y = ((1 + 2c<x,y> + c|y|^2) x + (1 - c|x|^2) y) / (1 + 2c<x,y> + c^2 |x|^2 |y|^2),
/// clamped back into the ball.  Throws UsageError on dimension or curvature
/// mismatch, DegenerateInputError if the denominator is below kDenominatorEps.
PoincarePoint mobius_add(const PoincarePoint& x, const PoincarePoint& y);

PoincarePoint mobius_neg(const PoincarePoint& x);

/// d(x, y) = (2 / sqrt c) artanh(sqrt c |(-x) (+) y|).
double distance(const PoincarePoint& x, const PoincarePoint& y);

/// Hyperbolic radius, distance to the origin.
double radius(const PoincarePoint& x);

/// exp_0(v) = tanh(sqrt c |v|) v / (sqrt c |v|); the origin for |v| < kZeroNorm.
PoincarePoint exp_map_origin(const TangentVector& v, Curvature c);

/// Inverse of exp_map_origin.  If x lies on the clamp boundary the norm used
/// is the clamped one and `*saturated` (when given) is set.
TangentVector log_map_origin(const PoincarePoint& x, bool* saturated = nullptr);

/// Returns raw unchanged when sqrt(c)|raw| <= 1 - kBallEps, otherwise
/// rescales it to norm (1 - kBallEps) / sqrt(c).  Throws on non-finite input.
PoincarePoint project_to_ball(std::span<const double> raw, Curvature c);

namespace ball {

// Span kernels.  Outputs must not alias inputs.  `*_backward` functions
// accumulate (+=) the vector-Jacobian product into the gradient spans.

/// In-place clamp; returns true if the vector was rescaled.
bool clamp(std::span<double> x, double c);

void mobius_add(std::span<const double> x, std::span<const double> y, double c, std::span<double> out);

/// Squared gyro-norm |(-x) (+) y|^2 via the symmetric identity
///   |x - y|^2 / (1 - 2c<x,y> + c^2 |x|^2 |y|^2).
double gyro_distance_squared(std::span<const double> x, std::span<const double> y, double c);

double distance(std::span<const double> x, std::span<const double> y, double c);
void distance_backward(std::span<const double> x, std::span<const double> y, double c, double grad,
                       std::span<double> grad_x, std::span<double> grad_y);

double radius(std::span<const double> x, double c);

void exp_map(std::span<const double> v, double c, std::span<double> out);
void exp_map_backward(std::span<const double> v, double c, std::span<const double> grad_out,
                      std::span<double> grad_v);

void log_map(std::span<const double> x, double c, std::span<double> out);

}  // namespace ball

}  // namespace h4g
