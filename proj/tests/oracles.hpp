#pragma once

// Test-only reference implementations.  Nothing here calls into the library's
// geometry code: formulas are evaluated in 50-digit binary floating point
// straight from their textbook definitions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "h4g/linalg.hpp"
#include "h4g/rng.hpp"

namespace oracle {

using HP = boost::multiprecision::cpp_bin_float_50;
using HVec = std::vector<HP>;

inline HVec widen(std::span<const double> x) { return HVec(x.begin(), x.end()); }

inline std::vector<double> narrow(const HVec& x) {
  std::vector<double> out;
  out.reserve(x.size());
  for (const HP& v : x) out.push_back(static_cast<double>(v));
  return out;
}

inline HP dot(const HVec& a, const HVec& b) {
  HP s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline HP norm(const HVec& a) { return boost::multiprecision::sqrt(dot(a, a)); }

inline HP artanh(const HP& x) { return boost::multiprecision::log((1 + x) / (1 - x)) / 2; }

inline HVec mobius_add(const HVec& x, const HVec& y, const HP& c) {
  const HP xy = dot(x, y), xx = dot(x, x), yy = dot(y, y);
  const HP a = 1 + 2 * c * xy + c * yy;
  const HP b = 1 - c * xx;
  const HP den = 1 + 2 * c * xy + c * c * xx * yy;
  HVec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (a * x[i] + b * y[i]) / den;
  return out;
}

inline HVec negate(HVec x) {
  for (HP& v : x) v = -v;
  return x;
}

/// (2 / sqrt c) artanh(sqrt c |(-x) (+) y|), through explicit Mobius addition.
inline HP distance(const HVec& x, const HVec& y, const HP& c) {
  const HP sc = boost::multiprecision::sqrt(c);
  return 2 / sc * artanh(sc * norm(mobius_add(negate(x), y, c)));
}

inline HVec exp0(const HVec& v, const HP& c) {
  const HP sc = boost::multiprecision::sqrt(c);
  const HP n = norm(v);
  HVec out(v.size(), HP(0));
  if (n == 0) return out;
  const HP f = boost::multiprecision::tanh(sc * n) / (sc * n);
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = f * v[i];
  return out;
}

/// Dense Mobius mat-vec.
inline HVec matvec(const h4g::Matrix& m, const HVec& x, const HP& c) {
  HVec mx(m.rows(), HP(0));
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t k = 0; k < m.cols(); ++k) mx[r] += HP(m(r, k)) * x[k];
  const HP nx = norm(x), nmx = norm(mx);
  if (nx == 0 || nmx == 0) return HVec(m.rows(), HP(0));
  const HP sc = boost::multiprecision::sqrt(c);
  const HP t = boost::multiprecision::tanh(nmx / nx * artanh(sc * nx));
  for (HP& v : mx) v = t * v / (sc * nmx);
  return mx;
}

/// Singular values of [[a, b], [c, d]], descending, from the closed form.
inline std::pair<double, double> svd2(double a, double b, double c, double d) {
  const double s = a * a + b * b + c * c + d * d;
  const double det = a * d - b * c;
  const double disc = std::sqrt(std::max(0.0, s * s - 4.0 * det * det));
  return {std::sqrt((s + disc) / 2.0), std::sqrt(std::max(0.0, (s - disc) / 2.0))};
}

inline std::vector<double> gaussian_vector(h4g::Rng& rng, std::size_t d, double scale = 1.0) {
  std::vector<double> v(d);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

/// Point with hyperbolic radius uniform in [0, max_radius] and uniform direction.
inline std::vector<double> random_point(h4g::Rng& rng, std::size_t d, double c, double max_radius) {
  std::vector<double> v = gaussian_vector(rng, d);
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  const double r = rng.uniform() * max_radius;
  const double sc = std::sqrt(c);
  // Radii past the clamp land just inside it.
  const double target = std::min(std::tanh(sc * r / 2.0), 1.0 - 2e-5) / sc;
  for (double& x : v) x *= target / n;
  return v;
}

/// Orthogonal matrix from the QR factorisation of a Gaussian matrix.
inline Eigen::MatrixXd random_rotation(h4g::Rng& rng, std::size_t d) {
  Eigen::MatrixXd g(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  return qr.householderQ();
}

inline std::vector<double> rotate(const Eigen::MatrixXd& q, std::span<const double> x) {
  Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  Eigen::VectorXd r = q * v;
  return {r.data(), r.data() + r.size()};
}

}  // namespace oracle
