#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"

#include "h4g/errors.hpp"
#include "h4g/mobius_linear.hpp"

using namespace h4g;
using doctest::Approx;

namespace {

const Curvature kC1(1.0);

Matrix random_matrix(Rng& rng, std::size_t n, double lo, double hi) {
  Matrix m(n, n);
  for (double& v : m.values()) v = lo + (hi - lo) * rng.uniform();
  return m;
}

double dot_product_cosine(std::span<const double> a, std::span<const double> b) {
  double ab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) ab += a[i] * b[i];
  return ab / (norm(a) * norm(b));
}

Matrix scaled_identity(std::size_t n, double a) {
  Matrix m = Matrix::identity(n);
  for (double& v : m.values()) v *= a;
  return m;
}

}  // namespace

TEST_CASE("block scaling construction") {
  CHECK_THROWS_AS(BlockDiagScaling({}), UsageError);
  CHECK_THROWS_AS(BlockDiagScaling({Matrix(2, 3)}), UsageError);
  CHECK_THROWS_AS(BlockDiagScaling({Matrix::identity(2), Matrix::identity(3)}), UsageError);
  Matrix bad = Matrix::identity(2);
  bad(0, 1) = std::nan("");
  CHECK_THROWS_AS(BlockDiagScaling({bad}), UsageError);
  const auto s = BlockDiagScaling::identity(3, 4);
  CHECK(s.dimension() == 12);
  CHECK(s.dense() == Matrix::identity(12));
}

TEST_CASE("mobius mat-vec special cases") {
  const auto x = PoincarePoint({0.3, -0.2, 0.5}, kC1);
  const auto y = mobius_matvec(Matrix::identity(3), x);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(y.coords()[i] - x.coords()[i]) <= 1e-12);
  const auto o = PoincarePoint::origin(3, kC1);
  Rng rng(1);
  CHECK(mobius_matvec(random_matrix(rng, 3, -1, 1), o) == o);
  CHECK(mobius_matvec(Matrix(3, 3, 0.0), x) == o);
  CHECK_THROWS_AS(mobius_matvec(Matrix::identity(2), x), UsageError);

  // Halving the scalar halves artanh(|x|): (tanh 1, 0) -> (tanh 0.5, 0).
  const auto h = mobius_matvec(scaled_identity(2, 0.5), PoincarePoint({std::tanh(1.0), 0.0}, kC1));
  CHECK(h.coords()[0] == Approx(0.46211715726000976).epsilon(1e-14));
  CHECK(h.coords()[1] == 0.0);
  CHECK(radius(h) == Approx(1.0).epsilon(1e-13));
}

TEST_CASE("mobius mat-vec agrees with the high-precision oracle") {
  Rng rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const double c = 0.25 + 2.0 * rng.uniform();
    const std::size_t d = 1 + rng.index(6);
    const Matrix m = random_matrix(rng, d, -2.0, 2.0);
    const auto x = oracle::random_point(rng, d, c, 5.0);
    const auto out = mobius_matvec(m, PoincarePoint(x, Curvature(c)));
    const auto ref = oracle::narrow(oracle::matvec(m, oracle::widen(x), c));
    const double r = std::sqrt(c) * norm(ref);
    if (r > 1.0 - kBallEps) continue;  // the library clamps; the oracle does not
    for (std::size_t i = 0; i < d; ++i) CHECK(std::abs(out.coords()[i] - ref[i]) <= 1e-12);
  }
}

TEST_CASE("block application equals the dense expansion") {
  Rng rng(22);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Matrix> blocks{random_matrix(rng, 4, -1.5, 1.5), random_matrix(rng, 4, -1.5, 1.5)};
    const BlockDiagScaling s(blocks);
    const auto x = PoincarePoint(oracle::random_point(rng, 8, 1.0, 6.0), kC1);
    const auto a = apply_block_scaling(s, x);
    const auto b = mobius_matvec(s.dense(), x);
    for (std::size_t i = 0; i < 8; ++i) CHECK(std::abs(a.coords()[i] - b.coords()[i]) <= 1e-12);
  }
  CHECK_THROWS_AS(apply_block_scaling(BlockDiagScaling::identity(2, 2), PoincarePoint::origin(3, kC1)),
                  UsageError);
}

TEST_CASE("identity blocks leave points unchanged") {
  Rng rng(23);
  const auto s = BlockDiagScaling::identity(2, 4);
  for (int trial = 0; trial < 200; ++trial) {
    const auto x = PoincarePoint(oracle::random_point(rng, 8, 1.0, 9.0), kC1);
    const auto y = apply_block_scaling(s, x);
    for (std::size_t i = 0; i < 8; ++i) CHECK(std::abs(y.coords()[i] - x.coords()[i]) <= 1e-12);
  }
}

TEST_CASE("direction law, scalar contraction and ball closure") {
  Rng rng(24);
  for (int trial = 0; trial < 500; ++trial) {
    const double c = 0.5 + rng.uniform();
    const Curvature cv(c);
    const std::size_t d = 2 + rng.index(6);
    const auto x = PoincarePoint(oracle::random_point(rng, d, c, 6.0), cv);
    if (x.norm() < 1e-6) continue;

    const Matrix m = random_matrix(rng, d, -10.0, 10.0);
    const auto y = mobius_matvec(m, x);
    CHECK(y.norm() <= cv.max_norm() * (1.0 + 1e-15));
    std::vector<double> mx(d);
    matvec(m, x.coords(), mx);
    const double cosine = dot_product_cosine(mx, y.coords());
    CHECK(cosine >= 1.0 - 1e-12);

    const double alpha = 0.05 + 0.9 * rng.uniform();
    const auto z = mobius_matvec(scaled_identity(d, alpha), x);
    const double sc = cv.sqrt_c();
    CHECK(std::atanh(sc * z.norm()) == Approx(alpha * std::atanh(sc * x.norm())).epsilon(1e-10));
    CHECK(radius(z) < radius(x));
  }
}

TEST_CASE("half-identity blocks reduce every radius") {
  Rng rng(25);
  const BlockDiagScaling s({scaled_identity(4, 0.5), scaled_identity(4, 0.5)});
  for (int trial = 0; trial < 200; ++trial) {
    const auto x = PoincarePoint(oracle::random_point(rng, 8, 1.0, 9.0), kC1);
    if (x.norm() == 0.0) continue;
    CHECK(radius(apply_block_scaling(s, x)) < radius(x));
  }
}

TEST_CASE("near-identity initialisation") {
  CHECK(init_near_identity(3, 4, 0.0, 9) == BlockDiagScaling::identity(3, 4));
  CHECK(init_near_identity(2, 8, 0.01, 5) == init_near_identity(2, 8, 0.01, 5));
  CHECK_FALSE(init_near_identity(2, 8, 0.01, 5) == init_near_identity(2, 8, 0.01, 6));
}

TEST_CASE("initialisation noise has the requested scale") {
  // |E|_F / sigma is chi-distributed with n^2 degrees of freedom.
  auto check = [](std::size_t n, double sigma) {
    const double k = static_cast<double>(n * n);
    const double chi_mean = std::sqrt(2.0) * std::exp(std::lgamma((k + 1) / 2) - std::lgamma(k / 2));
    double sum = 0.0, sum_sq = 0.0;
    std::size_t count = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      const auto s = init_near_identity(2, n, sigma, seed);
      for (const Matrix& b : s.blocks()) {
        const double f = std::sqrt(squared_distance_to_identity(b));
        sum += f;
        sum_sq += f * f;
        ++count;
      }
    }
    const double mean = sum / count;
    const double se = std::sqrt((sum_sq / count - mean * mean) / count);
    CHECK(std::abs(mean - sigma * chi_mean) <= 3.0 * se);
    return mean;
  };
  check(4, 0.01);
  const double m32 = check(32, 0.01);
  CHECK(m32 == Approx(0.01 * 32).epsilon(0.01));
}

TEST_CASE("scaling statistics") {
  const auto id = scaling_stats(BlockDiagScaling::identity(2, 3));
  CHECK(id.mean_singular_value == Approx(1.0).epsilon(1e-14));
  CHECK(id.frobenius_dist_to_identity == 0.0);
  const auto half = scaling_stats(BlockDiagScaling({scaled_identity(3, 0.5), scaled_identity(3, 0.5)}));
  CHECK(half.mean_singular_value == Approx(0.5).epsilon(1e-14));
  CHECK(half.min_singular_value == Approx(0.5).epsilon(1e-14));
  CHECK(half.frobenius_dist_to_identity == Approx(std::sqrt(6 * 0.25)).epsilon(1e-14));

  Rng rng(26);
  for (int trial = 0; trial < 500; ++trial) {
    Matrix m = random_matrix(rng, 2, -3.0, 3.0);
    const auto [s1, s2] = oracle::svd2(m(0, 0), m(0, 1), m(1, 0), m(1, 1));
    const auto sv = singular_values(m);
    REQUIRE(sv.size() == 2);
    CHECK(std::abs(sv[0] - s1) <= 1e-10);
    CHECK(std::abs(sv[1] - s2) <= 1e-10);
    const auto st = scaling_stats(BlockDiagScaling({m}));
    CHECK(std::abs(st.mean_singular_value - (s1 + s2) / 2) <= 1e-10);
    CHECK(std::abs(st.max_singular_value - s1) <= 1e-10);
    CHECK(std::abs(st.min_singular_value - s2) <= 1e-10);
  }
}

TEST_CASE("singular values of larger blocks match Eigen") {
  Rng rng(27);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 3 + rng.index(30);
    Matrix m = random_matrix(rng, n, -1.0, 1.0);
    Eigen::MatrixXd e(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) e(i, j) = m(i, j);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(e);
    const auto sv = singular_values(m);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(sv[i] - svd.singularValues()(i)) <= 1e-10);
  }
}
