#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"

#include "h4g/data.hpp"
#include "h4g/encoders.hpp"
#include "h4g/errors.hpp"

using namespace h4g;

namespace {

TextAttributedGraph path_graph(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return TextAttributedGraph(n, 1, edges, std::vector<Tokens>(n), {});
}

FeatureMatrix random_features(Rng& rng, std::size_t n, std::size_t d) {
  FeatureMatrix f(n, d);
  for (double& v : f.values()) v = rng.normal();
  return f;
}

}  // namespace

TEST_CASE("graph encoder on trivial graphs") {
  const TextAttributedGraph single(1, 1, {}, {Tokens{}}, {});
  const auto enc1 = ToyGraphEncoder({Matrix::identity(3)});
  const FeatureMatrix f(1, 3, std::vector<double>{0.5, -1.0, 2.0});
  CHECK(encode_node(enc1, single, f, 0) == Vector{0.5, 0.0, 2.0});

  const auto enc = ToyGraphEncoder::random(3, 5, 4, 2, 7);
  CHECK(encode_node(enc, single, FeatureMatrix(1, 3), 0) == Vector(4, 0.0));
  CHECK_THROWS_AS(encode_node(enc, single, FeatureMatrix(1, 3), 1), UsageError);
  CHECK_THROWS_AS(encode_node(enc, single, FeatureMatrix(2, 3), 0), UsageError);
  CHECK_THROWS_AS(ToyGraphEncoder({Matrix(4, 3), Matrix(2, 5)}), UsageError);
}

TEST_CASE("isomorphic nodes with identical features encode identically") {
  // Star: centre 0 with leaves 1..4; leaves share features.
  std::vector<Edge> edges{{0, 1}, {0, 2}, {0, 3}, {0, 4}};
  const TextAttributedGraph g(5, 1, edges, std::vector<Tokens>(5), {});
  FeatureMatrix f(5, 3);
  for (std::size_t i = 1; i < 5; ++i) f.row(i)[0] = 1.0, f.row(i)[1] = -0.5, f.row(i)[2] = 0.25;
  f.row(0)[0] = 2.0;
  const auto enc = ToyGraphEncoder::random(3, 6, 4, 2, 3);
  const Vector a = encode_node(enc, g, f, 1);
  for (std::size_t i = 2; i < 5; ++i) CHECK(encode_node(enc, g, f, i) == a);
}

TEST_CASE("graph encoder matches a direct mean-aggregation evaluation") {
  Rng rng(31);
  const auto g = generate(SyntheticSpec{.num_nodes = 40, .mean_degree = 3.0, .seed = 4});
  const FeatureMatrix f = random_features(rng, 40, 5);
  const auto enc = ToyGraphEncoder::random(5, 6, 3, 2, 9);
  std::vector<std::vector<double>> h(40);
  for (std::size_t i = 0; i < 40; ++i) h[i].assign(f.row(i).begin(), f.row(i).end());
  for (const Matrix& w : enc.weights()) {
    std::vector<std::vector<double>> next(40, std::vector<double>(w.rows(), 0.0));
    for (std::size_t i = 0; i < 40; ++i) {
      std::vector<double> mean = h[i];
      for (std::size_t j : g.neighbors(i))
        for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += h[j][k];
      for (double& v : mean) v /= static_cast<double>(g.neighbors(i).size() + 1);
      for (std::size_t r = 0; r < w.rows(); ++r) {
        double s = 0.0;
        for (std::size_t k = 0; k < w.cols(); ++k) s += w(r, k) * mean[k];
        next[i][r] = std::max(0.0, s);
      }
    }
    h = std::move(next);
  }
  std::vector<std::size_t> all(40);
  for (std::size_t i = 0; i < 40; ++i) all[i] = i;
  const auto batch = encode_nodes(enc, g, f, all);
  for (std::size_t i = 0; i < 40; ++i)
    for (std::size_t k = 0; k < 3; ++k) CHECK(batch[i][k] == doctest::Approx(h[i][k]).epsilon(1e-13));
}

TEST_CASE("graph encoder locality") {
  Rng rng(32);
  const auto g = path_graph(8);
  FeatureMatrix f = random_features(rng, 8, 4);
  const auto enc = ToyGraphEncoder::random(4, 4, 4, 2, 1);
  const Vector before = encode_node(enc, g, f, 2);
  f.row(5)[0] += 10.0;  // three hops away
  CHECK(encode_node(enc, g, f, 2) == before);
  f.row(4)[0] += 10.0;  // two hops away
  CHECK_FALSE(encode_node(enc, g, f, 2) == before);
}

TEST_CASE("graph encoder backward matches finite differences") {
  Rng rng(33);
  const auto g = generate(SyntheticSpec{.num_nodes = 30, .mean_degree = 3.0, .seed = 2});
  const FeatureMatrix f = random_features(rng, 30, 4);
  const auto enc = ToyGraphEncoder::random(4, 5, 3, 2, 5);
  const std::vector<std::size_t> targets{3, 7, 7, 20};
  std::vector<Vector> grad_out;
  for (std::size_t i = 0; i < targets.size(); ++i) grad_out.push_back(oracle::gaussian_vector(rng, 3));
  auto objective = [&](const ToyGraphEncoder& e) {
    const auto out = encode_nodes(e, g, f, targets);
    double s = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i)
      for (std::size_t k = 0; k < 3; ++k) s += grad_out[i][k] * out[i][k];
    return s;
  };
  const auto act = gnn::forward(enc, g, f, targets);
  std::vector<Matrix> grads;
  for (const Matrix& w : enc.weights()) grads.emplace_back(w.rows(), w.cols());
  gnn::backward(enc, g, act, targets, grad_out, grads);
  const double h = 1e-6;
  for (std::size_t l = 0; l < enc.num_layers(); ++l) {
    for (std::size_t idx = 0; idx < enc.weights()[l].size(); ++idx) {
      auto plus = enc.weights(), minus = enc.weights();
      plus[l].values()[idx] += h;
      minus[l].values()[idx] -= h;
      const double fd = (objective(ToyGraphEncoder(plus)) - objective(ToyGraphEncoder(minus))) / (2 * h);
      CHECK(std::abs(grads[l].values()[idx] - fd) <= 1e-6 + 1e-5 * std::abs(fd));
    }
  }
}

TEST_CASE("hashed text embedding") {
  const HashedTextEmbedder emb(16, 3);
  CHECK(embed_text(emb, Tokens{}) == Vector(16, 0.0));
  const Tokens a{"alpha", "beta", "gamma", "beta"};
  const Tokens b{"beta", "gamma", "beta", "alpha"};
  CHECK(embed_text(emb, a) == embed_text(emb, b));
  CHECK(std::abs(norm(embed_text(emb, a)) - 1.0) <= 1e-12);
  CHECK(embed_text(emb, a) == embed_text(HashedTextEmbedder(16, 3), a));
  CHECK_FALSE(embed_text(emb, a) == embed_text(HashedTextEmbedder(16, 4), a));
  CHECK(token_hash("alpha", 0) == token_hash("alpha", 0));
  CHECK(token_hash("alpha", 0) != token_hash("alphb", 0));
}

TEST_CASE("euclidean projection and lift") {
  const EuclideanProjection id(Matrix::identity(3), Vector(3, 0.0));
  CHECK(project(id, std::vector{0.1, 0.2, 0.3}) == TangentVector({0.1, 0.2, 0.3}));
  const EuclideanProjection biased(Matrix::identity(3), Vector{0.5, -1.0, 2.0});
  CHECK(project(biased, std::vector{0.0, 0.0, 0.0}) == TangentVector({0.5, -1.0, 2.0}));
  Matrix two = Matrix::identity(3);
  for (double& v : two.values()) v *= 2.0;
  const EuclideanProjection affine(two, Vector(3, 1.0));
  CHECK(project(affine, std::vector{1.0, 0.0, 0.0}) == TangentVector({3.0, 1.0, 1.0}));
  CHECK_THROWS_AS(project(affine, std::vector{1.0, 0.0}), UsageError);
  CHECK_THROWS_AS(EuclideanProjection(Matrix(2, 3), Vector(3)), UsageError);

  const Curvature c(1.0);
  CHECK(lift(id, std::vector{0.0, 0.0, 0.0}, c) == PoincarePoint::origin(3, c));
  Rng rng(34);
  const auto p = EuclideanProjection::random(5, 4, 8);
  for (int trial = 0; trial < 200; ++trial) {
    const auto h = oracle::gaussian_vector(rng, 5, std::pow(10.0, 3.0 * rng.uniform()));
    const auto z = lift(p, h, c);
    CHECK(z == exp_map_origin(project(p, h), c));
    CHECK(z.norm() < 1.0);
  }
}
