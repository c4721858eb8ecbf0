#pragma once

// Small seeded models and batches shared by the training, inference and
// acceptance tests.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "h4g/data.hpp"
#include "h4g/encoders.hpp"
#include "h4g/model.hpp"
#include "h4g/rng.hpp"
#include "h4g/training.hpp"

namespace testing_models {

inline h4g::ModelConfig tiny_config() {
  h4g::ModelConfig c;
  c.d = 8;
  c.d_g = 8;
  c.d_hidden = 8;
  c.d_t = 8;
  c.block_size = 4;
  return c;
}

/// Seeded model with every parameter perturbed away from its initialisation,
/// so no gradient is trivially zero.
inline h4g::AlignmentModel random_state(const h4g::ModelConfig& cfg, std::uint64_t seed, double noise = 0.1) {
  const auto base = h4g::AlignmentModel::initialize(cfg, seed);
  std::vector<double> p = h4g::flatten(base);
  h4g::Rng rng(seed * 7919 + 1);
  for (double& v : p) v += noise * rng.normal();
  return h4g::with_parameters(base, p);
}

struct BatchFixture {
  h4g::TextAttributedGraph graph;
  h4g::FeatureMatrix features;
  h4g::GraphTextBatch batch;

  BatchFixture(const h4g::AlignmentModel& model, std::uint64_t seed, std::size_t batch_size,
               std::size_t num_nodes = 24)
      : graph(h4g::generate(h4g::SyntheticSpec{.num_nodes = num_nodes, .mean_degree = 3.0, .seed = seed})),
        features(h4g::node_features(model.text_embedder, graph)) {
    std::vector<std::size_t> nodes(graph.num_nodes());
    std::iota(nodes.begin(), nodes.end(), std::size_t{0});
    h4g::Rng rng(seed + 99);
    rng.shuffle(std::span<std::size_t>(nodes));
    nodes.resize(batch_size);
    batch = h4g::GraphTextBatch{&graph, &features, nodes};
  }
  BatchFixture(const BatchFixture&) = delete;
  BatchFixture& operator=(const BatchFixture&) = delete;
};

/// Central difference of total_loss in parameter `index`.
inline double central_difference(const h4g::AlignmentModel& model, const h4g::GraphTextBatch& batch,
                                 std::size_t index, double step = 1e-5) {
  std::vector<double> p = h4g::flatten(model);
  const double x = p[index];
  p[index] = x + step;
  const double up = h4g::total_loss(h4g::with_parameters(model, p), batch).total;
  p[index] = x - step;
  const double down = h4g::total_loss(h4g::with_parameters(model, p), batch).total;
  return (up - down) / (2.0 * step);
}

/// Gradient agreement rule: absolute 1e-7 or relative 1e-4.
inline bool gradient_matches(double analytic, double numeric) {
  const double err = std::abs(analytic - numeric);
  return err <= 1e-7 || err <= 1e-4 * std::max(std::abs(analytic), std::abs(numeric));
}

}  // namespace testing_models
