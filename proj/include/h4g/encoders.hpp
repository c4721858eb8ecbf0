#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "h4g/linalg.hpp"
#include "h4g/poincare.hpp"

namespace h4g {

class TextAttributedGraph;

/// Mean-aggregation message passing with ReLU and no bias:
///   h_i^{l+1} = ReLU(W_l mean_{j in N(i) + {i}} h_j^l)
class ToyGraphEncoder {
 public:
  /// Throws UsageError if the layer shapes do not chain or contain non-finite
  /// entries.
  explicit ToyGraphEncoder(std::vector<Matrix> weights);

  /// Gaussian(0, 1 / fan_in) weights; layer dims in -> hidden ... -> out.
  static ToyGraphEncoder random(std::size_t d_in, std::size_t d_hidden, std::size_t d_out,
                                std::size_t num_layers, std::uint64_t seed);

  std::size_t num_layers() const noexcept { return weights_.size(); }
  std::size_t input_dim() const noexcept { return weights_.front().cols(); }
  std::size_t output_dim() const noexcept { return weights_.back().rows(); }
  const std::vector<Matrix>& weights() const noexcept { return weights_; }

  bool operator==(const ToyGraphEncoder&) const = default;

 private:
  std::vector<Matrix> weights_;
};

/// Signed hashed bag of words, L2-normalised.
class HashedTextEmbedder {
 public:
  HashedTextEmbedder(std::size_t dimension, std::uint64_t seed);

  std::size_t dimension() const noexcept { return dimension_; }
  std::uint64_t seed() const noexcept { return seed_; }

  bool operator==(const HashedTextEmbedder&) const = default;

 private:
  std::size_t dimension_;
  std::uint64_t seed_;
};

/// h' = W h + b
class EuclideanProjection {
 public:
  EuclideanProjection(Matrix weight, Vector bias);

  /// Gaussian(0, 1 / fan_in) weight, zero bias.
  static EuclideanProjection random(std::size_t d_in, std::size_t d_out, std::uint64_t seed);

  std::size_t input_dim() const noexcept { return weight_.cols(); }
  std::size_t output_dim() const noexcept { return weight_.rows(); }
  const Matrix& weight() const noexcept { return weight_; }
  const Vector& bias() const noexcept { return bias_; }

  bool operator==(const EuclideanProjection&) const = default;

 private:
  Matrix weight_;
  Vector bias_;
};

/// Row i holds the features of node i.
using FeatureMatrix = Matrix;

Vector encode_node(const ToyGraphEncoder& enc, const TextAttributedGraph& graph,
                   const FeatureMatrix& features, std::size_t node_id);

/// Encodes all listed nodes at once, sharing intermediate layers.
std::vector<Vector> encode_nodes(const ToyGraphEncoder& enc, const TextAttributedGraph& graph,
                                 const FeatureMatrix& features, std::span<const std::size_t> nodes);

Vector embed_text(const HashedTextEmbedder& emb, std::span<const std::string> tokens);

/// One row per node: the hashed embedding of that node's tokens.
FeatureMatrix node_features(const HashedTextEmbedder& emb, const TextAttributedGraph& graph);

TangentVector project(const EuclideanProjection& p, std::span<const double> h);

/// exp_map_origin(project(p, h), c)
PoincarePoint lift(const EuclideanProjection& p, std::span<const double> h, Curvature c);

/// Stable 64-bit token hash (FNV-1a over seed and bytes, then a splitmix
/// finaliser).  Independent of the standard library's std::hash.
std::uint64_t token_hash(std::string_view token, std::uint64_t seed) noexcept;

namespace gnn {

/// Forward activations kept for backpropagation through the encoder.
struct Activations {
  /// needed[l]: nodes whose layer-l output is computed (needed[0] = inputs).
  std::vector<std::vector<std::size_t>> needed;
  /// Per layer l >= 1, indexed by node id (rows of unused nodes stay zero).
  std::vector<Matrix> aggregated;  // input mean to layer l
  std::vector<Matrix> pre;         // W a before ReLU
  std::vector<Matrix> out;         // h^l; out[0] is a copy of the features
};

Activations forward(const ToyGraphEncoder& enc, const TextAttributedGraph& graph,
                    const FeatureMatrix& features, std::span<const std::size_t> targets);

/// grad_out rows are gradients w.r.t. the final layer output for `targets`
/// (same order).  Accumulates into grad_weights (shaped like enc.weights()).
void backward(const ToyGraphEncoder& enc, const TextAttributedGraph& graph, const Activations& act,
              std::span<const std::size_t> targets, std::span<const Vector> grad_out,
              std::span<Matrix> grad_weights);

}  // namespace gnn

}  // namespace h4g
