#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "h4g/data.hpp"
#include "h4g/encoders.hpp"
#include "h4g/linalg.hpp"
#include "h4g/mobius_linear.hpp"
#include "h4g/poincare.hpp"

namespace h4g {

/// Each flag disables one mechanism, one per ablation row.
struct AblationFlags {
  /// Scalings frozen at exactly I_n.
  bool no_radius_adjustment = false;
  /// Euclidean distances on the pre-lift vectors; exp map and Mobius ops skipped.
  bool euclidean_space = false;
  /// One dense d x d scaling instead of d / n blocks.
  bool dense_scaling = false;
  /// lambda_r forced to 0.
  bool no_regularization = false;

  bool operator==(const AblationFlags&) const = default;
};

struct ModelConfig {
  std::size_t d = 64;         // unified embedding dimension
  std::size_t d_g = 64;       // graph encoder output
  std::size_t d_hidden = 64;  // graph encoder hidden width
  std::size_t d_t = 64;       // hashed text embedding
  std::size_t gnn_layers = 2;
  std::size_t block_size = 32;
  double curvature = 1.0;
  double temperature = 0.07;
  double lambda_r = 0.01;
  double init_sigma = 0.01;
  std::uint64_t text_seed = 17;
  /// Also normalise over graph candidates for each text (off: one direction only).
  bool symmetric_loss = false;
  AblationFlags ablation;

  /// Block size actually used (d when dense_scaling is set).
  std::size_t effective_block_size() const noexcept { return ablation.dense_scaling ? d : block_size; }
  std::size_t block_count() const noexcept { return d / effective_block_size(); }
  double effective_lambda() const noexcept { return ablation.no_regularization ? 0.0 : lambda_r; }

  /// Throws UsageError if dims are zero, n does not divide d, c <= 0 or tau <= 0.
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

/// Complete learnable state plus the fixed hyperparameters it was built with.
struct AlignmentModel {
  ModelConfig config;
  ToyGraphEncoder graph_encoder;
  HashedTextEmbedder text_embedder;
  EuclideanProjection proj_g;
  EuclideanProjection proj_t;
  BlockDiagScaling scale_g;
  BlockDiagScaling scale_t;

  static AlignmentModel initialize(const ModelConfig& config, std::uint64_t seed);

  Curvature curvature() const { return Curvature(config.curvature); }

  bool operator==(const AlignmentModel&) const = default;
};

enum class ParamGroup { encoder, scaling };

struct ParamEntry {
  std::string name;
  std::size_t rows;
  std::size_t cols;
  std::size_t offset;
  ParamGroup group;

  std::size_t size() const noexcept { return rows * cols; }
};

/// Declaration order: encoder layers, proj_g (weight, bias), proj_t (weight,
/// bias), scale_g blocks, scale_t blocks.  Biases are rows x 1.
std::vector<ParamEntry> parameter_layout(const AlignmentModel& model);
std::size_t parameter_count(const AlignmentModel& model);
std::vector<double> flatten(const AlignmentModel& model);
/// A copy of `model` whose parameters are read from `values` in layout order.
AlignmentModel with_parameters(const AlignmentModel& model, std::span<const double> values);

/// Vectors on the way from encoder output to the space where distances are
/// measured.  In euclidean_space mode `lifted` and `scaled` equal `tangent`.
struct EmbeddingSet {
  std::vector<Vector> tangent;  // W h + b
  std::vector<Vector> lifted;   // exp_0
  std::vector<Vector> scaled;   // S (x)_c
};

EmbeddingSet embed_graph_nodes(const AlignmentModel& model, const TextAttributedGraph& graph,
                               const FeatureMatrix& features, std::span<const std::size_t> nodes);
EmbeddingSet embed_text_vectors(const AlignmentModel& model, std::span<const Vector> texts);

/// Hyperbolic distance, or Euclidean distance in euclidean_space mode.
double embedding_distance(const ModelConfig& config, std::span<const double> a, std::span<const double> b);
/// Hyperbolic radius, or Euclidean norm in euclidean_space mode.
double embedding_radius(const ModelConfig& config, std::span<const double> x);

}  // namespace h4g
