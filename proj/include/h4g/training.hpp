#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "h4g/data.hpp"
#include "h4g/linalg.hpp"
#include "h4g/mobius_linear.hpp"
#include "h4g/model.hpp"
#include "h4g/poincare.hpp"

namespace h4g {

/// Graph-text pairs: node i's graph view against node i's text view.
struct GraphTextBatch {
  const TextAttributedGraph* graph = nullptr;
  /// Hashed text embeddings of every node; doubles as GNN input features.
  const FeatureMatrix* features = nullptr;
  std::vector<std::size_t> nodes;
};

struct TrainConfig {
  double lr_encoder = 1e-4;
  double lr_scaling = 5e-5;
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  double grad_clip_max_norm = 1.0;
  std::uint64_t seed = 0;
  /// Spot-check the gradient against finite differences every this many
  /// steps (0 disables).
  std::size_t fd_check_frequency = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_decay = 0.0;

  void validate() const;
};

struct LossBreakdown {
  double align = 0.0;
  double reg = 0.0;
  double total = 0.0;
};

/// Mean over rows i of -log softmax_j(-D_ij / tau)[i].  With `symmetric`
/// the column-normalised term is averaged in.  Exposed for tests that inject
/// a distance matrix directly.
double align_loss_from_distances(const Matrix& distances, double tau, bool symmetric = false);

/// Row i's positive is batch_text[i].  Throws UsageError on empty or
/// mismatched batches.
double align_loss(std::span<const PoincarePoint> batch_graph, std::span<const PoincarePoint> batch_text,
                  double tau);

/// lambda_r * sum_k (|S_g,k - I|_F^2 + |S_t,k - I|_F^2)
double reg_loss(const BlockDiagScaling& scale_g, const BlockDiagScaling& scale_t, double lambda_r);

/// Full forward pass: encode, project, lift, scale, then both losses.
LossBreakdown total_loss(const AlignmentModel& model, const GraphTextBatch& batch);

struct GradientResult {
  LossBreakdown loss;
  /// dL_total / dparam, laid out as parameter_layout(model).
  std::vector<double> grad;
};

/// Reverse-mode derivative of total_loss.  Throws NumericalError naming the
/// first non-finite node.
GradientResult gradient(const AlignmentModel& model, const GraphTextBatch& batch);

/// Scales grad so its L2 norm is at most max_norm; untouched when already
/// within the bound.  Returns the norm before clipping.
double clip_gradient(std::span<double> grad, double max_norm);

/// Decoupled-weight-decay Adam with per-group learning rates.
class AdamW {
 public:
  AdamW(const std::vector<ParamEntry>& layout, const TrainConfig& cfg);

  void step(std::span<double> params, std::span<const double> grad);
  std::size_t steps_taken() const noexcept { return t_; }

 private:
  std::vector<double> lr_;  // per parameter
  std::vector<double> m_;
  std::vector<double> v_;
  double beta1_, beta2_, eps_, weight_decay_;
  std::size_t t_ = 0;
};

struct RadiusSummary {
  double mean_radius_graph = 0.0;
  double mean_radius_text = 0.0;
  /// Percentiles over graph and text radii pooled.
  double r_p5 = 0.0;
  double r_p50 = 0.0;
  double r_p95 = 0.0;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double align_loss = 0.0;
  double reg_loss = 0.0;
  double total_loss = 0.0;
  RadiusSummary radii;
  ScalingStats scaling_g;
  ScalingStats scaling_t;
  /// Largest relative finite-difference mismatch seen this epoch; negative
  /// when no check ran.
  double fd_max_rel_error = -1.0;
};

struct TrainReport {
  RadiusSummary initial;
  std::vector<EpochRecord> epochs;
};

struct TrainResult {
  AlignmentModel model;
  TrainReport report;
  bool diverged = false;
  std::string failure;
};

/// Radii of the scaled graph and text embeddings of every node.
RadiusSummary summarize_radii(const AlignmentModel& model, const TextAttributedGraph& graph,
                              const FeatureMatrix& features);

/// Linear-interpolation percentile (q in [0, 100]) of unsorted values.
double percentile(std::vector<double> values, double q);

/// Trains on every node of `graph` as a graph-text pair.  Losses are the mean
/// of the per-step losses of the epoch.  On a non-finite loss or gradient the
/// run stops with `diverged` set, keeping the parameters and report from
/// before the failing step.
TrainResult train(const AlignmentModel& model, const TextAttributedGraph& graph, const TrainConfig& cfg);

/// Central-difference derivative of total_loss w.r.t. flat parameter `index`.
double finite_difference(const AlignmentModel& model, const GraphTextBatch& batch, std::size_t index,
                         double step = 1e-5);

}  // namespace h4g
