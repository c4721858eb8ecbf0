#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "h4g/data.hpp"
#include "h4g/encoders.hpp"
#include "h4g/model.hpp"
#include "h4g/poincare.hpp"

namespace h4g {

struct ClassPrototype {
  std::size_t class_id = 0;
  Tokens description_tokens;
  /// Radius-adjusted text embedding (a ball point unless the model runs in
  /// euclidean_space mode).
  Vector embedding;
};

struct PredictionResult {
  std::size_t node_id = 0;
  std::size_t predicted_class = 0;
  std::vector<double> distances;  // one per class
};

struct EvalResult {
  double accuracy = 0.0;
  /// NaN for classes with no labelled node.
  std::vector<double> per_class_accuracy;
  /// confusion[true][predicted]
  std::vector<std::vector<std::size_t>> confusion;
  std::vector<std::size_t> predictions;
};

/// embed_text -> project -> lift -> scale_t, one prototype per description.
std::vector<ClassPrototype> build_prototypes(const AlignmentModel& model,
                                             std::span<const Tokens> class_descriptions);

/// Index of the smallest value; the lowest index wins ties.
std::size_t argmin_lowest_index(std::span<const double> values);

PredictionResult predict_node(const AlignmentModel& model, const TextAttributedGraph& graph,
                              const FeatureMatrix& features, std::size_t node_id,
                              std::span<const ClassPrototype> prototypes);

/// predict_node for every node, sharing the encoder pass.
std::vector<PredictionResult> predict_all(const AlignmentModel& model, const TextAttributedGraph& graph,
                                          const FeatureMatrix& features,
                                          std::span<const ClassPrototype> prototypes);

EvalResult evaluate(const AlignmentModel& model, const TextAttributedGraph& graph,
                    const FeatureMatrix& features, std::span<const int> labels,
                    std::span<const ClassPrototype> prototypes);

struct HistogramBin {
  double lower = 0.0;
  std::size_t count = 0;
};

/// Bins [k w, (k + 1) w) for k = 0 .. floor(max / w).
std::vector<HistogramBin> radius_histogram(std::span<const double> radii, double bin_width);
std::vector<HistogramBin> radius_histogram(std::span<const PoincarePoint> points, double bin_width);

}  // namespace h4g
