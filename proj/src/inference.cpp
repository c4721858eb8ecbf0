#include "h4g/inference.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "h4g/errors.hpp"

namespace h4g {

std::vector<ClassPrototype> build_prototypes(const AlignmentModel& model,
                                             std::span<const Tokens> class_descriptions) {
  if (class_descriptions.empty()) throw UsageError("build_prototypes: no class descriptions");
  std::vector<Vector> texts;
  for (const Tokens& d : class_descriptions) texts.push_back(embed_text(model.text_embedder, d));
  EmbeddingSet e = embed_text_vectors(model, texts);
  std::vector<ClassPrototype> out;
  for (std::size_t k = 0; k < class_descriptions.size(); ++k) {
    out.push_back({k, class_descriptions[k], std::move(e.scaled[k])});
  }
  return out;
}

std::size_t argmin_lowest_index(std::span<const double> values) {
  if (values.empty()) throw UsageError("argmin of an empty sequence");
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (values[k] < values[best]) best = k;
  }
  return best;
}

std::vector<PredictionResult> predict_all(const AlignmentModel& model, const TextAttributedGraph& graph,
                                          const FeatureMatrix& features,
                                          std::span<const ClassPrototype> prototypes) {
  std::vector<std::size_t> nodes(graph.num_nodes());
  std::iota(nodes.begin(), nodes.end(), std::size_t{0});
  if (prototypes.empty()) throw UsageError("predict: no class prototypes");
  const EmbeddingSet g = embed_graph_nodes(model, graph, features, nodes);
  std::vector<PredictionResult> out;
  out.reserve(nodes.size());
  for (std::size_t i : nodes) {
    PredictionResult r;
    r.node_id = i;
    for (const ClassPrototype& p : prototypes) {
      r.distances.push_back(embedding_distance(model.config, g.scaled[i], p.embedding));
    }
    r.predicted_class = argmin_lowest_index(r.distances);
    out.push_back(std::move(r));
  }
  return out;
}

PredictionResult predict_node(const AlignmentModel& model, const TextAttributedGraph& graph,
                              const FeatureMatrix& features, std::size_t node_id,
                              std::span<const ClassPrototype> prototypes) {
  if (prototypes.empty()) throw UsageError("predict_node: no class prototypes");
  const std::size_t ids[1] = {node_id};
  const EmbeddingSet g = embed_graph_nodes(model, graph, features, ids);
  PredictionResult r;
  r.node_id = node_id;
  for (const ClassPrototype& p : prototypes) {
    r.distances.push_back(embedding_distance(model.config, g.scaled.front(), p.embedding));
  }
  r.predicted_class = argmin_lowest_index(r.distances);
  return r;
}

EvalResult evaluate(const AlignmentModel& model, const TextAttributedGraph& graph,
                    const FeatureMatrix& features, std::span<const int> labels,
                    std::span<const ClassPrototype> prototypes) {
  if (labels.size() != graph.num_nodes()) {
    throw UsageError("evaluate: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(graph.num_nodes()) + " nodes");
  }
  const std::size_t classes = prototypes.size();
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= classes) {
      throw UsageError("evaluate: label " + std::to_string(y) + " has no prototype (" +
                       std::to_string(classes) + " classes)");
    }
  }
  const auto preds = predict_all(model, graph, features, prototypes);
  EvalResult r;
  r.confusion.assign(classes, std::vector<std::size_t>(classes, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto truth = static_cast<std::size_t>(labels[i]);
    ++r.confusion[truth][preds[i].predicted_class];
    correct += truth == preds[i].predicted_class ? 1 : 0;
    r.predictions.push_back(preds[i].predicted_class);
  }
  r.accuracy = preds.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(preds.size());
  for (std::size_t k = 0; k < classes; ++k) {
    const std::size_t support = std::accumulate(r.confusion[k].begin(), r.confusion[k].end(), std::size_t{0});
    r.per_class_accuracy.push_back(support == 0
                                       ? std::numeric_limits<double>::quiet_NaN()
                                       : static_cast<double>(r.confusion[k][k]) / static_cast<double>(support));
  }
  return r;
}

std::vector<HistogramBin> radius_histogram(std::span<const double> radii, double bin_width) {
  if (radii.empty()) throw UsageError("radius_histogram: no points");
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) throw UsageError("bin width must be positive");
  double hi = 0.0;
  for (double r : radii) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw UsageError("radius_histogram: invalid radius");
    hi = std::max(hi, r);
  }
  const auto bins = static_cast<std::size_t>(std::floor(hi / bin_width)) + 1;
  std::vector<HistogramBin> out(bins);
  for (std::size_t k = 0; k < bins; ++k) out[k].lower = static_cast<double>(k) * bin_width;
  for (double r : radii) {
    const auto k = std::min(bins - 1, static_cast<std::size_t>(std::floor(r / bin_width)));
    ++out[k].count;
  }
  return out;
}

std::vector<HistogramBin> radius_histogram(std::span<const PoincarePoint> points, double bin_width) {
  std::vector<double> radii;
  radii.reserve(points.size());
  for (const PoincarePoint& p : points) radii.push_back(radius(p));
  return radius_histogram(radii, bin_width);
}

}  // namespace h4g
