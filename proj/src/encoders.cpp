#include "h4g/encoders.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "h4g/data.hpp"
#include "h4g/errors.hpp"
#include "h4g/kernels.hpp"
#include "h4g/rng.hpp"

namespace h4g {

namespace {

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  const double sd = 1.0 / std::sqrt(static_cast<double>(cols));
  for (double& v : m.values()) v = sd * rng.normal();
  return m;
}

std::uint64_t splitmix(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

ToyGraphEncoder::ToyGraphEncoder(std::vector<Matrix> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw UsageError("graph encoder needs at least one layer");
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    if (weights_[l].size() == 0) throw UsageError("graph encoder layer has zero size");
    if (l > 0 && weights_[l].cols() != weights_[l - 1].rows()) {
      throw UsageError("graph encoder layer " + std::to_string(l) + " expects input " +
                       std::to_string(weights_[l].cols()) + " but previous layer outputs " +
                       std::to_string(weights_[l - 1].rows()));
    }
    if (!all_finite(weights_[l].values())) throw UsageError("graph encoder weight is non-finite");
  }
}

ToyGraphEncoder ToyGraphEncoder::random(std::size_t d_in, std::size_t d_hidden, std::size_t d_out,
                                        std::size_t num_layers, std::uint64_t seed) {
  if (num_layers == 0) throw UsageError("graph encoder needs at least one layer");
  Rng rng(seed);
  std::vector<Matrix> weights;
  for (std::size_t l = 0; l < num_layers; ++l) {
    const std::size_t in = l == 0 ? d_in : d_hidden;
    const std::size_t out = l + 1 == num_layers ? d_out : d_hidden;
    weights.push_back(gaussian_matrix(out, in, rng));
  }
  return ToyGraphEncoder(std::move(weights));
}

HashedTextEmbedder::HashedTextEmbedder(std::size_t dimension, std::uint64_t seed)
    : dimension_(dimension), seed_(seed) {
  if (dimension == 0) throw UsageError("text embedder dimension must be positive");
}

EuclideanProjection::EuclideanProjection(Matrix weight, Vector bias)
    : weight_(std::move(weight)), bias_(std::move(bias)) {
  if (bias_.size() != weight_.rows()) {
    throw UsageError("projection bias has " + std::to_string(bias_.size()) + " entries, expected " +
                     std::to_string(weight_.rows()));
  }
  if (!all_finite(weight_.values()) || !all_finite(bias_)) {
    throw UsageError("projection has non-finite entries");
  }
}

EuclideanProjection EuclideanProjection::random(std::size_t d_in, std::size_t d_out,
                                                std::uint64_t seed) {
  Rng rng(seed);
  return EuclideanProjection(gaussian_matrix(d_out, d_in, rng), Vector(d_out, 0.0));
}

std::uint64_t token_hash(std::string_view token, std::uint64_t seed) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ splitmix(seed);
  for (unsigned char ch : token) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return splitmix(h);
}

Vector embed_text(const HashedTextEmbedder& emb, std::span<const std::string> tokens) {
  Vector v(emb.dimension(), 0.0);
  for (const std::string& tok : tokens) {
    const std::uint64_t h = token_hash(tok, emb.seed());
    v[h % emb.dimension()] += (h >> 63) != 0 ? -1.0 : 1.0;
  }
  const double n = norm(v);
  if (n > 0.0) {
    for (double& x : v) x /= n;
  }
  return v;
}

FeatureMatrix node_features(const HashedTextEmbedder& emb, const TextAttributedGraph& graph) {
  Matrix features(graph.num_nodes(), emb.dimension());
  for (std::size_t i = 0; i < graph.num_nodes(); ++i) {
    const Vector v = embed_text(emb, graph.tokens(i));
    std::copy(v.begin(), v.end(), features.row(i).begin());
  }
  return features;
}

TangentVector project(const EuclideanProjection& p, std::span<const double> h) {
  if (h.size() != p.input_dim()) {
    throw UsageError("project: input has dimension " + std::to_string(h.size()) +
                     ", projection expects " + std::to_string(p.input_dim()));
  }
  Vector out(p.output_dim());
  matvec(p.weight(), h, out);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += p.bias()[i];
  return TangentVector(std::move(out));
}

PoincarePoint lift(const EuclideanProjection& p, std::span<const double> h, Curvature c) {
  return exp_map_origin(project(p, h), c);
}

namespace gnn {

namespace {

std::vector<std::size_t> expand(const TextAttributedGraph& graph,
                                const std::vector<std::size_t>& nodes) {
  std::vector<char> mark(graph.num_nodes(), 0);
  for (std::size_t i : nodes) {
    mark[i] = 1;
    for (std::size_t j : graph.neighbors(i)) mark[j] = 1;
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mark.size(); ++i) {
    if (mark[i] != 0) out.push_back(i);
  }
  return out;
}

}  // namespace

Activations forward(const ToyGraphEncoder& enc, const TextAttributedGraph& graph,
                    const FeatureMatrix& features, std::span<const std::size_t> targets) {
  if (features.rows() != graph.num_nodes()) {
    throw UsageError("feature matrix has " + std::to_string(features.rows()) + " rows for " +
                     std::to_string(graph.num_nodes()) + " nodes");
  }
  if (features.cols() != enc.input_dim()) {
    throw UsageError("features have dimension " + std::to_string(features.cols()) +
                     ", graph encoder expects " + std::to_string(enc.input_dim()));
  }
  for (std::size_t t : targets) {
    if (t >= graph.num_nodes()) {
      throw UsageError("node id " + std::to_string(t) + " out of range (graph has " +
                       std::to_string(graph.num_nodes()) + " nodes)");
    }
  }
  const std::size_t layers = enc.num_layers();
  Activations act;
  act.needed.resize(layers + 1);
  std::vector<std::size_t> top(targets.begin(), targets.end());
  std::sort(top.begin(), top.end());
  top.erase(std::unique(top.begin(), top.end()), top.end());
  act.needed[layers] = std::move(top);
  for (std::size_t l = layers; l > 0; --l) act.needed[l - 1] = expand(graph, act.needed[l]);

  act.out.resize(layers + 1);
  act.aggregated.resize(layers + 1);
  act.pre.resize(layers + 1);
  act.out[0] = features;
  for (std::size_t l = 1; l <= layers; ++l) {
    const Matrix& w = enc.weights()[l - 1];
    act.aggregated[l] = Matrix(graph.num_nodes(), w.cols());
    act.pre[l] = Matrix(graph.num_nodes(), w.rows());
    act.out[l] = Matrix(graph.num_nodes(), w.rows());
    for (std::size_t i : act.needed[l]) {
      auto agg = act.aggregated[l].row(i);
      const auto& nb = graph.neighbors(i);
      const double inv = 1.0 / static_cast<double>(nb.size() + 1);
      kernels::axpy(inv, act.out[l - 1].row(i), agg);
      for (std::size_t j : nb) kernels::axpy(inv, act.out[l - 1].row(j), agg);
      matvec(w, agg, act.pre[l].row(i));
      auto h = act.out[l].row(i);
      const auto pre = act.pre[l].row(i);
      for (std::size_t r = 0; r < h.size(); ++r) h[r] = pre[r] > 0.0 ? pre[r] : 0.0;
    }
  }
  return act;
}

void backward(const ToyGraphEncoder& enc, const TextAttributedGraph& graph, const Activations& act,
              std::span<const std::size_t> targets, std::span<const Vector> grad_out,
              std::span<Matrix> grad_weights) {
  const std::size_t layers = enc.num_layers();
  Matrix grad_h(graph.num_nodes(), enc.output_dim());
  for (std::size_t b = 0; b < targets.size(); ++b) kernels::axpy(1.0, grad_out[b], grad_h.row(targets[b]));

  for (std::size_t l = layers; l > 0; --l) {
    const Matrix& w = enc.weights()[l - 1];
    Matrix grad_prev(l > 1 ? graph.num_nodes() : 0, w.cols());
    Vector grad_pre(w.rows());
    Vector grad_agg(w.cols());
    for (std::size_t i : act.needed[l]) {
      const auto gh = grad_h.row(i);
      const auto pre = act.pre[l].row(i);
      bool any = false;
      for (std::size_t r = 0; r < grad_pre.size(); ++r) {
        grad_pre[r] = pre[r] > 0.0 ? gh[r] : 0.0;
        any = any || grad_pre[r] != 0.0;
      }
      if (!any) continue;
      outer_add(grad_pre, act.aggregated[l].row(i), grad_weights[l - 1]);
      if (l == 1) continue;  // features are fixed inputs
      std::fill(grad_agg.begin(), grad_agg.end(), 0.0);
      matvec_transposed_add(w, grad_pre, grad_agg);
      const auto& nb = graph.neighbors(i);
      const double inv = 1.0 / static_cast<double>(nb.size() + 1);
      kernels::axpy(inv, grad_agg, grad_prev.row(i));
      for (std::size_t j : nb) kernels::axpy(inv, grad_agg, grad_prev.row(j));
    }
    grad_h = std::move(grad_prev);
  }
}

}  // namespace gnn

std::vector<Vector> encode_nodes(const ToyGraphEncoder& enc, const TextAttributedGraph& graph,
                                 const FeatureMatrix& features, std::span<const std::size_t> nodes) {
  const gnn::Activations act = gnn::forward(enc, graph, features, nodes);
  std::vector<Vector> out;
  out.reserve(nodes.size());
  for (std::size_t i : nodes) {
    const auto row = act.out.back().row(i);
    out.emplace_back(row.begin(), row.end());
  }
  return out;
}

Vector encode_node(const ToyGraphEncoder& enc, const TextAttributedGraph& graph,
                   const FeatureMatrix& features, std::size_t node_id) {
  const std::size_t ids[1] = {node_id};
  return encode_nodes(enc, graph, features, ids).front();
}

}  // namespace h4g
