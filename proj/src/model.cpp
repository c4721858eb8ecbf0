#include "h4g/model.hpp"

#include <cmath>
#include <string>

#include "h4g/errors.hpp"
#include "h4g/kernels.hpp"

namespace h4g {

void ModelConfig::validate() const {
  if (d == 0 || d_g == 0 || d_hidden == 0 || d_t == 0 || gnn_layers == 0 || block_size == 0) {
    throw UsageError("model dimensions and layer count must be positive");
  }
  if (d % effective_block_size() != 0) {
    throw UsageError("block size " + std::to_string(effective_block_size()) +
                     " does not divide d = " + std::to_string(d));
  }
  if (!(curvature > 0.0) || !std::isfinite(curvature)) throw UsageError("curvature must be positive");
  if (!(temperature > 0.0) || !std::isfinite(temperature)) throw UsageError("temperature must be positive");
  if (!(lambda_r >= 0.0) || !std::isfinite(lambda_r)) throw UsageError("lambda_r must be >= 0");
  if (!(init_sigma >= 0.0) || !std::isfinite(init_sigma)) throw UsageError("init sigma must be >= 0");
}

AlignmentModel AlignmentModel::initialize(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  // Independent streams per component so changing one shape leaves the
  // others' draws untouched.
  auto stream = [seed](std::uint64_t k) { return seed * 0x9e3779b97f4a7c15ULL + k; };
  const std::size_t n = config.effective_block_size();
  const std::size_t k = config.block_count();
  const bool frozen = config.ablation.no_radius_adjustment;
  return AlignmentModel{
      config,
      ToyGraphEncoder::random(config.d_t, config.d_hidden, config.d_g, config.gnn_layers, stream(1)),
      HashedTextEmbedder(config.d_t, config.text_seed),
      EuclideanProjection::random(config.d_g, config.d, stream(2)),
      EuclideanProjection::random(config.d_t, config.d, stream(3)),
      frozen ? BlockDiagScaling::identity(k, n) : init_near_identity(k, n, config.init_sigma, stream(4)),
      frozen ? BlockDiagScaling::identity(k, n) : init_near_identity(k, n, config.init_sigma, stream(5)),
  };
}

std::vector<ParamEntry> parameter_layout(const AlignmentModel& model) {
  std::vector<ParamEntry> out;
  std::size_t offset = 0;
  auto add = [&](std::string name, std::size_t rows, std::size_t cols, ParamGroup group) {
    out.push_back({std::move(name), rows, cols, offset, group});
    offset += rows * cols;
  };
  const auto& w = model.graph_encoder.weights();
  for (std::size_t l = 0; l < w.size(); ++l) {
    add("encoder.layer" + std::to_string(l) + ".weight", w[l].rows(), w[l].cols(), ParamGroup::encoder);
  }
  add("proj_g.weight", model.proj_g.weight().rows(), model.proj_g.weight().cols(), ParamGroup::encoder);
  add("proj_g.bias", model.proj_g.bias().size(), 1, ParamGroup::encoder);
  add("proj_t.weight", model.proj_t.weight().rows(), model.proj_t.weight().cols(), ParamGroup::encoder);
  add("proj_t.bias", model.proj_t.bias().size(), 1, ParamGroup::encoder);
  const std::size_t n = model.scale_g.block_size();
  for (std::size_t k = 0; k < model.scale_g.block_count(); ++k) {
    add("scale_g.block" + std::to_string(k), n, n, ParamGroup::scaling);
  }
  for (std::size_t k = 0; k < model.scale_t.block_count(); ++k) {
    add("scale_t.block" + std::to_string(k), n, n, ParamGroup::scaling);
  }
  return out;
}

std::size_t parameter_count(const AlignmentModel& model) {
  const auto layout = parameter_layout(model);
  return layout.back().offset + layout.back().size();
}

std::vector<double> flatten(const AlignmentModel& model) {
  std::vector<double> out;
  out.reserve(parameter_count(model));
  auto put = [&](std::span<const double> v) { out.insert(out.end(), v.begin(), v.end()); };
  for (const Matrix& m : model.graph_encoder.weights()) put(m.values());
  put(model.proj_g.weight().values());
  put(model.proj_g.bias());
  put(model.proj_t.weight().values());
  put(model.proj_t.bias());
  for (const Matrix& b : model.scale_g.blocks()) put(b.values());
  for (const Matrix& b : model.scale_t.blocks()) put(b.values());
  return out;
}

AlignmentModel with_parameters(const AlignmentModel& model, std::span<const double> values) {
  const auto layout = parameter_layout(model);
  if (values.size() != parameter_count(model)) {
    throw UsageError("expected " + std::to_string(parameter_count(model)) + " parameters, got " +
                     std::to_string(values.size()));
  }
  std::size_t idx = 0;
  auto take = [&]() {
    const ParamEntry& e = layout[idx++];
    return std::vector<double>(values.begin() + static_cast<std::ptrdiff_t>(e.offset),
                               values.begin() + static_cast<std::ptrdiff_t>(e.offset + e.size()));
  };
  auto take_matrix = [&]() {
    const ParamEntry& e = layout[idx];
    return Matrix(e.rows, e.cols, take());
  };
  std::vector<Matrix> enc;
  for (std::size_t l = 0; l < model.graph_encoder.num_layers(); ++l) enc.push_back(take_matrix());
  Matrix wg = take_matrix();
  Vector bg = take();
  Matrix wt = take_matrix();
  Vector bt = take();
  std::vector<Matrix> sg, st;
  for (std::size_t k = 0; k < model.scale_g.block_count(); ++k) sg.push_back(take_matrix());
  for (std::size_t k = 0; k < model.scale_t.block_count(); ++k) st.push_back(take_matrix());
  return AlignmentModel{model.config,
                        ToyGraphEncoder(std::move(enc)),
                        model.text_embedder,
                        EuclideanProjection(std::move(wg), std::move(bg)),
                        EuclideanProjection(std::move(wt), std::move(bt)),
                        BlockDiagScaling(std::move(sg)),
                        BlockDiagScaling(std::move(st))};
}

namespace {

EmbeddingSet finish_embeddings(const AlignmentModel& model, const EuclideanProjection& proj,
                               const BlockDiagScaling& scale, std::span<const Vector> inputs) {
  const double c = model.config.curvature;
  const bool euclidean = model.config.ablation.euclidean_space;
  EmbeddingSet out;
  ball::MatvecCache cache;
  for (const Vector& h : inputs) {
    const TangentVector t = project(proj, h);
    Vector tangent(t.coords().begin(), t.coords().end());
    if (euclidean) {
      out.lifted.push_back(tangent);
      out.scaled.push_back(tangent);
    } else {
      Vector lifted(tangent.size());
      ball::exp_map(tangent, c, lifted);
      Vector scaled(tangent.size());
      ball::block_matvec(scale.blocks(), lifted, c, scaled, cache);
      ball::clamp(scaled, c);
      out.lifted.push_back(std::move(lifted));
      out.scaled.push_back(std::move(scaled));
    }
    out.tangent.push_back(std::move(tangent));
  }
  return out;
}

}  // namespace

EmbeddingSet embed_graph_nodes(const AlignmentModel& model, const TextAttributedGraph& graph,
                               const FeatureMatrix& features, std::span<const std::size_t> nodes) {
  const std::vector<Vector> h = encode_nodes(model.graph_encoder, graph, features, nodes);
  return finish_embeddings(model, model.proj_g, model.scale_g, h);
}

EmbeddingSet embed_text_vectors(const AlignmentModel& model, std::span<const Vector> texts) {
  return finish_embeddings(model, model.proj_t, model.scale_t, texts);
}

double embedding_distance(const ModelConfig& config, std::span<const double> a, std::span<const double> b) {
  if (config.ablation.euclidean_space) return std::sqrt(kernels::squared_distance(a, b));
  return ball::distance(a, b, config.curvature);
}

double embedding_radius(const ModelConfig& config, std::span<const double> x) {
  if (config.ablation.euclidean_space) return norm(x);
  return ball::radius(x, config.curvature);
}

}  // namespace h4g
