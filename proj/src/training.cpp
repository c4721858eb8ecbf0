#include "h4g/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "h4g/errors.hpp"
#include "h4g/kernels.hpp"
#include "h4g/rng.hpp"

namespace h4g {

void TrainConfig::validate() const {
  if (!(lr_encoder >= 0.0) || !(lr_scaling >= 0.0)) throw UsageError("learning rates must be >= 0");
  if (batch_size == 0) throw UsageError("batch size must be positive");
  if (!(grad_clip_max_norm > 0.0)) throw UsageError("gradient clip norm must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(adam_eps > 0.0)) {
    throw UsageError("invalid AdamW moment coefficients");
  }
  if (!(weight_decay >= 0.0)) throw UsageError("weight decay must be >= 0");
}

namespace {

double log_sum_exp(std::span<const double> v) {
  const double hi = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - hi);
  return hi + std::log(s);
}

// Softmax of -D/tau along rows (by_row) or columns.
Matrix softmax_neg(const Matrix& d, double tau, bool by_row) {
  const std::size_t b = d.rows();
  Matrix p(b, b);
  std::vector<double> logits(b);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) logits[j] = -(by_row ? d(i, j) : d(j, i)) / tau;
    const double lse = log_sum_exp(logits);
    for (std::size_t j = 0; j < b; ++j) {
      (by_row ? p(i, j) : p(j, i)) = std::exp(logits[j] - lse);
    }
  }
  return p;
}

double directional_loss(const Matrix& d, double tau, bool by_row) {
  const std::size_t b = d.rows();
  std::vector<double> logits(b);
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) logits[j] = -(by_row ? d(i, j) : d(j, i)) / tau;
    total += log_sum_exp(logits) - logits[i];
  }
  return total / static_cast<double>(b);
}

void check_finite(std::span<const double> v, const std::string& where) {
  if (!all_finite(v)) throw NumericalError(where);
}

void check_finite(double v, const std::string& where) {
  if (!std::isfinite(v)) throw NumericalError(where);
}

// Activations of one modality for the whole batch.
struct SideTape {
  std::vector<Vector> input;    // encoder output (graph) or text embedding
  std::vector<Vector> tangent;  // W h + b
  std::vector<Vector> lifted;
  std::vector<Vector> scaled;
  std::vector<ball::MatvecCache> caches;
};

void forward_side(const AlignmentModel& model, const EuclideanProjection& proj,
                  const BlockDiagScaling& scale, SideTape& tape, const char* label) {
  const double c = model.config.curvature;
  const bool euclidean = model.config.ablation.euclidean_space;
  const std::size_t b = tape.input.size();
  const std::size_t d = model.config.d;
  tape.tangent.assign(b, Vector(d));
  tape.lifted.assign(b, Vector(d));
  tape.scaled.assign(b, Vector(d));
  tape.caches.assign(b, {});
  for (std::size_t i = 0; i < b; ++i) {
    check_finite(tape.input[i], std::string(label) + ".encoder_output[" + std::to_string(i) + "]");
    matvec(proj.weight(), tape.input[i], tape.tangent[i]);
    for (std::size_t r = 0; r < d; ++r) tape.tangent[i][r] += proj.bias()[r];
    check_finite(tape.tangent[i], std::string(label) + ".projection[" + std::to_string(i) + "]");
    if (euclidean) {
      tape.lifted[i] = tape.tangent[i];
      tape.scaled[i] = tape.tangent[i];
      continue;
    }
    ball::exp_map(tape.tangent[i], c, tape.lifted[i]);
    check_finite(tape.lifted[i], std::string(label) + ".exp_map[" + std::to_string(i) + "]");
    ball::block_matvec(scale.blocks(), tape.lifted[i], c, tape.scaled[i], tape.caches[i]);
    ball::clamp(tape.scaled[i], c);
    check_finite(tape.scaled[i], std::string(label) + ".scaling[" + std::to_string(i) + "]");
  }
}

// grad_scaled -> parameter gradients of one side; returns d/d(input).
std::vector<Vector> backward_side(const AlignmentModel& model, const EuclideanProjection& proj,
                                  const BlockDiagScaling& scale, const SideTape& tape,
                                  const std::vector<Vector>& grad_scaled, std::span<double> grad_w,
                                  std::span<double> grad_b, std::span<double> grad_blocks_flat,
                                  bool need_input_grad, const char* label) {
  const double c = model.config.curvature;
  const bool euclidean = model.config.ablation.euclidean_space;
  const std::size_t b = tape.input.size();
  const std::size_t d = model.config.d;
  const std::size_t n = scale.block_size();

  std::vector<Matrix> grad_blocks(scale.block_count(), Matrix(n, n));
  Matrix gw(proj.weight().rows(), proj.weight().cols());
  std::vector<Vector> grad_input(need_input_grad ? b : 0, Vector(proj.input_dim(), 0.0));
  Vector g_lifted(d), g_tangent(d);

  for (std::size_t i = 0; i < b; ++i) {
    if (euclidean) {
      g_tangent = grad_scaled[i];
    } else {
      std::fill(g_lifted.begin(), g_lifted.end(), 0.0);
      ball::block_matvec_backward(scale.blocks(), tape.lifted[i], c, tape.caches[i], grad_scaled[i],
                                  g_lifted, grad_blocks);
      std::fill(g_tangent.begin(), g_tangent.end(), 0.0);
      ball::exp_map_backward(tape.tangent[i], c, g_lifted, g_tangent);
    }
    check_finite(g_tangent, std::string(label) + ".grad_projection[" + std::to_string(i) + "]");
    outer_add(g_tangent, tape.input[i], gw);
    for (std::size_t r = 0; r < d; ++r) grad_b[r] += g_tangent[r];
    if (need_input_grad) matvec_transposed_add(proj.weight(), g_tangent, grad_input[i]);
  }
  kernels::axpy(1.0, gw.values(), grad_w);
  for (std::size_t k = 0; k < grad_blocks.size(); ++k) {
    kernels::axpy(1.0, grad_blocks[k].values(), grad_blocks_flat.subspan(k * n * n, n * n));
  }
  return grad_input;
}

struct BatchForward {
  gnn::Activations gnn;
  SideTape graph;
  SideTape text;
  Matrix distances;
  LossBreakdown loss;
};

void validate_batch(const AlignmentModel& model, const GraphTextBatch& batch) {
  if (batch.graph == nullptr || batch.features == nullptr) throw UsageError("batch has no graph");
  if (batch.nodes.empty()) throw UsageError("batch is empty");
  if (batch.features->cols() != model.config.d_t) {
    throw UsageError("features have dimension " + std::to_string(batch.features->cols()) +
                     " but the model expects d_t = " + std::to_string(model.config.d_t));
  }
}

BatchForward run_forward(const AlignmentModel& model, const GraphTextBatch& batch) {
  validate_batch(model, batch);
  BatchForward f;
  const std::size_t b = batch.nodes.size();
  f.gnn = gnn::forward(model.graph_encoder, *batch.graph, *batch.features, batch.nodes);
  for (std::size_t node : batch.nodes) {
    const auto h = f.gnn.out.back().row(node);
    f.graph.input.emplace_back(h.begin(), h.end());
    const auto t = batch.features->row(node);
    f.text.input.emplace_back(t.begin(), t.end());
  }
  forward_side(model, model.proj_g, model.scale_g, f.graph, "graph");
  forward_side(model, model.proj_t, model.scale_t, f.text, "text");

  f.distances = Matrix(b, b);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      f.distances(i, j) = embedding_distance(model.config, f.graph.scaled[i], f.text.scaled[j]);
    }
  }
  check_finite(f.distances.values(), "distance_matrix");
  f.loss.align = align_loss_from_distances(f.distances, model.config.temperature, model.config.symmetric_loss);
  f.loss.reg = reg_loss(model.scale_g, model.scale_t, model.config.effective_lambda());
  f.loss.total = f.loss.align + f.loss.reg;
  check_finite(f.loss.total, "total_loss");
  return f;
}

}  // namespace

double align_loss_from_distances(const Matrix& distances, double tau, bool symmetric) {
  if (distances.rows() == 0 || distances.rows() != distances.cols()) {
    throw UsageError("distance matrix must be square and nonempty");
  }
  if (!(tau > 0.0)) throw UsageError("temperature must be positive");
  const double rows = directional_loss(distances, tau, true);
  if (!symmetric) return rows;
  return 0.5 * (rows + directional_loss(distances, tau, false));
}

double align_loss(std::span<const PoincarePoint> batch_graph, std::span<const PoincarePoint> batch_text,
                  double tau) {
  if (batch_graph.empty()) throw UsageError("align_loss: empty batch");
  if (batch_graph.size() != batch_text.size()) {
    throw UsageError("align_loss: " + std::to_string(batch_graph.size()) + " graph points vs " +
                     std::to_string(batch_text.size()) + " text points");
  }
  const std::size_t b = batch_graph.size();
  Matrix d(b, b);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) d(i, j) = distance(batch_graph[i], batch_text[j]);
  }
  return align_loss_from_distances(d, tau);
}

double reg_loss(const BlockDiagScaling& scale_g, const BlockDiagScaling& scale_t, double lambda_r) {
  double total = 0.0;
  for (std::size_t k = 0; k < scale_g.block_count(); ++k) {
    total += squared_distance_to_identity(scale_g.block(k));
    // Both scalings share K in every model; tolerate unequal counts anyway.
    if (k < scale_t.block_count()) total += squared_distance_to_identity(scale_t.block(k));
  }
  for (std::size_t k = scale_g.block_count(); k < scale_t.block_count(); ++k) {
    total += squared_distance_to_identity(scale_t.block(k));
  }
  return lambda_r * total;
}

LossBreakdown total_loss(const AlignmentModel& model, const GraphTextBatch& batch) {
  return run_forward(model, batch).loss;
}

GradientResult gradient(const AlignmentModel& model, const GraphTextBatch& batch) {
  const BatchForward f = run_forward(model, batch);
  const std::size_t b = batch.nodes.size();
  const double tau = model.config.temperature;
  const double c = model.config.curvature;
  const bool euclidean = model.config.ablation.euclidean_space;

  // dL/dD_ij = (delta_ij - P_ij) / (B tau), per normalisation direction.
  Matrix grad_d(b, b);
  const double weight = model.config.symmetric_loss ? 0.5 : 1.0;
  const double scale = weight / (static_cast<double>(b) * tau);
  const Matrix p_row = softmax_neg(f.distances, tau, true);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) grad_d(i, j) = scale * ((i == j ? 1.0 : 0.0) - p_row(i, j));
  }
  if (model.config.symmetric_loss) {
    const Matrix p_col = softmax_neg(f.distances, tau, false);
    for (std::size_t i = 0; i < b; ++i) {
      for (std::size_t j = 0; j < b; ++j) grad_d(i, j) += scale * ((i == j ? 1.0 : 0.0) - p_col(i, j));
    }
  }

  const std::size_t d = model.config.d;
  std::vector<Vector> g_graph(b, Vector(d, 0.0));
  std::vector<Vector> g_text(b, Vector(d, 0.0));
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      const double g = grad_d(i, j);
      const auto x = std::span<const double>(f.graph.scaled[i]);
      const auto y = std::span<const double>(f.text.scaled[j]);
      if (euclidean) {
        const double dist = f.distances(i, j);
        if (dist == 0.0) continue;
        for (std::size_t r = 0; r < d; ++r) {
          const double u = g * (x[r] - y[r]) / dist;
          g_graph[i][r] += u;
          g_text[j][r] -= u;
        }
      } else {
        ball::distance_backward(x, y, c, g, g_graph[i], g_text[j]);
      }
    }
  }

  GradientResult out;
  out.loss = f.loss;
  out.grad.assign(parameter_count(model), 0.0);
  const auto layout = parameter_layout(model);
  auto slot = [&](std::size_t idx, std::size_t count = 1) {
    const ParamEntry& first = layout[idx];
    std::size_t size = 0;
    for (std::size_t k = 0; k < count; ++k) size += layout[idx + k].size();
    return std::span<double>(out.grad).subspan(first.offset, size);
  };
  const std::size_t layers = model.graph_encoder.num_layers();
  const std::size_t blocks = model.scale_g.block_count();
  const std::size_t pg = layers, pt = layers + 2, sg = layers + 4, st = layers + 4 + blocks;

  const std::vector<Vector> g_hg = backward_side(model, model.proj_g, model.scale_g, f.graph, g_graph,
                                                 slot(pg), slot(pg + 1), slot(sg, blocks), true, "graph");
  backward_side(model, model.proj_t, model.scale_t, f.text, g_text, slot(pt), slot(pt + 1),
                slot(st, model.scale_t.block_count()), false, "text");

  std::vector<Matrix> g_enc;
  for (const Matrix& w : model.graph_encoder.weights()) g_enc.emplace_back(w.rows(), w.cols());
  gnn::backward(model.graph_encoder, *batch.graph, f.gnn, batch.nodes, g_hg, g_enc);
  for (std::size_t l = 0; l < layers; ++l) kernels::axpy(1.0, g_enc[l].values(), slot(l));

  const double lambda = model.config.effective_lambda();
  if (lambda != 0.0) {
    auto add_reg = [&](const BlockDiagScaling& s, std::size_t first) {
      for (std::size_t k = 0; k < s.block_count(); ++k) {
        auto g = slot(first + k);
        const Matrix& m = s.block(k);
        for (std::size_t r = 0; r < m.rows(); ++r) {
          for (std::size_t col = 0; col < m.cols(); ++col) {
            g[r * m.cols() + col] += 2.0 * lambda * (m(r, col) - (r == col ? 1.0 : 0.0));
          }
        }
      }
    };
    add_reg(model.scale_g, sg);
    add_reg(model.scale_t, st);
  }
  for (const ParamEntry& e : layout) {
    check_finite(std::span<const double>(out.grad).subspan(e.offset, e.size()), "grad." + e.name);
  }
  return out;
}

double clip_gradient(std::span<double> grad, double max_norm) {
  const double total = norm(grad);
  if (total > max_norm) {
    const double s = max_norm / total;
    for (double& g : grad) g *= s;
  }
  return total;
}

AdamW::AdamW(const std::vector<ParamEntry>& layout, const TrainConfig& cfg)
    : beta1_(cfg.beta1), beta2_(cfg.beta2), eps_(cfg.adam_eps), weight_decay_(cfg.weight_decay) {
  for (const ParamEntry& e : layout) {
    const double lr = e.group == ParamGroup::scaling ? cfg.lr_scaling : cfg.lr_encoder;
    lr_.insert(lr_.end(), e.size(), lr);
  }
  m_.assign(lr_.size(), 0.0);
  v_.assign(lr_.size(), 0.0);
}

void AdamW::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != lr_.size() || grad.size() != lr_.size()) {
    throw UsageError("AdamW: parameter count changed");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (lr_[i] == 0.0) continue;
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    const double m_hat = m_[i] / bc1;
    const double v_hat = v_[i] / bc2;
    params[i] -= lr_[i] * (m_hat / (std::sqrt(v_hat) + eps_) + weight_decay_ * params[i]);
  }
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw UsageError("percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

RadiusSummary summarize_radii(const AlignmentModel& model, const TextAttributedGraph& graph,
                              const FeatureMatrix& features) {
  std::vector<std::size_t> nodes(graph.num_nodes());
  std::iota(nodes.begin(), nodes.end(), std::size_t{0});
  const EmbeddingSet g = embed_graph_nodes(model, graph, features, nodes);
  std::vector<Vector> texts;
  texts.reserve(nodes.size());
  for (std::size_t i : nodes) texts.emplace_back(features.row(i).begin(), features.row(i).end());
  const EmbeddingSet t = embed_text_vectors(model, texts);

  RadiusSummary s;
  std::vector<double> pooled;
  double sum_g = 0.0, sum_t = 0.0;
  for (const Vector& v : g.scaled) {
    pooled.push_back(embedding_radius(model.config, v));
    sum_g += pooled.back();
  }
  for (const Vector& v : t.scaled) {
    pooled.push_back(embedding_radius(model.config, v));
    sum_t += pooled.back();
  }
  s.mean_radius_graph = sum_g / static_cast<double>(nodes.size());
  s.mean_radius_text = sum_t / static_cast<double>(nodes.size());
  s.r_p5 = percentile(pooled, 5.0);
  s.r_p50 = percentile(pooled, 50.0);
  s.r_p95 = percentile(pooled, 95.0);
  return s;
}

double finite_difference(const AlignmentModel& model, const GraphTextBatch& batch, std::size_t index,
                         double step) {
  std::vector<double> params = flatten(model);
  const double saved = params.at(index);
  params[index] = saved + step;
  const double up = total_loss(with_parameters(model, params), batch).total;
  params[index] = saved - step;
  const double down = total_loss(with_parameters(model, params), batch).total;
  return (up - down) / (2.0 * step);
}

TrainResult train(const AlignmentModel& initial, const TextAttributedGraph& graph, const TrainConfig& cfg) {
  cfg.validate();
  if (graph.num_nodes() == 0) throw UsageError("training graph has no nodes");
  const FeatureMatrix features = node_features(initial.text_embedder, graph);
  const auto layout = parameter_layout(initial);
  const bool frozen_scaling = initial.config.ablation.no_radius_adjustment;

  TrainResult result{initial, {}, false, {}};
  result.report.initial = summarize_radii(initial, graph, features);

  std::vector<double> params = flatten(initial);
  AdamW optimizer(layout, cfg);
  Rng rng(cfg.seed ^ 0x5851f42d4c957f2dULL);
  Rng fd_rng(cfg.seed ^ 0x14057b7ef767814fULL);  // spot checks must not perturb the batch order
  std::vector<std::size_t> order(graph.num_nodes());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t global_step = 0;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    EpochRecord rec;
    rec.epoch = epoch;
    std::size_t steps = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      GraphTextBatch batch{&graph, &features, {}};
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      batch.nodes.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
      GradientResult g;
      try {
        g = gradient(result.model, batch);
      } catch (const NumericalError& e) {
        result.diverged = true;
        result.failure = "epoch " + std::to_string(epoch) + ": " + e.what();
        return result;
      }
      if (frozen_scaling) {
        for (const ParamEntry& e : layout) {
          if (e.group == ParamGroup::scaling) {
            std::fill_n(g.grad.begin() + static_cast<std::ptrdiff_t>(e.offset), e.size(), 0.0);
          }
        }
      }
      ++global_step;
      if (cfg.fd_check_frequency != 0 && global_step % cfg.fd_check_frequency == 0) {
        // A handful of coordinates, one per parameter tensor.
        for (const ParamEntry& e : layout) {
          const std::size_t idx = e.offset + static_cast<std::size_t>(fd_rng.index(e.size()));
          const double fd = finite_difference(result.model, batch, idx);
          const double err = std::abs(fd - g.grad[idx]);
          const double rel = err <= 1e-7 ? 0.0 : err / std::max(std::abs(fd), std::abs(g.grad[idx]));
          rec.fd_max_rel_error = std::max(rec.fd_max_rel_error, rel);
        }
      }
      clip_gradient(g.grad, cfg.grad_clip_max_norm);
      std::vector<double> next = params;
      optimizer.step(next, g.grad);
      if (!all_finite(next)) {
        result.diverged = true;
        result.failure = "epoch " + std::to_string(epoch) + ": parameter update produced non-finite values";
        return result;
      }
      params = std::move(next);
      result.model = with_parameters(result.model, params);
      rec.align_loss += g.loss.align;
      rec.reg_loss += g.loss.reg;
      rec.total_loss += g.loss.total;
      ++steps;
    }
    const double inv = 1.0 / static_cast<double>(steps);
    rec.align_loss *= inv;
    rec.reg_loss *= inv;
    rec.total_loss *= inv;
    rec.radii = summarize_radii(result.model, graph, features);
    rec.scaling_g = scaling_stats(result.model.scale_g);
    rec.scaling_t = scaling_stats(result.model.scale_t);
    result.report.epochs.push_back(rec);
  }
  return result;
}

}  // namespace h4g
