#include "h4g/experiment.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "h4g/errors.hpp"
#include "h4g/io.hpp"

namespace h4g {

namespace fs = std::filesystem;
using nlohmann::json;

TextAttributedGraph DatasetSource::resolve(std::uint64_t seed) const {
  validate();
  if (!path.empty()) return load(path);
  return generate(h4g::preset(preset, seed));
}

TextAttributedGraph DatasetSource::held_out(std::uint64_t seed) const {
  validate();
  if (!path.empty()) return load(path);
  return generate(h4g::preset(preset, seed + kHeldOutSeedOffset));
}

void DatasetSource::validate() const {
  if (path.empty() == preset.empty()) throw UsageError("exactly one of a dataset path or a preset is required");
  if (!preset.empty()) (void)h4g::preset(preset, 0);
}

void ExperimentConfig::validate() const {
  dataset.validate();
  model.validate();
  train.validate();
  if (seeds.empty()) throw UsageError("at least one seed is required");
  if (vocab_per_class == 0) throw UsageError("vocab_per_class must be positive");
  if (!(bin_width > 0.0)) throw UsageError("bin_width must be positive");
}

std::string config_json(const ExperimentConfig& cfg) {
  const ModelConfig& m = cfg.model;
  const TrainConfig& t = cfg.train;
  json j;
  j["dataset"] = cfg.dataset.path.empty() ? json{{"preset", cfg.dataset.preset}} : json{{"path", cfg.dataset.path}};
  j["seeds"] = cfg.seeds;
  j["out"] = cfg.out_dir.string();
  j["vocab_per_class"] = cfg.vocab_per_class;
  j["bin_width"] = cfg.bin_width;
  j["model"] = {{"d", m.d},
                {"d_g", m.d_g},
                {"d_hidden", m.d_hidden},
                {"d_t", m.d_t},
                {"gnn_layers", m.gnn_layers},
                {"block_size", m.block_size},
                {"curvature", m.curvature},
                {"temperature", m.temperature},
                {"lambda_r", m.lambda_r},
                {"init_sigma", m.init_sigma},
                {"text_seed", m.text_seed},
                {"symmetric_loss", m.symmetric_loss}};
  j["ablation"] = {{"no_radius_adjustment", m.ablation.no_radius_adjustment},
                   {"euclidean_space", m.ablation.euclidean_space},
                   {"dense_scaling", m.ablation.dense_scaling},
                   {"no_regularization", m.ablation.no_regularization}};
  j["train"] = {{"lr_encoder", t.lr_encoder},
                {"lr_scaling", t.lr_scaling},
                {"epochs", t.epochs},
                {"batch_size", t.batch_size},
                {"grad_clip_max_norm", t.grad_clip_max_norm},
                {"fd_check_frequency", t.fd_check_frequency},
                {"beta1", t.beta1},
                {"beta2", t.beta2},
                {"adam_eps", t.adam_eps},
                {"weight_decay", t.weight_decay}};
  return j.dump(2) + "\n";
}

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

json radii_json(const RadiusSummary& r) {
  return {{"mean_radius_graph", r.mean_radius_graph},
          {"mean_radius_text", r.mean_radius_text},
          {"r_p5", r.r_p5},
          {"r_p50", r.r_p50},
          {"r_p95", r.r_p95}};
}

void write_run_files(const TrainRun& run) {
  fs::create_directories(run.dir);
  save_model(run.result.model, (run.dir / "model.h4g").string());
  {
    auto out = open_out(run.dir / "report.csv");
    write_report_csv(out, run.result.report);
  }
  {
    auto out = open_out(run.dir / "report.jsonl");
    write_report_jsonl(out, run.result.report);
  }
  json s;
  s["seed"] = run.seed;
  s["parameter_count"] = run.parameter_count;
  s["epochs_completed"] = run.result.report.epochs.size();
  s["diverged"] = run.result.diverged;
  if (run.result.diverged) s["failure"] = run.result.failure;
  s["initial"] = radii_json(run.result.report.initial);
  if (!run.result.report.epochs.empty()) s["final"] = radii_json(run.result.report.epochs.back().radii);
  write_text(run.dir / "summary.json", s.dump(2) + "\n");
}

TrainRun train_one(const ExperimentConfig& cfg, std::uint64_t seed, fs::path dir) {
  const TextAttributedGraph graph = cfg.dataset.resolve(seed);
  const AlignmentModel init = AlignmentModel::initialize(cfg.model, seed);
  TrainConfig tc = cfg.train;
  tc.seed = seed;
  TrainRun run{seed, std::move(dir), train(init, graph, tc), parameter_count(init)};
  write_run_files(run);
  return run;
}

}  // namespace

std::vector<TrainRun> run_train(const ExperimentConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.out_dir);
  write_text(cfg.out_dir / "config.json", config_json(cfg));
  std::vector<TrainRun> runs;
  for (std::uint64_t seed : cfg.seeds) {
    const fs::path dir = cfg.seeds.size() == 1 ? cfg.out_dir : cfg.out_dir / ("seed-" + std::to_string(seed));
    runs.push_back(train_one(cfg, seed, dir));
  }
  return runs;
}

EvalResult zero_shot(const AlignmentModel& model, const TextAttributedGraph& graph,
                     const std::vector<Tokens>& descriptions) {
  if (descriptions.size() != graph.num_classes()) {
    throw UsageError("dataset has " + std::to_string(graph.num_classes()) + " classes but " +
                     std::to_string(descriptions.size()) + " class descriptions were given");
  }
  if (!graph.fully_labeled()) throw UsageError("evaluation requires a fully labelled dataset");
  const FeatureMatrix features = node_features(model.text_embedder, graph);
  const auto prototypes = build_prototypes(model, descriptions);
  return evaluate(model, graph, features, graph.labels(), prototypes);
}

EvalSummary run_eval(const std::vector<std::string>& model_paths, const TextAttributedGraph& graph,
                     const std::vector<Tokens>& descriptions) {
  if (model_paths.empty()) throw UsageError("at least one model is required");
  EvalSummary summary;
  summary.model_paths = model_paths;
  std::vector<AlignmentModel> models;
  for (const std::string& path : model_paths) models.push_back(load_model(path));
  const ModelConfig& ref = models.front().config;
  for (std::size_t i = 1; i < models.size(); ++i) {
    const ModelConfig& other = models[i].config;
    auto check = [&](const char* name, std::size_t a, std::size_t b) {
      if (a != b) {
        throw UsageError(std::string("dimension mismatch: ") + model_paths.front() + " has " + name + "=" +
                         std::to_string(a) + " but " + model_paths[i] + " has " + name + "=" + std::to_string(b));
      }
    };
    check("d", ref.d, other.d);
    check("d_g", ref.d_g, other.d_g);
    check("d_t", ref.d_t, other.d_t);
  }
  for (const AlignmentModel& m : models) summary.runs.push_back(zero_shot(m, graph, descriptions));

  const double n = static_cast<double>(summary.runs.size());
  double sum = 0.0;
  for (const EvalResult& r : summary.runs) sum += r.accuracy;
  summary.mean = sum / n;
  double ss = 0.0;
  for (const EvalResult& r : summary.runs) ss += (r.accuracy - summary.mean) * (r.accuracy - summary.mean);
  summary.std = std::sqrt(ss / n);
  return summary;
}

std::string eval_summary_json(const EvalSummary& summary) {
  if (summary.runs.size() == 1) return eval_json(summary.runs.front()) + "\n";
  json j;
  j["runs"] = json::array();
  std::vector<double> accuracies;
  for (std::size_t i = 0; i < summary.runs.size(); ++i) {
    json r = json::parse(eval_json(summary.runs[i]));
    r["model"] = summary.model_paths.at(i);
    j["runs"].push_back(std::move(r));
    accuracies.push_back(summary.runs[i].accuracy);
  }
  j["accuracies"] = accuracies;
  j["mean"] = summary.mean;
  j["std"] = summary.std;
  return j.dump() + "\n";
}

RadiusReport radius_report(const AlignmentModel& model, const TextAttributedGraph& graph) {
  const FeatureMatrix features = node_features(model.text_embedder, graph);
  std::vector<std::size_t> nodes(graph.num_nodes());
  std::iota(nodes.begin(), nodes.end(), std::size_t{0});
  const EmbeddingSet g = embed_graph_nodes(model, graph, features, nodes);
  std::vector<Vector> texts;
  texts.reserve(graph.num_nodes());
  for (std::size_t i = 0; i < graph.num_nodes(); ++i) {
    const auto row = features.row(i);
    texts.emplace_back(row.begin(), row.end());
  }
  const EmbeddingSet t = embed_text_vectors(model, texts);

  RadiusReport report;
  auto radii = [&](const std::vector<Vector>& v, std::vector<double>& out) {
    out.reserve(v.size());
    for (const Vector& x : v) out.push_back(embedding_radius(model.config, x));
  };
  radii(g.lifted, report.graph_before);
  radii(g.scaled, report.graph_after);
  radii(t.lifted, report.text_before);
  radii(t.scaled, report.text_after);
  return report;
}

namespace {

constexpr double kHistogramRange = 10.0;

std::vector<HistogramBin> padded_histogram(std::span<const double> radii, double bin_width) {
  std::vector<HistogramBin> bins = radius_histogram(radii, bin_width);
  const auto wanted = static_cast<std::size_t>(std::ceil(kHistogramRange / bin_width));
  while (bins.size() < wanted) bins.push_back({static_cast<double>(bins.size()) * bin_width, 0});
  return bins;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

void write_radius_report(const RadiusReport& report, double bin_width, const fs::path& dir) {
  fs::create_directories(dir);
  const std::pair<const char*, const std::vector<double>*> series[] = {
      {"graph_before", &report.graph_before},
      {"graph_after", &report.graph_after},
      {"text_before", &report.text_before},
      {"text_after", &report.text_after},
  };
  json summary;
  for (const auto& [name, radii] : series) {
    auto out = open_out(dir / (std::string(name) + ".csv"));
    write_histogram_csv(out, padded_histogram(*radii, bin_width));
    summary[std::string("mean_radius_") + name] = mean(*radii);
  }
  summary["count"] = report.graph_before.size();
  summary["bin_width"] = bin_width;
  write_text(dir / "radius_summary.json", summary.dump(2) + "\n");
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const std::vector<std::size_t>& block_sizes,
                                const std::vector<double>& curvatures) {
  cfg.validate();
  fs::create_directories(cfg.out_dir);
  write_text(cfg.out_dir / "config.json", config_json(cfg));
  const auto descriptions_for = [&](const TextAttributedGraph& g) {
    return class_descriptions(g.num_classes(), cfg.vocab_per_class);
  };
  std::vector<SweepRow> rows;
  for (std::size_t n : block_sizes) {
    for (double c : curvatures) {
      for (std::uint64_t seed : cfg.seeds) {
        SweepRow row{n, c, seed, std::nan(""), {}};
        if (n == 0 || cfg.model.d % n != 0) {
          row.note = "n does not divide d";
          rows.push_back(row);
          continue;
        }
        ExperimentConfig point = cfg;
        point.model.block_size = n;
        point.model.curvature = c;
        const fs::path dir =
            cfg.out_dir / ("n" + std::to_string(n) + "_c" + format_double(c) + "_seed" + std::to_string(seed));
        const TrainRun run = train_one(point, seed, dir);
        if (run.result.diverged) {
          row.note = "diverged";
        } else {
          const TextAttributedGraph eval_graph = point.dataset.held_out(seed);
          row.accuracy = zero_shot(run.result.model, eval_graph, descriptions_for(eval_graph)).accuracy;
        }
        rows.push_back(row);
      }
    }
  }
  auto out = open_out(cfg.out_dir / "sweep.csv");
  write_sweep_csv(out, rows);
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "block_size,curvature,seed,accuracy,note\n";
  for (const SweepRow& r : rows) {
    out << r.block_size << ',' << format_double(r.curvature) << ',' << r.seed << ','
        << (r.note.empty() ? format_double(r.accuracy) : std::string()) << ',' << r.note << '\n';
  }
}

}  // namespace h4g
