#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "h4g/data.hpp"
#include "h4g/inference.hpp"
#include "h4g/model.hpp"
#include "h4g/training.hpp"

namespace h4g {

/// Preset evaluation graphs are regenerated with this offset added to the
/// training seed, so zero-shot accuracy is measured on an unseen graph.
inline constexpr std::uint64_t kHeldOutSeedOffset = 1000;

/// Exactly one of `path` and `preset` is set.
struct DatasetSource {
  std::string path;
  std::string preset;

  /// Loads the file, or generates the preset with `seed`.
  TextAttributedGraph resolve(std::uint64_t seed) const;
  /// Graph for zero-shot evaluation after training on resolve(seed).
  TextAttributedGraph held_out(std::uint64_t seed) const;
  void validate() const;
};

struct ExperimentConfig {
  DatasetSource dataset;
  ModelConfig model;
  TrainConfig train;
  std::vector<std::uint64_t> seeds{0};
  std::filesystem::path out_dir = "out";
  std::size_t vocab_per_class = 16;  // for generated class descriptions
  double bin_width = 0.25;

  void validate() const;
};

/// Effective configuration as a JSON document.
std::string config_json(const ExperimentConfig& cfg);

struct TrainRun {
  std::uint64_t seed = 0;
  std::filesystem::path dir;
  TrainResult result;
  std::size_t parameter_count = 0;
};

/// Trains once per seed.  A single seed writes into out_dir; several seeds
/// write into out_dir/seed-<s>.  Each run directory gets model.h4g,
/// report.csv, report.jsonl and summary.json; out_dir gets config.json.
/// Diverged runs still write their files.
std::vector<TrainRun> run_train(const ExperimentConfig& cfg);

struct EvalSummary {
  std::vector<std::string> model_paths;
  std::vector<EvalResult> runs;
  double mean = 0.0;
  double std = 0.0;  // population
};

/// Evaluates every model on `graph`.  Throws UsageError when the models
/// disagree on dimensions or the descriptions do not cover the classes.
EvalSummary run_eval(const std::vector<std::string>& model_paths, const TextAttributedGraph& graph,
                     const std::vector<Tokens>& descriptions);
/// eval_json for one model; {"runs", "accuracies", "mean", "std"} for several.
std::string eval_summary_json(const EvalSummary& summary);

struct RadiusReport {
  std::vector<double> graph_before, graph_after, text_before, text_after;
};

/// Radii of every node's graph and text embedding before and after scaling.
RadiusReport radius_report(const AlignmentModel& model, const TextAttributedGraph& graph);
/// Histogram CSVs (padded with empty bins up to radius 10) and
/// radius_summary.json into `dir`.
void write_radius_report(const RadiusReport& report, double bin_width, const std::filesystem::path& dir);

struct SweepRow {
  std::size_t block_size = 0;
  double curvature = 0.0;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  std::string note;  // empty when the point ran to completion
};

/// Trains and evaluates every (n, c, seed) point.  Each point writes into
/// out_dir/n<n>_c<c>_seed<s>; sweep.csv collects the grid.
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, const std::vector<std::size_t>& block_sizes,
                                const std::vector<double>& curvatures);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// Zero-shot accuracy of `model` on `graph` with the given descriptions.
EvalResult zero_shot(const AlignmentModel& model, const TextAttributedGraph& graph,
                     const std::vector<Tokens>& descriptions);

}  // namespace h4g
