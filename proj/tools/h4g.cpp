// h4g: synthetic data generation, training, zero-shot evaluation, radius
// reports and parameter sweeps.
//
// Exit codes: 0 success, 1 usage or input error, 2 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "h4g/data.hpp"
#include "h4g/errors.hpp"
#include "h4g/experiment.hpp"
#include "h4g/io.hpp"
#include "h4g/kernels.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

struct DatasetFlags {
  std::string data;
  std::string preset;
};

void add_dataset_flags(CLI::App* cmd, DatasetFlags& flags) {
  auto* data = cmd->add_option("--data", flags.data, "Dataset file (H4G-TAG v1)");
  auto* pre = cmd->add_option("--preset", flags.preset, "Synthetic preset: homo or hetero");
  data->excludes(pre);
  pre->excludes(data);
}

h4g::DatasetSource to_source(const DatasetFlags& flags) {
  h4g::DatasetSource src{flags.data, flags.preset};
  src.validate();
  return src;
}

void add_model_flags(CLI::App* cmd, h4g::ExperimentConfig& cfg) {
  h4g::ModelConfig& m = cfg.model;
  cmd->add_option("--d", m.d, "Embedding dimension")->capture_default_str();
  cmd->add_option("--d-g", m.d_g, "Graph encoder output dimension")->capture_default_str();
  cmd->add_option("--d-hidden", m.d_hidden, "Graph encoder hidden width")->capture_default_str();
  cmd->add_option("--d-t", m.d_t, "Text embedding dimension")->capture_default_str();
  cmd->add_option("--gnn-layers", m.gnn_layers, "Graph encoder layers")->capture_default_str();
  cmd->add_option("--block-size", m.block_size, "Scaling block size n")->capture_default_str();
  cmd->add_option("--curvature", m.curvature, "Ball curvature c")->capture_default_str();
  cmd->add_option("--temperature", m.temperature, "Contrastive temperature")->capture_default_str();
  cmd->add_option("--lambda-r", m.lambda_r, "Scaling regularisation weight")->capture_default_str();
  cmd->add_option("--init-sigma", m.init_sigma, "Std of the scaling init noise")->capture_default_str();
  cmd->add_option("--text-seed", m.text_seed, "Hash seed of the text embedder")->capture_default_str();
  cmd->add_flag("--symmetric-loss", m.symmetric_loss, "Normalise over both directions");
  cmd->add_flag("--no-radius-adjustment", m.ablation.no_radius_adjustment, "Freeze scalings at identity");
  cmd->add_flag("--euclidean-space", m.ablation.euclidean_space, "Euclidean distances, no lift");
  cmd->add_flag("--dense-scaling", m.ablation.dense_scaling, "One dense d x d scaling");
  cmd->add_flag("--no-regularization", m.ablation.no_regularization, "Set lambda_r to 0");

  h4g::TrainConfig& t = cfg.train;
  cmd->add_option("--lr-encoder", t.lr_encoder, "Learning rate of encoders and projections")
      ->capture_default_str();
  cmd->add_option("--lr-scaling", t.lr_scaling, "Learning rate of scaling blocks")->capture_default_str();
  cmd->add_option("--epochs", t.epochs, "Training epochs")->capture_default_str();
  cmd->add_option("--batch-size", t.batch_size, "Pairs per step")->capture_default_str();
  cmd->add_option("--grad-clip", t.grad_clip_max_norm, "Global gradient norm limit")->capture_default_str();
  cmd->add_option("--weight-decay", t.weight_decay, "Decoupled weight decay")->capture_default_str();
  cmd->add_option("--fd-check-frequency", t.fd_check_frequency,
                  "Finite-difference spot check every k steps (0: off)")
      ->capture_default_str();
}

std::vector<h4g::Tokens> read_descriptions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::vector<h4g::Tokens> out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    h4g::Tokens tokens;
    for (std::string tok; ls >> tok;) tokens.push_back(tok);
    if (!tokens.empty()) out.push_back(std::move(tokens));
  }
  return out;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw std::runtime_error("cannot write '" + path + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radius-adjusted hyperbolic graph-text alignment experiments"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file of option defaults; command-line flags take precedence");
  std::string kernels = "auto";
  app.add_option("--kernels", kernels, "Kernel ISA: auto, scalar, avx2 or neon")->capture_default_str();

  // generate
  auto* gen = app.add_subcommand("generate", "Write a synthetic text-attributed graph");
  h4g::SyntheticSpec spec;
  std::string gen_preset;
  std::string gen_out;
  gen->add_option("--preset", gen_preset, "homo or hetero (overrides the spec flags)");
  gen->add_option("--nodes", spec.num_nodes)->capture_default_str();
  gen->add_option("--classes", spec.num_classes)->capture_default_str();
  gen->add_option("--mean-degree", spec.mean_degree)->capture_default_str();
  gen->add_option("--homophily", spec.homophily)->capture_default_str();
  gen->add_option("--tokens-per-node", spec.tokens_per_node)->capture_default_str();
  gen->add_option("--vocab-per-class", spec.vocab_per_class)->capture_default_str();
  gen->add_option("--noise-tokens", spec.noise_tokens)->capture_default_str();
  gen->add_option("--seed", spec.seed)->capture_default_str();
  gen->add_option("--out", gen_out, "Output file")->required();

  // train
  auto* tr = app.add_subcommand("train", "Train an alignment model per seed");
  h4g::ExperimentConfig train_cfg;
  DatasetFlags train_data;
  add_dataset_flags(tr, train_data);
  add_model_flags(tr, train_cfg);
  tr->add_option("--seed", train_cfg.seeds, "One or more seeds")->capture_default_str();
  tr->add_option("--out", train_cfg.out_dir, "Output directory")->capture_default_str();

  // eval
  auto* ev = app.add_subcommand("eval", "Zero-shot evaluation of one or more models");
  std::vector<std::string> eval_models;
  DatasetFlags eval_data;
  std::uint64_t eval_seed = 0;
  std::string eval_descriptions;
  std::size_t eval_vocab = 16;
  std::string eval_out;
  ev->add_option("--model", eval_models, "Model file; repeat for several seeds")->required();
  add_dataset_flags(ev, eval_data);
  ev->add_option("--seed", eval_seed, "Preset generation seed")->capture_default_str();
  ev->add_option("--descriptions", eval_descriptions, "One class description per line");
  ev->add_option("--vocab-per-class", eval_vocab, "Words per generated class description")
      ->capture_default_str();
  ev->add_option("--out", eval_out, "JSON output file (default: stdout)");

  // radius-report
  auto* rr = app.add_subcommand("radius-report", "Radius histograms before and after scaling");
  std::string rr_model;
  DatasetFlags rr_data;
  std::uint64_t rr_seed = 0;
  double bin_width = 0.25;
  std::string rr_out = "radius";
  rr->add_option("--model", rr_model, "Model file")->required();
  add_dataset_flags(rr, rr_data);
  rr->add_option("--seed", rr_seed, "Preset generation seed")->capture_default_str();
  rr->add_option("--bin-width", bin_width)->capture_default_str();
  rr->add_option("--out", rr_out, "Output directory")->capture_default_str();

  // sweep
  auto* sw = app.add_subcommand("sweep", "Accuracy grid over block size and curvature");
  h4g::ExperimentConfig sweep_cfg;
  DatasetFlags sweep_data;
  std::vector<std::size_t> block_sizes{8, 16, 32, 64};
  std::vector<double> curvatures{0.5, 1.0, 2.0};
  add_dataset_flags(sw, sweep_data);
  add_model_flags(sw, sweep_cfg);
  sw->add_option("--seed", sweep_cfg.seeds, "One or more seeds")->capture_default_str();
  sw->add_option("--block-sizes", block_sizes)->delimiter(',')->capture_default_str();
  sw->add_option("--curvatures", curvatures)->delimiter(',')->capture_default_str();
  sw->add_option("--vocab-per-class", sweep_cfg.vocab_per_class)->capture_default_str();
  sw->add_option("--out", sweep_cfg.out_dir, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    h4g::kernels::select(h4g::kernels::parse_isa(kernels));

    if (gen->parsed()) {
      if (!gen_preset.empty()) spec = h4g::preset(gen_preset, spec.seed);
      h4g::save(h4g::generate(spec), gen_out);
      std::printf("wrote %s\n", gen_out.c_str());
    } else if (tr->parsed()) {
      train_cfg.dataset = to_source(train_data);
      bool diverged = false;
      for (const h4g::TrainRun& run : h4g::run_train(train_cfg)) {
        const auto& rep = run.result.report;
        std::printf("seed %llu: %zu epochs, %zu parameters, mean radius graph %s text %s",
                    static_cast<unsigned long long>(run.seed), rep.epochs.size(), run.parameter_count,
                    h4g::format_double(rep.initial.mean_radius_graph).c_str(),
                    h4g::format_double(rep.initial.mean_radius_text).c_str());
        if (!rep.epochs.empty()) {
          std::printf(" -> graph %s text %s", h4g::format_double(rep.epochs.back().radii.mean_radius_graph).c_str(),
                      h4g::format_double(rep.epochs.back().radii.mean_radius_text).c_str());
        }
        std::printf("  [%s]\n", run.dir.string().c_str());
        if (run.result.diverged) {
          std::fprintf(stderr, "seed %llu diverged: %s\n", static_cast<unsigned long long>(run.seed),
                       run.result.failure.c_str());
          diverged = true;
        }
      }
      if (diverged) return kExitNumerical;
    } else if (ev->parsed()) {
      const h4g::TextAttributedGraph graph = to_source(eval_data).resolve(eval_seed);
      const auto descriptions = eval_descriptions.empty()
                                    ? h4g::class_descriptions(graph.num_classes(), eval_vocab)
                                    : read_descriptions(eval_descriptions);
      const std::string out = h4g::eval_summary_json(h4g::run_eval(eval_models, graph, descriptions));
      if (eval_out.empty()) {
        std::cout << out;
      } else {
        write_file(eval_out, out);
      }
    } else if (rr->parsed()) {
      const h4g::TextAttributedGraph graph = to_source(rr_data).resolve(rr_seed);
      if (!(bin_width > 0.0)) throw h4g::UsageError("bin width must be positive");
      const h4g::RadiusReport report = h4g::radius_report(h4g::load_model(rr_model), graph);
      h4g::write_radius_report(report, bin_width, rr_out);
      std::printf("wrote %s\n", rr_out.c_str());
    } else if (sw->parsed()) {
      sweep_cfg.dataset = to_source(sweep_data);
      const auto rows = h4g::run_sweep(sweep_cfg, block_sizes, curvatures);
      h4g::write_sweep_csv(std::cout, rows);
    }
  } catch (const h4g::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const h4g::DegenerateInputError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const h4g::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return 0;
}
