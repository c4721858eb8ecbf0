#include "h4g/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "h4g/errors.hpp"

namespace h4g {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

constexpr const char* kModelMagic = "H4G-MODEL v1";

std::string hex_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::hex);
  return std::string(buf, res.ptr);
}

std::uint64_t to_little_endian(std::uint64_t bits) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(bits);
  return bits;
}

}  // namespace

void write_model(std::ostream& out, const AlignmentModel& model) {
  const ModelConfig& c = model.config;
  out << kModelMagic << '\n';
  out << "d " << c.d << '\n'
      << "d_g " << c.d_g << '\n'
      << "d_hidden " << c.d_hidden << '\n'
      << "d_t " << c.d_t << '\n'
      << "gnn_layers " << c.gnn_layers << '\n'
      << "block_size " << c.block_size << '\n'
      << "curvature " << hex_double(c.curvature) << '\n'
      << "temperature " << hex_double(c.temperature) << '\n'
      << "lambda_r " << hex_double(c.lambda_r) << '\n'
      << "init_sigma " << hex_double(c.init_sigma) << '\n'
      << "text_seed " << c.text_seed << '\n'
      << "symmetric_loss " << int(c.symmetric_loss) << '\n'
      << "no_radius_adjustment " << int(c.ablation.no_radius_adjustment) << '\n'
      << "euclidean_space " << int(c.ablation.euclidean_space) << '\n'
      << "dense_scaling " << int(c.ablation.dense_scaling) << '\n'
      << "no_regularization " << int(c.ablation.no_regularization) << '\n';
  const auto layout = parameter_layout(model);
  for (const ParamEntry& e : layout) out << "tensor " << e.name << ' ' << e.rows << ' ' << e.cols << '\n';
  const std::vector<double> values = flatten(model);
  out << "payload " << values.size() << '\n';
  for (double v : values) {
    const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(v));
    char raw[8];
    std::memcpy(raw, &bits, 8);
    out.write(raw, 8);
  }
}

AlignmentModel read_model(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto next = [&](const char* expect) {
    if (!std::getline(in, line) || in.eof()) {
      throw ParseError(lineno + 1, std::string("unexpected end of file, expected ") + expect);
    }
    ++lineno;
  };
  auto field = [&](const std::string& key) -> std::string {
    next(key.c_str());
    if (line.rfind(key + " ", 0) != 0) throw ParseError(lineno, "expected '" + key + " <value>'");
    return line.substr(key.size() + 1);
  };
  auto as_size = [&](const std::string& key) {
    const std::string v = field(key);
    std::size_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size()) throw ParseError(lineno, "invalid integer for " + key);
    return out;
  };
  auto as_real = [&](const std::string& key) {
    const std::string v = field(key);
    double out = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out, std::chars_format::hex);
    if (ec != std::errc{} || p != v.data() + v.size()) throw ParseError(lineno, "invalid real for " + key);
    return out;
  };
  auto as_flag = [&](const std::string& key) {
    const std::size_t v = as_size(key);
    if (v > 1) throw ParseError(lineno, key + " must be 0 or 1");
    return v == 1;
  };

  next("header");
  if (line != kModelMagic) throw ParseError(lineno, std::string("expected '") + kModelMagic + "'");
  ModelConfig c;
  c.d = as_size("d");
  c.d_g = as_size("d_g");
  c.d_hidden = as_size("d_hidden");
  c.d_t = as_size("d_t");
  c.gnn_layers = as_size("gnn_layers");
  c.block_size = as_size("block_size");
  c.curvature = as_real("curvature");
  c.temperature = as_real("temperature");
  c.lambda_r = as_real("lambda_r");
  c.init_sigma = as_real("init_sigma");
  {
    const std::string v = field("text_seed");
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), c.text_seed);
    if (ec != std::errc{} || p != v.data() + v.size()) throw ParseError(lineno, "invalid text_seed");
  }
  c.symmetric_loss = as_flag("symmetric_loss");
  c.ablation.no_radius_adjustment = as_flag("no_radius_adjustment");
  c.ablation.euclidean_space = as_flag("euclidean_space");
  c.ablation.dense_scaling = as_flag("dense_scaling");
  c.ablation.no_regularization = as_flag("no_regularization");
  try {
    c.validate();
  } catch (const UsageError& e) {
    throw ParseError(lineno, std::string("inconsistent model header: ") + e.what());
  }

  // Shape template; the payload overwrites every value.
  ModelConfig shape = c;
  shape.init_sigma = 0.0;
  AlignmentModel skeleton = AlignmentModel::initialize(shape, 0);
  skeleton.config = c;
  const auto layout = parameter_layout(skeleton);
  for (const ParamEntry& e : layout) {
    next("tensor manifest");
    std::istringstream ls(line);
    std::string tag, name;
    std::size_t rows = 0, cols = 0;
    if (!(ls >> tag >> name >> rows >> cols) || tag != "tensor" || !ls.eof()) {
      throw ParseError(lineno, "expected 'tensor <name> <rows> <cols>'");
    }
    if (name != e.name || rows != e.rows || cols != e.cols) {
      throw ParseError(lineno, "manifest entry " + name + " does not match expected " + e.name + " " +
                                   std::to_string(e.rows) + "x" + std::to_string(e.cols));
    }
  }
  const std::size_t count = as_size("payload");
  if (count != parameter_count(skeleton)) throw ParseError(lineno, "payload size does not match manifest");
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    char raw[8];
    if (!in.read(raw, 8)) throw ParseError(0, "payload truncated after " + std::to_string(i) + " values");
    std::uint64_t bits = 0;
    std::memcpy(&bits, raw, 8);
    values[i] = std::bit_cast<double>(to_little_endian(bits));
    if (!std::isfinite(values[i])) throw ParseError(0, "payload value " + std::to_string(i) + " is not finite");
  }
  if (in.peek() != std::char_traits<char>::eof()) throw ParseError(0, "trailing bytes after payload");
  return with_parameters(skeleton, values);
}

void save_model(const AlignmentModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_model(out, model);
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

AlignmentModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  return read_model(in);
}

void write_report_csv(std::ostream& out, const TrainReport& report) {
  out << "epoch,align_loss,reg_loss,total_loss,mean_radius_graph,mean_radius_text,r_p5,r_p50,r_p95,"
         "svals_mean_g,svals_mean_t\n";
  for (const EpochRecord& r : report.epochs) {
    out << r.epoch << ',' << format_double(r.align_loss) << ',' << format_double(r.reg_loss) << ','
        << format_double(r.total_loss) << ',' << format_double(r.radii.mean_radius_graph) << ','
        << format_double(r.radii.mean_radius_text) << ',' << format_double(r.radii.r_p5) << ','
        << format_double(r.radii.r_p50) << ',' << format_double(r.radii.r_p95) << ','
        << format_double(r.scaling_g.mean_singular_value) << ','
        << format_double(r.scaling_t.mean_singular_value) << '\n';
  }
}

namespace {

nlohmann::json stats_json(const ScalingStats& s) {
  return {{"mean_singular_value", s.mean_singular_value},
          {"min_singular_value", s.min_singular_value},
          {"max_singular_value", s.max_singular_value},
          {"frobenius_dist_to_identity", s.frobenius_dist_to_identity}};
}

}  // namespace

void write_report_jsonl(std::ostream& out, const TrainReport& report) {
  for (const EpochRecord& r : report.epochs) {
    nlohmann::json j = {
        {"epoch", r.epoch},
        {"align_loss", r.align_loss},
        {"reg_loss", r.reg_loss},
        {"total_loss", r.total_loss},
        {"mean_radius_graph", r.radii.mean_radius_graph},
        {"mean_radius_text", r.radii.mean_radius_text},
        {"radius_percentiles", {{"p5", r.radii.r_p5}, {"p50", r.radii.r_p50}, {"p95", r.radii.r_p95}}},
        {"scaling_g", stats_json(r.scaling_g)},
        {"scaling_t", stats_json(r.scaling_t)},
    };
    if (r.fd_max_rel_error >= 0.0) j["fd_max_rel_error"] = r.fd_max_rel_error;
    out << j.dump() << '\n';
  }
}

std::string eval_json(const EvalResult& result) {
  nlohmann::json j;
  j["accuracy"] = result.accuracy;
  j["per_class"] = result.per_class_accuracy;  // NaN serialises as null
  j["confusion"] = result.confusion;
  return j.dump();
}

void write_histogram_csv(std::ostream& out, const std::vector<HistogramBin>& bins) {
  out << "bin_lower,count\n";
  for (const HistogramBin& b : bins) out << format_double(b.lower) << ',' << b.count << '\n';
}

}  // namespace h4g
