#include "h4g/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "h4g/errors.hpp"
#include "h4g/rng.hpp"

namespace h4g {

TextAttributedGraph::TextAttributedGraph(std::size_t num_nodes, std::size_t num_classes,
                                         std::vector<Edge> edges, std::vector<Tokens> tokens,
                                         std::vector<int> labels)
    : num_classes_(num_classes), edges_(std::move(edges)), tokens_(std::move(tokens)),
      labels_(std::move(labels)), adjacency_(num_nodes) {
  if (tokens_.size() != num_nodes) {
    throw UsageError("graph has " + std::to_string(num_nodes) + " nodes but " +
                     std::to_string(tokens_.size()) + " token lists");
  }
  if (labels_.empty()) labels_.assign(num_nodes, kNoLabel);
  if (labels_.size() != num_nodes) throw UsageError("label count does not match node count");
  for (int y : labels_) {
    if (y != kNoLabel && (y < 0 || static_cast<std::size_t>(y) >= num_classes_)) {
      throw UsageError("label " + std::to_string(y) + " outside [0, " + std::to_string(num_classes_) + ")");
    }
  }
  for (Edge& e : edges_) {
    if (e.first >= num_nodes || e.second >= num_nodes) {
      throw UsageError("edge endpoint out of range");
    }
    if (e.first == e.second) throw UsageError("self-loop on node " + std::to_string(e.first));
    if (e.first > e.second) std::swap(e.first, e.second);
  }
  std::sort(edges_.begin(), edges_.end());
  if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end()) {
    throw UsageError("duplicate edge");
  }
  for (const Edge& e : edges_) {
    adjacency_[e.first].push_back(e.second);
    adjacency_[e.second].push_back(e.first);
  }
  for (auto& nb : adjacency_) std::sort(nb.begin(), nb.end());
}

bool TextAttributedGraph::fully_labeled() const noexcept {
  return std::none_of(labels_.begin(), labels_.end(), [](int y) { return y == kNoLabel; });
}

std::string class_word(std::size_t k, std::size_t j) {
  return "c" + std::to_string(k) + "w" + std::to_string(j);
}

std::string noise_word(std::size_t j) { return "n" + std::to_string(j); }

TextAttributedGraph generate(const SyntheticSpec& spec) {
  if (spec.num_nodes < 2 || spec.num_classes < 1 || spec.tokens_per_node < 1 ||
      spec.vocab_per_class < 1) {
    throw UsageError("synthetic spec needs num_nodes >= 2 and positive class/token counts");
  }
  if (!(spec.homophily >= 0.0 && spec.homophily <= 1.0)) {
    throw UsageError("homophily must lie in [0, 1]");
  }
  if (!(spec.mean_degree > 0.0) || !(spec.mean_degree < static_cast<double>(spec.num_nodes))) {
    throw UsageError("mean_degree must be positive and below num_nodes (" +
                     std::to_string(spec.num_nodes) + ")");
  }
  Rng rng(spec.seed);
  const std::size_t n = spec.num_nodes;

  std::vector<int> labels(n);
  std::vector<std::vector<std::size_t>> members(spec.num_classes);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = static_cast<int>(rng.index(spec.num_classes));
    members[static_cast<std::size_t>(labels[i])].push_back(i);
  }

  std::vector<Tokens> tokens(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(labels[i]);
    for (std::size_t t = 0; t < spec.tokens_per_node; ++t) {
      tokens[i].push_back(class_word(k, rng.index(spec.vocab_per_class)));
    }
    for (std::size_t t = 0; t < spec.noise_tokens; ++t) {
      tokens[i].push_back(noise_word(rng.index(spec.vocab_per_class)));
    }
    rng.shuffle(std::span<std::string>(tokens[i]));
  }

  const auto target = static_cast<std::size_t>(std::llround(static_cast<double>(n) * spec.mean_degree / 2.0));
  std::set<Edge> edges;
  const std::size_t budget = 1000 + 100 * target;
  std::size_t attempts = 0;
  // The edge kind is drawn once per edge and kept across rejected pairs, so
  // self-loop and duplicate rejections do not skew the homophily.
  while (edges.size() < target) {
    const bool intra = rng.bernoulli(spec.homophily);
    while (true) {
      if (++attempts > budget) {
        throw UsageError("cannot place " + std::to_string(target) +
                         " edges under the requested homophily; relax mean_degree or homophily");
      }
      const std::size_t a = static_cast<std::size_t>(rng.index(n));
      const auto ka = static_cast<std::size_t>(labels[a]);
      std::size_t b = 0;
      if (intra) {
        const auto& same = members[ka];
        b = same[rng.index(same.size())];
      } else {
        const std::size_t others = n - members[ka].size();
        if (others == 0) continue;
        // Uniform over nodes of other classes: walk the class lists.
        std::size_t pick = static_cast<std::size_t>(rng.index(others));
        for (std::size_t k = 0; k < spec.num_classes; ++k) {
          if (k == ka) continue;
          if (pick < members[k].size()) {
            b = members[k][pick];
            break;
          }
          pick -= members[k].size();
        }
      }
      if (a == b) continue;
      if (edges.insert(a < b ? Edge{a, b} : Edge{b, a}).second) break;
    }
  }
  return TextAttributedGraph(n, spec.num_classes, {edges.begin(), edges.end()}, std::move(tokens),
                             std::move(labels));
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"homo", "hetero"};
  return names;
}

SyntheticSpec preset(std::string_view name, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.num_nodes = 300;
  spec.num_classes = 3;
  spec.seed = seed;
  if (name == "homo") {
    spec.homophily = 0.9;
  } else if (name == "hetero") {
    spec.homophily = 0.1;
  } else {
    std::string list;
    for (const auto& p : preset_names()) list += (list.empty() ? "" : ", ") + p;
    throw UsageError("unknown preset '" + std::string(name) + "' (available: " + list + ")");
  }
  return spec;
}

std::vector<Tokens> class_descriptions(std::size_t num_classes, std::size_t vocab_per_class) {
  std::vector<Tokens> out(num_classes);
  for (std::size_t k = 0; k < num_classes; ++k) {
    out[k] = {"class", std::to_string(k), "motif"};
    for (std::size_t j = 0; j < vocab_per_class; ++j) out[k].push_back(class_word(k, j));
  }
  return out;
}

double edge_homophily(const TextAttributedGraph& graph) {
  if (!graph.fully_labeled()) throw UsageError("edge_homophily needs labels on every node");
  if (graph.edges().empty()) return 0.0;
  std::size_t same = 0;
  for (const auto& [i, j] : graph.edges()) same += graph.labels()[i] == graph.labels()[j] ? 1 : 0;
  return static_cast<double>(same) / static_cast<double>(graph.edges().size());
}

void write_graph(std::ostream& out, const TextAttributedGraph& graph) {
  out << "H4G-TAG v1 " << graph.num_nodes() << ' ' << graph.num_classes() << '\n';
  for (std::size_t i = 0; i < graph.num_nodes(); ++i) {
    out << "N " << i << ' ' << graph.labels()[i];
    for (const auto& tok : graph.tokens(i)) out << ' ' << tok;
    out << '\n';
  }
  for (const auto& [i, j] : graph.edges()) out << "E " << i << ' ' << j << '\n';
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    const std::size_t next = line.find(' ', pos);
    const std::size_t end = next == std::string_view::npos ? line.size() : next;
    out.push_back(line.substr(pos, end - pos));
    pos = end + 1;
    if (next == std::string_view::npos) break;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view field, std::size_t line, const char* what) {
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ParseError(line, std::string("invalid ") + what + " '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

TextAttributedGraph read_graph(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++lineno;
    if (in.eof()) throw ParseError(lineno, "line is not LF-terminated (truncated file?)");
    return true;
  };

  if (!next_line()) throw ParseError(1, "missing header");
  auto header = split_fields(line);
  if (header.size() != 4 || header[0] != "H4G-TAG" || header[1] != "v1") {
    throw ParseError(lineno, "expected header 'H4G-TAG v1 <num_nodes> <num_classes>'");
  }
  const auto num_nodes = parse_number<std::size_t>(header[2], lineno, "num_nodes");
  const auto num_classes = parse_number<std::size_t>(header[3], lineno, "num_classes");

  std::vector<Tokens> tokens(num_nodes);
  std::vector<int> labels(num_nodes, kNoLabel);
  for (std::size_t i = 0; i < num_nodes; ++i) {
    if (!next_line()) throw ParseError(lineno + 1, "file ends before node " + std::to_string(i));
    const auto f = split_fields(line);
    if (f.size() < 3 || f[0] != "N") throw ParseError(lineno, "expected node line 'N <id> <label> ...'");
    if (parse_number<std::size_t>(f[1], lineno, "node id") != i) {
      throw ParseError(lineno, "node ids must be consecutive from 0; expected " + std::to_string(i));
    }
    const int label = parse_number<int>(f[2], lineno, "label");
    if (label != kNoLabel && (label < 0 || static_cast<std::size_t>(label) >= num_classes)) {
      throw ParseError(lineno, "label " + std::to_string(label) + " out of range");
    }
    labels[i] = label;
    for (std::size_t t = 3; t < f.size(); ++t) {
      if (f[t].empty()) throw ParseError(lineno, "empty token");
      tokens[i].emplace_back(f[t]);
    }
  }

  std::vector<Edge> edges;
  while (next_line()) {
    const auto f = split_fields(line);
    if (f.size() != 3 || f[0] != "E") throw ParseError(lineno, "expected edge line 'E <i> <j>'");
    const auto a = parse_number<std::size_t>(f[1], lineno, "edge endpoint");
    const auto b = parse_number<std::size_t>(f[2], lineno, "edge endpoint");
    if (a >= b) throw ParseError(lineno, "edge endpoints must satisfy i < j");
    if (b >= num_nodes) throw ParseError(lineno, "edge endpoint out of range");
    if (!edges.empty() && !(edges.back() < Edge{a, b})) {
      throw ParseError(lineno, "edges must be sorted and unique");
    }
    edges.emplace_back(a, b);
  }
  return TextAttributedGraph(num_nodes, num_classes, std::move(edges), std::move(tokens),
                             std::move(labels));
}

void save(const TextAttributedGraph& graph, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_graph(out, graph);
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

TextAttributedGraph load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  return read_graph(in);
}

}  // namespace h4g
