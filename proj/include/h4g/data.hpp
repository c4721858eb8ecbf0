#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace h4g {

inline constexpr int kNoLabel = -1;

using Tokens = std::vector<std::string>;
using Edge = std::pair<std::size_t, std::size_t>;

/// Undirected graph whose nodes carry token sequences and optional labels.
class TextAttributedGraph {
 public:
  /// Edges may be given in any orientation and order; they are stored as
  /// (i, j) with i < j, sorted.  Throws UsageError on out-of-range endpoints,
  /// self-loops, duplicates, a token list of the wrong length, or labels
  /// outside [0, num_classes) other than kNoLabel.
  TextAttributedGraph(std::size_t num_nodes, std::size_t num_classes, std::vector<Edge> edges,
                      std::vector<Tokens> tokens, std::vector<int> labels);

  std::size_t num_nodes() const noexcept { return tokens_.size(); }
  std::size_t num_classes() const noexcept { return num_classes_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<Tokens>& tokens() const noexcept { return tokens_; }
  const Tokens& tokens(std::size_t node) const { return tokens_.at(node); }
  const std::vector<int>& labels() const noexcept { return labels_; }
  /// True when every node carries a label.
  bool fully_labeled() const noexcept;
  /// Sorted neighbour ids.
  const std::vector<std::size_t>& neighbors(std::size_t node) const { return adjacency_.at(node); }

  bool operator==(const TextAttributedGraph& other) const {
    return num_classes_ == other.num_classes_ && edges_ == other.edges_ &&
           tokens_ == other.tokens_ && labels_ == other.labels_;
  }

 private:
  std::size_t num_classes_;
  std::vector<Edge> edges_;
  std::vector<Tokens> tokens_;
  std::vector<int> labels_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

/// Planted-partition generator parameters.
struct SyntheticSpec {
  std::size_t num_nodes = 300;
  std::size_t num_classes = 3;
  double mean_degree = 6.0;
  /// Probability that an edge joins two nodes of the same class.
  double homophily = 0.5;
  std::size_t tokens_per_node = 8;
  std::size_t vocab_per_class = 16;
  std::size_t noise_tokens = 8;
  std::uint64_t seed = 0;
};

/// Throws UsageError for invalid specs, including mean_degree >= num_nodes.
TextAttributedGraph generate(const SyntheticSpec& spec);

/// "homo" and "hetero".
const std::vector<std::string>& preset_names();
/// Throws UsageError listing the presets when `name` is unknown.
SyntheticSpec preset(std::string_view name, std::uint64_t seed);

/// "class <k> motif <class vocabulary ...>" for each class.
std::vector<Tokens> class_descriptions(std::size_t num_classes, std::size_t vocab_per_class);

/// Vocabulary word j of class k, and shared noise word j.
std::string class_word(std::size_t k, std::size_t j);
std::string noise_word(std::size_t j);

/// Fraction of edges whose endpoints share a label.  Requires labels.
double edge_homophily(const TextAttributedGraph& graph);

// "H4G-TAG v1" line format:
//   H4G-TAG v1 <num_nodes> <num_classes>
//   N <id> <label|-1> <token ...>        one per node, ids ascending
//   E <i> <j>                            one per edge, i < j, sorted
void write_graph(std::ostream& out, const TextAttributedGraph& graph);
/// Throws ParseError naming the line on malformed input.
TextAttributedGraph read_graph(std::istream& in);

void save(const TextAttributedGraph& graph, const std::string& path);
TextAttributedGraph load(const std::string& path);

}  // namespace h4g
