#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "corrnet/rank_stats.hpp"

namespace corrnet {

struct NetworkNode {
  AssetId asset;
  std::map<std::string, std::string> labels;  // dimension -> category
};

struct NetworkEdge {
  size_t a = 0;  // node indices, a < b
  size_t b = 0;
  double weight = 0.0;  // signed correlation in [-1, 1]
};

/// Weighted undirected graph over assets; thresholding removes edges but
/// never nodes.
class CorrelationNetwork {
 public:
  CorrelationNetwork() = default;
  CorrelationNetwork(std::vector<NetworkNode> nodes, std::vector<NetworkEdge> edges);

  const std::vector<NetworkNode>& nodes() const { return nodes_; }
  const std::vector<NetworkEdge>& edges() const { return edges_; }

  size_t node_index(std::string_view symbol) const;  // throws if unknown
  void set_label(std::string_view symbol, const std::string& dimension,
                 const std::string& category);

  /// Same nodes, edges restricted to the given edge indices.
  CorrelationNetwork with_edges(const std::vector<size_t>& edge_indices) const;

  std::string to_json() const;
  static CorrelationNetwork from_json(std::string_view text);

 private:
  std::vector<NetworkNode> nodes_;
  std::vector<NetworkEdge> edges_;
};

/// Complete graph with one edge per correlation estimate.
CorrelationNetwork build_network(const CorrelationMatrix& cm);

enum class ThresholdStrategy { jump, top_k, split };

const char* strategy_name(ThresholdStrategy s);

struct ThresholdResult {
  ThresholdStrategy strategy = ThresholdStrategy::jump;
  double threshold = 0.0;
  size_t kept_edges = 0;
  std::vector<size_t> kept_edge_indices;  // ascending
  int step_index = 0;        // split: threshold == step_index * step
  bool boundary_tie = false; // top_k: lexicographic tie-break decided the cut
};

/// Midpoint of the gap_index-th largest gap between descending positive
/// weights; keeps edges with weight >= threshold. Negative edges never
/// survive.
ThresholdResult threshold_jump(const CorrelationNetwork& net, int gap_index = 1);

/// Keeps the k edges with largest signed weight (|weight| when absolute);
/// boundary ties break lexicographically by pair name.
ThresholdResult threshold_top_k(const CorrelationNetwork& net, size_t k, bool absolute = false);

/// Raises the threshold from 0 in `step` increments until the nodes of
/// degree >= 1 fall into at least two components. Nodes isolated along the
/// way are dropped from the count unless count_isolated is set.
ThresholdResult threshold_split(const CorrelationNetwork& net, double step = 0.01,
                                bool count_isolated = false);

CorrelationNetwork apply_threshold(const CorrelationNetwork& net, const ThresholdResult& result);

/// Components over the current edge set, all nodes included (isolated nodes
/// are singletons). Groups ordered by smallest member symbol.
std::vector<std::vector<std::string>> connected_components(const CorrelationNetwork& net);

/// Jaccard similarity of the two edge sets; requires identical node sets.
double network_agreement(const CorrelationNetwork& a, const CorrelationNetwork& b);

struct GroupLabeling {
  std::string dimension;
  std::map<std::string, std::string> assignment;  // symbol -> category
};

inline constexpr const char* kLabelDimensions[] = {"token_creation", "validation",
                                                   "target_market", "token_function"};

/// Loads "symbol,dimension,category" rows grouped by dimension.
std::vector<GroupLabeling> load_group_labels(std::string_view csv);

struct ConcordanceResult {
  double intra_mean = 0.0;
  double inter_mean = 0.0;
  double p_value = 1.0;
  int64_t permutations = 0;
};

/// Permutation test of whether same-category pairs are more correlated than
/// cross-category pairs. p is the fraction of seeded label shuffles whose
/// intra-inter gap reaches the observed one.
ConcordanceResult group_concordance(const CorrelationMatrix& cm, const GroupLabeling& labels,
                                    int64_t permutations, uint64_t seed, unsigned threads = 1);

}  // namespace corrnet
