#include "corrnet/network.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <set>
#include <thread>

#include <json.hpp>

#include "corrnet/errors.hpp"
#include "corrnet/rng.hpp"
#include "text_util.hpp"

namespace corrnet {

using nlohmann::json;

namespace {

std::string edge_pair_name(const CorrelationNetwork& net, const NetworkEdge& e) {
  return net.nodes()[e.a].asset.symbol + " " + net.nodes()[e.b].asset.symbol;
}

/// Component count over the subgraph induced by the given edges; counts only
/// nodes of degree >= 1 unless count_isolated, in which case isolated nodes
/// are singleton components.
size_t component_count(size_t nodes, const std::vector<NetworkEdge>& edges,
                       const std::vector<size_t>& kept, bool count_isolated) {
  std::vector<size_t> parent(nodes);
  std::iota(parent.begin(), parent.end(), size_t{0});
  auto find = [&](size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  std::vector<char> active(nodes, count_isolated ? 1 : 0);
  for (size_t idx : kept) {
    const auto& e = edges[idx];
    active[e.a] = active[e.b] = 1;
    parent[find(e.a)] = find(e.b);
  }
  std::set<size_t> roots;
  for (size_t v = 0; v < nodes; ++v)
    if (active[v]) roots.insert(find(v));
  return roots.size();
}

}  // namespace

CorrelationNetwork::CorrelationNetwork(std::vector<NetworkNode> nodes,
                                       std::vector<NetworkEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  std::set<std::string> symbols;
  for (const auto& n : nodes_)
    if (n.asset.symbol.empty() || !symbols.insert(n.asset.symbol).second)
      raise(Errc::invalid_argument, "node symbols must be non-empty and unique");
  std::set<std::pair<size_t, size_t>> seen;
  for (auto& e : edges_) {
    if (e.a == e.b || e.a >= nodes_.size() || e.b >= nodes_.size())
      raise(Errc::invalid_argument, "edge references a bad node index");
    if (e.a > e.b) std::swap(e.a, e.b);
    if (!seen.insert({e.a, e.b}).second)
      raise(Errc::invalid_argument, "duplicate edge " + edge_pair_name(*this, e));
    if (!(std::fabs(e.weight) <= 1.0))
      raise(Errc::invalid_argument, "edge weight outside [-1, 1]: " + edge_pair_name(*this, e));
  }
}

size_t CorrelationNetwork::node_index(std::string_view symbol) const {
  for (size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].asset.symbol == symbol) return i;
  raise(Errc::invalid_argument, "unknown node " + std::string(symbol));
}

void CorrelationNetwork::set_label(std::string_view symbol, const std::string& dimension,
                                   const std::string& category) {
  nodes_[node_index(symbol)].labels[dimension] = category;
}

CorrelationNetwork CorrelationNetwork::with_edges(const std::vector<size_t>& edge_indices) const {
  CorrelationNetwork out;
  out.nodes_ = nodes_;
  out.edges_.reserve(edge_indices.size());
  for (size_t idx : edge_indices) out.edges_.push_back(edges_.at(idx));
  return out;
}

std::string CorrelationNetwork::to_json() const {
  json doc;
  doc["nodes"] = json::array();
  for (const auto& n : nodes_) {
    json node;
    node["symbol"] = n.asset.symbol;
    node["display_name"] = n.asset.display_name;
    if (!n.labels.empty()) node["labels"] = n.labels;
    doc["nodes"].push_back(std::move(node));
  }
  doc["edges"] = json::array();
  for (const auto& e : edges_) {
    doc["edges"].push_back({{"a", nodes_[e.a].asset.symbol},
                            {"b", nodes_[e.b].asset.symbol},
                            {"weight", e.weight}});
  }
  return doc.dump(2) + "\n";
}

CorrelationNetwork CorrelationNetwork::from_json(std::string_view text) {
  const json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("nodes") || !doc.contains("edges"))
    raise(Errc::malformed_response, "network JSON must contain nodes and edges");

  std::vector<NetworkNode> nodes;
  std::map<std::string, size_t, std::less<>> index;
  for (const auto& n : doc["nodes"]) {
    if (!n.is_object() || !n.contains("symbol") || !n["symbol"].is_string())
      raise(Errc::malformed_response, "node entries need a symbol");
    NetworkNode node;
    node.asset.symbol = n["symbol"].get<std::string>();
    node.asset.display_name =
        n.contains("display_name") ? n["display_name"].get<std::string>() : node.asset.symbol;
    if (n.contains("labels"))
      node.labels = n["labels"].get<std::map<std::string, std::string>>();
    index.emplace(node.asset.symbol, nodes.size());
    nodes.push_back(std::move(node));
  }
  std::vector<NetworkEdge> edges;
  for (const auto& e : doc["edges"]) {
    if (!e.is_object() || !e.contains("a") || !e.contains("b") || !e.contains("weight") ||
        !e["weight"].is_number())
      raise(Errc::malformed_response, "edge entries need a, b, weight");
    const auto ia = index.find(e["a"].get<std::string>());
    const auto ib = index.find(e["b"].get<std::string>());
    if (ia == index.end() || ib == index.end())
      raise(Errc::malformed_response, "edge references an unknown node");
    edges.push_back({ia->second, ib->second, e["weight"].get<double>()});
  }
  return CorrelationNetwork(std::move(nodes), std::move(edges));
}

CorrelationNetwork build_network(const CorrelationMatrix& cm) {
  std::vector<NetworkNode> nodes;
  nodes.reserve(cm.assets().size());
  for (const auto& a : cm.assets()) nodes.push_back({a, {}});

  std::vector<NetworkEdge> edges;
  edges.reserve(cm.pair_count());
  const size_t n = cm.assets().size();
  size_t idx = 0;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) edges.push_back({i, j, cm.estimates()[idx++].value});
  return CorrelationNetwork(std::move(nodes), std::move(edges));
}

const char* strategy_name(ThresholdStrategy s) {
  switch (s) {
    case ThresholdStrategy::jump: return "jump";
    case ThresholdStrategy::top_k: return "top_k";
    case ThresholdStrategy::split: return "split";
  }
  return "unknown";
}

ThresholdResult threshold_jump(const CorrelationNetwork& net, int gap_index) {
  if (net.edges().size() < 2) raise(Errc::invalid_argument, "jump threshold needs >= 2 edges");
  if (gap_index < 1) raise(Errc::invalid_argument, "gap_index must be >= 1");

  std::vector<double> positive;
  for (const auto& e : net.edges())
    if (e.weight > 0.0) positive.push_back(e.weight);
  if (positive.empty()) raise(Errc::no_positive_edges, "no positive weights to threshold");
  std::sort(positive.begin(), positive.end(), std::greater<>());

  double threshold;
  if (positive.size() == 1) {
    threshold = positive.front();  // no gaps; keep the lone positive edge
  } else {
    std::vector<size_t> gap_order(positive.size() - 1);
    std::iota(gap_order.begin(), gap_order.end(), size_t{0});
    std::sort(gap_order.begin(), gap_order.end(), [&](size_t a, size_t b) {
      const double ga = positive[a] - positive[a + 1];
      const double gb = positive[b] - positive[b + 1];
      if (ga != gb) return ga > gb;
      return a < b;  // equal gaps: highest-value gap first
    });
    if (static_cast<size_t>(gap_index) > gap_order.size())
      raise(Errc::invalid_argument, "gap_index " + std::to_string(gap_index) + " but only " +
                                        std::to_string(gap_order.size()) + " gaps");
    const size_t g = gap_order[static_cast<size_t>(gap_index - 1)];
    threshold = (positive[g] + positive[g + 1]) / 2.0;
  }

  ThresholdResult result;
  result.strategy = ThresholdStrategy::jump;
  result.threshold = threshold;
  for (size_t idx = 0; idx < net.edges().size(); ++idx)
    if (net.edges()[idx].weight >= threshold) result.kept_edge_indices.push_back(idx);
  result.kept_edges = result.kept_edge_indices.size();
  return result;
}

ThresholdResult threshold_top_k(const CorrelationNetwork& net, size_t k, bool absolute) {
  if (k < 1) raise(Errc::invalid_argument, "k must be >= 1");

  auto key = [&](size_t idx) {
    const double w = net.edges()[idx].weight;
    return absolute ? std::fabs(w) : w;
  };
  std::vector<size_t> order(net.edges().size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (key(a) != key(b)) return key(a) > key(b);
    return edge_pair_name(net, net.edges()[a]) < edge_pair_name(net, net.edges()[b]);
  });

  const size_t kept = std::min(k, order.size());
  ThresholdResult result;
  result.strategy = ThresholdStrategy::top_k;
  result.kept_edge_indices.assign(order.begin(), order.begin() + kept);
  std::sort(result.kept_edge_indices.begin(), result.kept_edge_indices.end());
  result.kept_edges = kept;
  result.threshold = kept == 0 ? 0.0 : key(order[kept - 1]);
  result.boundary_tie = kept > 0 && kept < order.size() && key(order[kept - 1]) == key(order[kept]);
  return result;
}

ThresholdResult threshold_split(const CorrelationNetwork& net, double step, bool count_isolated) {
  if (!(step > 0.0)) raise(Errc::invalid_argument, "step must be > 0");

  double max_weight = 0.0;
  for (const auto& e : net.edges()) max_weight = std::max(max_weight, e.weight);

  for (int k = 0;; ++k) {
    // k * step rather than repeated addition, so thresholds are exact
    // multiples of the step and the k-1 threshold is recoverable.
    const double threshold = static_cast<double>(k) * step;
    std::vector<size_t> kept;
    for (size_t idx = 0; idx < net.edges().size(); ++idx)
      if (net.edges()[idx].weight >= threshold) kept.push_back(idx);

    const size_t groups = component_count(net.nodes().size(), net.edges(), kept, count_isolated);
    if (k == 0 && groups != 1)
      raise(Errc::invalid_argument, "network is not connected on positive edges");
    if (k > 0 && groups >= 2) {
      ThresholdResult result;
      result.strategy = ThresholdStrategy::split;
      result.threshold = threshold;
      result.kept_edge_indices = std::move(kept);
      result.kept_edges = result.kept_edge_indices.size();
      result.step_index = k;
      return result;
    }
    if (threshold > max_weight)
      raise(Errc::never_splits, "threshold passed the largest weight without a split");
  }
}

CorrelationNetwork apply_threshold(const CorrelationNetwork& net, const ThresholdResult& result) {
  return net.with_edges(result.kept_edge_indices);
}

std::vector<std::vector<std::string>> connected_components(const CorrelationNetwork& net) {
  const size_t n = net.nodes().size();
  std::vector<size_t> parent(n);
  std::iota(parent.begin(), parent.end(), size_t{0});
  auto find = [&](size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const auto& e : net.edges()) parent[find(e.a)] = find(e.b);

  std::map<size_t, std::vector<std::string>> groups;
  for (size_t v = 0; v < n; ++v) groups[find(v)].push_back(net.nodes()[v].asset.symbol);

  std::vector<std::vector<std::string>> out;
  for (auto& [root, members] : groups) {
    std::sort(members.begin(), members.end());
    out.push_back(std::move(members));
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return out;
}

double network_agreement(const CorrelationNetwork& a, const CorrelationNetwork& b) {
  std::set<std::string> sa, sb;
  for (const auto& n : a.nodes()) sa.insert(n.asset.symbol);
  for (const auto& n : b.nodes()) sb.insert(n.asset.symbol);
  if (sa != sb) raise(Errc::node_set_mismatch, "networks cover different assets");

  auto edge_set = [](const CorrelationNetwork& net) {
    std::set<std::pair<std::string, std::string>> edges;
    for (const auto& e : net.edges()) {
      auto pa = net.nodes()[e.a].asset.symbol;
      auto pb = net.nodes()[e.b].asset.symbol;
      if (pa > pb) std::swap(pa, pb);
      edges.insert({std::move(pa), std::move(pb)});
    }
    return edges;
  };
  const auto ea = edge_set(a);
  const auto eb = edge_set(b);

  size_t inter = 0;
  for (const auto& e : ea) inter += eb.contains(e);
  const size_t uni = ea.size() + eb.size() - inter;
  if (uni == 0) return 1.0;  // both edgeless: identical
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<GroupLabeling> load_group_labels(std::string_view csv) {
  const auto lines = text::split_lines(csv);
  if (lines.empty() || lines.front() != "symbol,dimension,category")
    raise(Errc::malformed_csv, "expected header symbol,dimension,category");

  std::map<std::string, GroupLabeling> by_dimension;
  for (size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = text::split_fields(lines[i]);
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty() || fields[2].empty())
      raise(Errc::malformed_csv, "row " + std::to_string(i + 1) + ": expected symbol,dimension,category");
    const std::string dimension(fields[1]);
    if (std::find(std::begin(kLabelDimensions), std::end(kLabelDimensions), dimension) ==
        std::end(kLabelDimensions))
      raise(Errc::malformed_csv, "row " + std::to_string(i + 1) + ": unknown dimension \"" +
                                     dimension + "\"");
    auto& labeling = by_dimension[dimension];
    labeling.dimension = dimension;
    if (!labeling.assignment.emplace(std::string(fields[0]), std::string(fields[2])).second)
      raise(Errc::malformed_csv, "row " + std::to_string(i + 1) + ": duplicate symbol \"" +
                                     std::string(fields[0]) + "\" in dimension " + dimension);
  }

  std::vector<GroupLabeling> out;
  for (auto& [dim, labeling] : by_dimension) out.push_back(std::move(labeling));
  return out;
}

ConcordanceResult group_concordance(const CorrelationMatrix& cm, const GroupLabeling& labels,
                                    int64_t permutations, uint64_t seed, unsigned threads) {
  if (permutations < 1) raise(Errc::invalid_argument, "permutations must be >= 1");

  const size_t n = cm.assets().size();
  std::vector<std::string> categories(n);
  for (size_t i = 0; i < n; ++i) {
    const auto it = labels.assignment.find(cm.assets()[i].symbol);
    if (it == labels.assignment.end())
      raise(Errc::degenerate_labeling,
            "no category for " + cm.assets()[i].symbol + " in dimension " + labels.dimension);
    categories[i] = it->second;
  }
  std::map<std::string, size_t> category_sizes;
  for (const auto& c : categories) ++category_sizes[c];
  if (category_sizes.size() < 2)
    raise(Errc::degenerate_labeling, "need at least 2 categories in dimension " + labels.dimension);
  for (const auto& [category, size] : category_sizes)
    if (size < 2)
      raise(Errc::degenerate_labeling, "category \"" + category + "\" has a single member");

  // Pair values in (i, j) i < j order, matching the estimates layout.
  std::vector<double> values;
  std::vector<std::pair<size_t, size_t>> pair_nodes;
  values.reserve(cm.pair_count());
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) {
      values.push_back(cm.at(i, j).value);
      pair_nodes.push_back({i, j});
    }

  auto gap = [&](const std::vector<std::string>& cats) {
    double intra_sum = 0.0, inter_sum = 0.0;
    size_t intra_n = 0, inter_n = 0;
    for (size_t p = 0; p < values.size(); ++p) {
      const auto [i, j] = pair_nodes[p];
      if (cats[i] == cats[j]) {
        intra_sum += values[p];
        ++intra_n;
      } else {
        inter_sum += values[p];
        ++inter_n;
      }
    }
    const double intra = intra_sum / static_cast<double>(intra_n);
    const double inter = inter_sum / static_cast<double>(inter_n);
    return std::array<double, 3>{intra, inter, intra - inter};
  };

  const auto observed = gap(categories);

  // Each permutation draws from its own seeded stream, so the count is
  // independent of how the work is split across threads.
  auto exceeds = [&](int64_t perm_index) {
    std::vector<std::string> shuffled = categories;
    SplitMix64 rng(mix_seed(seed, static_cast<uint64_t>(perm_index) + 1));
    rng.shuffle(shuffled);
    return gap(shuffled)[2] >= observed[2];
  };

  int64_t count = 0;
  unsigned nthreads = threads == 0 ? std::thread::hardware_concurrency() : threads;
  nthreads = std::max(1u, std::min<unsigned>(nthreads, 64));
  if (nthreads <= 1 || permutations < 64) {
    for (int64_t p = 0; p < permutations; ++p) count += exceeds(p);
  } else {
    std::atomic<int64_t> next{0};
    std::atomic<int64_t> hits{0};
    std::vector<std::thread> workers;
    for (unsigned w = 0; w < nthreads; ++w)
      workers.emplace_back([&] {
        int64_t local = 0;
        for (int64_t p; (p = next.fetch_add(1)) < permutations;) local += exceeds(p);
        hits.fetch_add(local);
      });
    for (auto& t : workers) t.join();
    count = hits.load();
  }

  ConcordanceResult result;
  result.intra_mean = observed[0];
  result.inter_mean = observed[1];
  result.p_value = static_cast<double>(count) / static_cast<double>(permutations);
  result.permutations = permutations;
  return result;
}

}  // namespace corrnet
