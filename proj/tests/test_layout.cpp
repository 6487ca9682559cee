#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "corrnet/errors.hpp"
#include "corrnet/layout.hpp"

using namespace corrnet;

namespace {

bool throws_code(Errc code, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code() == code;
  }
  return false;
}

CorrelationNetwork net_of(size_t nodes,
                          const std::vector<std::tuple<size_t, size_t, double>>& edges) {
  std::vector<NetworkNode> ns;
  for (size_t i = 0; i < nodes; ++i) {
    const char c = static_cast<char>('a' + i);
    ns.push_back({{std::string(2, c), ""}, {}});
  }
  std::vector<NetworkEdge> es;
  for (const auto& [a, b, w] : edges) es.push_back({a, b, w});
  return CorrelationNetwork(std::move(ns), std::move(es));
}

/// Two 4-cliques with strong internal weights and one weak bridge.
CorrelationNetwork two_cliques() {
  std::vector<std::tuple<size_t, size_t, double>> edges;
  for (size_t i = 0; i < 4; ++i)
    for (size_t j = i + 1; j < 4; ++j) {
      edges.push_back({i, j, 0.8});
      edges.push_back({i + 4, j + 4, 0.8});
    }
  edges.push_back({0, 4, 0.1});
  return net_of(8, edges);
}

double distance(const Layout& layout, const std::string& a, const std::string& b) {
  const auto* pa = layout.find(a);
  const auto* pb = layout.find(b);
  REQUIRE(pa != nullptr);
  REQUIRE(pb != nullptr);
  const double dx = (*pa)[0] - (*pb)[0], dy = (*pa)[1] - (*pb)[1];
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

TEST_CASE("single node lands in the center") {
  const auto layout = fruchterman_reingold(net_of(1, {}), 7, 50);
  REQUIRE(layout.positions.size() == 1);
  CHECK(layout.positions[0].second[0] == 0.5);
  CHECK(layout.positions[0].second[1] == 0.5);
}

TEST_CASE("two connected nodes end up finite and distinct") {
  const auto layout = fruchterman_reingold(net_of(2, {{0, 1, 0.9}}), 3, 200);
  const auto& p0 = layout.positions[0].second;
  const auto& p1 = layout.positions[1].second;
  CHECK(std::isfinite(p0[0]));
  CHECK(std::isfinite(p0[1]));
  CHECK(std::isfinite(p1[0]));
  CHECK(std::isfinite(p1[1]));
  CHECK((p0[0] != p1[0] || p0[1] != p1[1]));
}

TEST_CASE("identical inputs give bit-identical layouts and bytes") {
  const auto net = two_cliques();
  const auto a = fruchterman_reingold(net, 42, 500);
  const auto b = fruchterman_reingold(net, 42, 500);
  REQUIRE(a.positions.size() == b.positions.size());
  for (size_t i = 0; i < a.positions.size(); ++i) {
    CHECK(a.positions[i].first == b.positions[i].first);
    CHECK(a.positions[i].second[0] == b.positions[i].second[0]);
    CHECK(a.positions[i].second[1] == b.positions[i].second[1]);
  }
  CHECK(a.to_json() == b.to_json());

  const auto other_seed = fruchterman_reingold(net, 43, 500);
  bool any_difference = false;
  for (size_t i = 0; i < a.positions.size(); ++i)
    any_difference |= a.positions[i].second != other_seed.positions[i].second;
  CHECK(any_difference);
}

TEST_CASE("output spans exactly the unit square") {
  const auto layout = fruchterman_reingold(two_cliques(), 42, 500);
  double min_x = 1, max_x = 0, min_y = 1, max_y = 0;
  for (const auto& [sym, p] : layout.positions) {
    CHECK(std::isfinite(p[0]));
    CHECK(std::isfinite(p[1]));
    CHECK(p[0] >= 0.0);
    CHECK(p[0] <= 1.0);
    CHECK(p[1] >= 0.0);
    CHECK(p[1] <= 1.0);
    min_x = std::min(min_x, p[0]);
    max_x = std::max(max_x, p[0]);
    min_y = std::min(min_y, p[1]);
    max_y = std::max(max_y, p[1]);
  }
  CHECK(min_x == 0.0);
  CHECK(max_x == 1.0);
  CHECK(min_y == 0.0);
  CHECK(max_y == 1.0);
}

TEST_CASE("coincident starting positions are jittered apart, never NaN") {
  const auto net = net_of(6, {{0, 1, 0.5}, {2, 3, 0.5}, {4, 5, 0.5}});
  std::vector<std::array<double, 2>> pile(6, {0.25, 0.25});
  const auto layout = fruchterman_reingold_from(net, pile, 11, 300, 1.0);
  for (const auto& [sym, p] : layout.positions) {
    CHECK(std::isfinite(p[0]));
    CHECK(std::isfinite(p[1]));
  }
  size_t distinct = 0;
  for (size_t i = 0; i < layout.positions.size(); ++i)
    for (size_t j = i + 1; j < layout.positions.size(); ++j)
      distinct += layout.positions[i].second != layout.positions[j].second;
  CHECK(distinct == 15);  // all pairs separated
}

TEST_CASE("strongly tied cliques sit closer than weakly tied ones") {
  const auto layout = fruchterman_reingold(two_cliques(), 42, 500);
  double intra = 0, inter = 0;
  size_t n_intra = 0, n_inter = 0;
  const auto symbol = [](size_t i) { return std::string(2, static_cast<char>('a' + i)); };
  for (size_t i = 0; i < 8; ++i)
    for (size_t j = i + 1; j < 8; ++j) {
      const double d = distance(layout, symbol(i), symbol(j));
      if ((i < 4) == (j < 4)) {
        intra += d;
        ++n_intra;
      } else {
        inter += d;
        ++n_inter;
      }
    }
  CHECK(intra / n_intra < inter / n_inter);
}

TEST_CASE("negative edges exert no pull") {
  // two nodes joined only by a negative edge should not collapse together
  const auto net = net_of(2, {{0, 1, -0.9}});
  const auto layout = fruchterman_reingold(net, 5, 300);
  CHECK(distance(layout, "aa", "bb") > 0.5);
}

TEST_CASE("layout json round-trip") {
  const auto layout = fruchterman_reingold(net_of(3, {{0, 1, 0.4}}), 9, 100);
  const auto back = Layout::from_json(layout.to_json());
  REQUIRE(back.positions.size() == 3);
  for (const auto& [sym, p] : layout.positions) {
    const auto* q = back.find(sym);
    REQUIRE(q != nullptr);
    CHECK((*q)[0] == p[0]);
    CHECK((*q)[1] == p[1]);
  }
  CHECK(throws_code(Errc::malformed_response, [] { Layout::from_json("[]"); }));
  CHECK(throws_code(Errc::malformed_response, [] { Layout::from_json("{\"aa\": [1]}"); }));
}

TEST_CASE("layout preconditions") {
  CHECK(throws_code(Errc::empty_network, [] { fruchterman_reingold(net_of(0, {}), 1, 10); }));
  CHECK(throws_code(Errc::invalid_argument,
                    [] { fruchterman_reingold(net_of(2, {}), 1, 0); }));
}
