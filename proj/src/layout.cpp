#include "corrnet/layout.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "corrnet/errors.hpp"
#include "corrnet/rng.hpp"

namespace corrnet {

using nlohmann::json;

namespace {

constexpr double kInitialTemperature = 0.1;   // fraction of the unit frame
constexpr double kCoincidentEps = 1e-12;
constexpr double kJitterDistance = 1e-9;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Separation of two points; coincident pairs get a tiny seeded displacement
/// so no force ever divides by zero.
Vec2 separation(const Vec2& a, const Vec2& b, SplitMix64& jitter, double& distance) {
  Vec2 d{a.x - b.x, a.y - b.y};
  distance = std::sqrt(d.x * d.x + d.y * d.y);
  if (distance < kCoincidentEps) {
    const double angle = jitter.next_unit() * 2.0 * M_PI;
    d = {std::cos(angle) * kJitterDistance, std::sin(angle) * kJitterDistance};
    distance = kJitterDistance;
  }
  return d;
}

}  // namespace

const std::array<double, 2>* Layout::find(std::string_view symbol) const {
  for (const auto& [sym, pos] : positions)
    if (sym == symbol) return &pos;
  return nullptr;
}

std::string Layout::to_json() const {
  json doc = json::object();
  for (const auto& [sym, pos] : positions) doc[sym] = {pos[0], pos[1]};
  return doc.dump(2) + "\n";
}

Layout Layout::from_json(std::string_view text) {
  const json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object())
    raise(Errc::malformed_response, "layout JSON must be an object of symbol -> [x, y]");
  Layout layout;
  for (const auto& [sym, pos] : doc.items()) {
    if (!pos.is_array() || pos.size() != 2 || !pos[0].is_number() || !pos[1].is_number())
      raise(Errc::malformed_response, "position for " + sym + " must be [x, y]");
    layout.positions.push_back({sym, {pos[0].get<double>(), pos[1].get<double>()}});
  }
  return layout;
}

Layout fruchterman_reingold(const CorrelationNetwork& net, uint64_t seed, int iterations,
                            double weight_exponent) {
  SplitMix64 init(seed);
  std::vector<std::array<double, 2>> initial(net.nodes().size());
  for (auto& p : initial) {
    p[0] = init.next_unit();
    p[1] = init.next_unit();
  }
  return fruchterman_reingold_from(net, std::move(initial), seed, iterations, weight_exponent);
}

Layout fruchterman_reingold_from(const CorrelationNetwork& net,
                                 std::vector<std::array<double, 2>> initial, uint64_t seed,
                                 int iterations, double weight_exponent) {
  const size_t n = net.nodes().size();
  if (n == 0) raise(Errc::empty_network, "cannot lay out a network with no nodes");
  if (iterations < 1) raise(Errc::invalid_argument, "iterations must be >= 1");
  if (initial.size() != n) raise(Errc::invalid_argument, "initial positions vs node count");

  std::vector<Vec2> pos(n);
  for (size_t i = 0; i < n; ++i) pos[i] = {initial[i][0], initial[i][1]};

  const double k = std::sqrt(1.0 / static_cast<double>(n));  // ideal pair distance
  SplitMix64 jitter(mix_seed(seed, 0x6A69747465ULL));
  std::vector<Vec2> disp(n);

  for (int it = 0; it < iterations; ++it) {
    // linear cooling from kInitialTemperature to 0
    const double temperature =
        kInitialTemperature * static_cast<double>(iterations - it) / static_cast<double>(iterations);

    std::fill(disp.begin(), disp.end(), Vec2{});

    // repulsion between every node pair: k^2 / d
    for (size_t i = 0; i + 1 < n; ++i) {
      for (size_t j = i + 1; j < n; ++j) {
        double d;
        const Vec2 delta = separation(pos[i], pos[j], jitter, d);
        const double force = k * k / (d * d);  // (delta / d) * (k^2 / d)
        disp[i].x += delta.x * force;
        disp[i].y += delta.y * force;
        disp[j].x -= delta.x * force;
        disp[j].y -= delta.y * force;
      }
    }

    // attraction along positive edges: d^2 / k, scaled by |weight|^exponent
    for (const auto& e : net.edges()) {
      if (e.weight <= 0.0) continue;
      double d;
      const Vec2 delta = separation(pos[e.a], pos[e.b], jitter, d);
      const double force = d / k * std::pow(e.weight, weight_exponent);  // (delta/d) * (d^2/k) * w
      disp[e.a].x -= delta.x * force;
      disp[e.a].y -= delta.y * force;
      disp[e.b].x += delta.x * force;
      disp[e.b].y += delta.y * force;
    }

    // move, capped by temperature, clamped to the frame
    for (size_t i = 0; i < n; ++i) {
      const double length = std::sqrt(disp[i].x * disp[i].x + disp[i].y * disp[i].y);
      if (length == 0.0) continue;
      const double scale = std::min(length, temperature) / length;
      pos[i].x = std::clamp(pos[i].x + disp[i].x * scale, 0.0, 1.0);
      pos[i].y = std::clamp(pos[i].y + disp[i].y * scale, 0.0, 1.0);
    }
  }

  // rescale to fill [0,1]^2; a degenerate axis centers at 0.5
  double min_x = pos[0].x, max_x = pos[0].x, min_y = pos[0].y, max_y = pos[0].y;
  for (const auto& p : pos) {
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double span_x = max_x - min_x, span_y = max_y - min_y;

  Layout layout;
  layout.seed = seed;
  layout.iterations = iterations;
  layout.positions.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    const double x = span_x > 0.0 ? (pos[i].x - min_x) / span_x : 0.5;
    const double y = span_y > 0.0 ? (pos[i].y - min_y) / span_y : 0.5;
    layout.positions.push_back({net.nodes()[i].asset.symbol, {x, y}});
  }
  return layout;
}

}  // namespace corrnet
