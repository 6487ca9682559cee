#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "corrnet/network.hpp"

namespace corrnet {

/// Node positions in the unit square, in network node order.
struct Layout {
  std::vector<std::pair<std::string, std::array<double, 2>>> positions;
  uint64_t seed = 0;
  int iterations = 0;

  /// Position for a symbol, or nullptr.
  const std::array<double, 2>* find(std::string_view symbol) const;

  /// JSON object mapping symbol -> [x, y].
  std::string to_json() const;
  static Layout from_json(std::string_view text);
};

inline constexpr int kDefaultLayoutIterations = 500;

/// Fruchterman-Reingold placement. Attraction along each positive edge scales
/// with |weight|^weight_exponent; negative edges exert no force. The loop is
/// single-threaded and seeded, so identical inputs give bit-identical output.
Layout fruchterman_reingold(const CorrelationNetwork& net, uint64_t seed,
                            int iterations = kDefaultLayoutIterations,
                            double weight_exponent = 1.0);

/// Same algorithm from caller-supplied initial positions (exposed so tests
/// can drive degenerate starting states, e.g. every node coincident).
Layout fruchterman_reingold_from(const CorrelationNetwork& net,
                                 std::vector<std::array<double, 2>> initial, uint64_t seed,
                                 int iterations, double weight_exponent);

}  // namespace corrnet
