#pragma once

#include <string>
#include <vector>

#include "corrnet/layout.hpp"
#include "corrnet/network.hpp"
#include "corrnet/rank_stats.hpp"

namespace corrnet {

/// Line styling for a signed correlation weight: width and darkness grow
/// with |weight|, negative correlations render dashed.
struct EdgeStyle {
  double width = 0.0;
  double darkness = 0.0;  // in [0, 1]
  bool dashed = false;
};

struct EdgeStyleParams {
  double width_min = 0.5;
  double width_max = 6.0;
};

EdgeStyle style_edge(double weight, const EdgeStyleParams& params = {});

/// 1000x1000 SVG: styled edges beneath labelled node circles, deterministic
/// byte-for-byte for fixed inputs.
std::string to_svg(const CorrelationNetwork& net, const Layout& layout);

/// Undirected graphviz DOT with weight attributes, canonically ordered.
std::string to_dot(const CorrelationNetwork& net);

/// Fixed-point presentation with 4 decimals, halves rounded away from zero.
std::string format_fixed4(double value);

/// Presentation table: rank, pair, value at 4 decimals; with significance,
/// adds n, p, p_kind columns.
std::string render_table_text(const std::vector<RankedPair>& pairs, bool significance);
std::string render_table_csv(const std::vector<RankedPair>& pairs, bool significance);

}  // namespace corrnet
