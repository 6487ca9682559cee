#include "corrnet/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "corrnet/errors.hpp"

namespace corrnet {

namespace {

constexpr int kCanvas = 1000;
constexpr double kMargin = 60.0;
constexpr double kNodeRadius = 18.0;

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string gray_hex(double darkness) {
  // darkness 0 -> light gray, 1 -> black
  const int level = static_cast<int>(std::llround((1.0 - darkness) * 204.0));
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02X%02X%02X", level, level, level);
  return buf;
}

std::string pad_right(std::string s, size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string p_text(double p) { return fmt("%.4g", p); }

}  // namespace

EdgeStyle style_edge(double weight, const EdgeStyleParams& params) {
  if (!(std::fabs(weight) <= 1.0))
    raise(Errc::invalid_argument, "edge weight outside [-1, 1]");
  const double magnitude = std::fabs(weight);
  EdgeStyle style;
  style.width = params.width_min + (params.width_max - params.width_min) * magnitude;
  style.darkness = magnitude;
  style.dashed = weight < 0.0;
  return style;
}

std::string to_svg(const CorrelationNetwork& net, const Layout& layout) {
  auto canvas_xy = [](const std::array<double, 2>& unit) {
    return std::array<double, 2>{kMargin + unit[0] * (kCanvas - 2.0 * kMargin),
                                 kMargin + unit[1] * (kCanvas - 2.0 * kMargin)};
  };

  std::vector<std::array<double, 2>> at(net.nodes().size());
  for (size_t i = 0; i < net.nodes().size(); ++i) {
    const auto* pos = layout.find(net.nodes()[i].asset.symbol);
    if (!pos)
      raise(Errc::missing_position, "layout has no position for " + net.nodes()[i].asset.symbol);
    at[i] = canvas_xy(*pos);
  }

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1000\" height=\"1000\" "
         "viewBox=\"0 0 1000 1000\">\n";
  svg += "<rect width=\"1000\" height=\"1000\" fill=\"#FFFFFF\"/>\n";

  // edges first, so node circles sit on top of the line ends
  for (const auto& e : net.edges()) {
    const EdgeStyle style = style_edge(e.weight);
    svg += "<line x1=\"" + fmt("%.2f", at[e.a][0]) + "\" y1=\"" + fmt("%.2f", at[e.a][1]) +
           "\" x2=\"" + fmt("%.2f", at[e.b][0]) + "\" y2=\"" + fmt("%.2f", at[e.b][1]) +
           "\" stroke=\"" + gray_hex(style.darkness) + "\" stroke-width=\"" +
           fmt("%.2f", style.width) + "\"";
    if (style.dashed) svg += " stroke-dasharray=\"8 5\"";
    svg += "/>\n";
  }

  for (size_t i = 0; i < net.nodes().size(); ++i) {
    svg += "<circle cx=\"" + fmt("%.2f", at[i][0]) + "\" cy=\"" + fmt("%.2f", at[i][1]) +
           "\" r=\"" + fmt("%.1f", kNodeRadius) +
           "\" fill=\"#E8F0FB\" stroke=\"#3A3F4A\" stroke-width=\"1.5\"/>\n";
    svg += "<text x=\"" + fmt("%.2f", at[i][0]) + "\" y=\"" + fmt("%.2f", at[i][1]) +
           "\" text-anchor=\"middle\" dominant-baseline=\"central\" "
           "font-family=\"monospace\" font-size=\"13\">" +
           net.nodes()[i].asset.symbol + "</text>\n";
  }

  svg += "</svg>\n";
  return svg;
}

std::string to_dot(const CorrelationNetwork& net) {
  std::string dot = "graph corrnet {\n  node [shape=circle];\n";
  for (const auto& n : net.nodes()) dot += "  \"" + n.asset.symbol + "\";\n";

  // canonical edge order regardless of insertion order
  std::vector<size_t> order(net.edges().size());
  std::iota(order.begin(), order.end(), size_t{0});
  auto name = [&](size_t idx) {
    auto a = net.nodes()[net.edges()[idx].a].asset.symbol;
    auto b = net.nodes()[net.edges()[idx].b].asset.symbol;
    if (a > b) std::swap(a, b);
    return std::pair(a, b);
  };
  std::sort(order.begin(), order.end(), [&](size_t x, size_t y) { return name(x) < name(y); });

  for (size_t idx : order) {
    const auto [a, b] = name(idx);
    const double w = net.edges()[idx].weight;
    dot += "  \"" + a + "\" -- \"" + b + "\" [weight=" + format_fixed4(w);
    if (w < 0.0) dot += ", style=dashed";
    dot += "];\n";
  }
  dot += "}\n";
  return dot;
}

std::string format_fixed4(double value) {
  // llround ties away from zero regardless of the FP rounding mode
  const long long scaled = std::llround(value * 10000.0);
  const long long magnitude = scaled < 0 ? -scaled : scaled;
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%s%lld.%04lld", scaled < 0 ? "-" : "", magnitude / 10000,
                magnitude % 10000);
  return buf;
}

std::string render_table_text(const std::vector<RankedPair>& pairs, bool significance) {
  size_t pair_width = 4, value_width = 5, n_width = 1, p_width = 1;
  for (const auto& rp : pairs) {
    pair_width = std::max(pair_width, rp.pair_name().size());
    value_width = std::max(value_width, format_fixed4(rp.value).size());
    n_width = std::max(n_width, std::to_string(rp.n).size());
    p_width = std::max(p_width, p_text(rp.p).size());
  }

  std::string out = pad_right("rank", 6) + pad_right("pair", pair_width + 2);
  if (significance)
    out += pad_right("value", value_width) + "  " + pad_right("n", n_width) + "  " +
           pad_right("p", p_width) + "  p_kind";
  else
    out += "value";
  out += '\n';

  for (const auto& rp : pairs) {
    out += pad_right(std::to_string(rp.rank), 6) + pad_right(rp.pair_name(), pair_width + 2);
    std::string value = format_fixed4(rp.value);
    out += significance ? pad_right(std::move(value), value_width) : std::move(value);
    if (significance) {
      out += "  " + pad_right(std::to_string(rp.n), n_width) + "  " +
             pad_right(p_text(rp.p), p_width) + "  " +
             (rp.p_kind == PKind::exact ? "exact" : "asymptotic");
    }
    out += '\n';
  }
  return out;
}

std::string render_table_csv(const std::vector<RankedPair>& pairs, bool significance) {
  std::string out = significance ? "rank,pair,value,n,p,p_kind\n" : "rank,pair,value\n";
  for (const auto& rp : pairs) {
    out += std::to_string(rp.rank) + ',' + rp.pair_name() + ',' + format_fixed4(rp.value);
    if (significance) {
      out += ',' + std::to_string(rp.n) + ',' + p_text(rp.p) + ',' +
             (rp.p_kind == PKind::exact ? "exact" : "asymptotic");
    }
    out += '\n';
  }
  return out;
}

}  // namespace corrnet
