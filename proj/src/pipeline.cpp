#include "corrnet/pipeline.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <set>

#include <json.hpp>

#include "corrnet/errors.hpp"
#include "corrnet/render.hpp"
#include "file_util.hpp"
#include "text_util.hpp"

namespace corrnet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void bad_config(const std::string& message) {
  raise(Errc::invalid_argument, "config: " + message);
}

DatasetWindow parse_window(const json& w) {
  if (!w.is_object() || !w.contains("start") || !w.contains("end"))
    bad_config("window needs start and end");
  const auto start = Date::parse(w["start"].get<std::string>());
  const auto end = Date::parse(w["end"].get<std::string>());
  if (!start || !end) bad_config("window dates must be YYYY-MM-DD");
  if (*start > *end) bad_config("window start after end");
  return {*start, *end};
}

ThresholdSpec parse_threshold(const json& t) {
  if (!t.is_object() || !t.contains("strategy")) bad_config("threshold entries need a strategy");
  ThresholdSpec spec;
  const std::string strategy = t["strategy"].get<std::string>();
  if (strategy == "jump")
    spec.strategy = ThresholdStrategy::jump;
  else if (strategy == "top-k" || strategy == "top_k")
    spec.strategy = ThresholdStrategy::top_k;
  else if (strategy == "split")
    spec.strategy = ThresholdStrategy::split;
  else
    bad_config("unknown threshold strategy \"" + strategy + "\"");
  for (const auto& [key, value] : t.items()) {
    if (key == "strategy") continue;
    if (key == "gap_index") spec.gap_index = value.get<int>();
    else if (key == "k") spec.k = value.get<size_t>();
    else if (key == "absolute") spec.absolute = value.get<bool>();
    else if (key == "step") spec.step = value.get<double>();
    else if (key == "count_isolated") spec.count_isolated = value.get<bool>();
    else bad_config("unknown threshold key \"" + key + "\"");
  }
  return spec;
}

/// Stage-tags any library error so pipeline diagnostics name the stage.
template <typename Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), std::string("[") + name + "] " + e.what());
  }
}

std::string thresholds_summary(const CorrelationNetwork& net, const ThresholdSpec& spec,
                               const ThresholdResult& result) {
  std::string line = strategy_name(spec.strategy);
  switch (spec.strategy) {
    case ThresholdStrategy::jump:
      line += " gap_index=" + std::to_string(spec.gap_index);
      break;
    case ThresholdStrategy::top_k:
      line += " k=" + std::to_string(spec.k);
      if (spec.absolute) line += " absolute";
      if (result.boundary_tie) line += " (boundary tie broken lexicographically)";
      break;
    case ThresholdStrategy::split:
      line += " step=" + text::format_double(spec.step);
      if (spec.count_isolated) line += " count_isolated";
      break;
  }
  line += ": threshold=" + format_fixed4(result.threshold) +
          " kept_edges=" + std::to_string(result.kept_edges);
  if (spec.strategy == ThresholdStrategy::split) {
    const auto groups = connected_components(apply_threshold(net, result));
    size_t connected = 0;
    std::string members;
    for (const auto& g : groups) {
      if (g.size() < 2) continue;  // isolated nodes are dropped from the diagram
      ++connected;
      members += " [";
      for (size_t i = 0; i < g.size(); ++i) members += (i ? " " : "") + g[i];
      members += "]";
    }
    line += " groups=" + std::to_string(spec.count_isolated ? groups.size() : connected) + members;
  }
  return line + "\n";
}

}  // namespace

const char* method_name(Method m) { return m == Method::spearman ? "spearman" : "kendall_b"; }

PipelineConfig load_pipeline_config(std::string_view json_text) {
  const json doc = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) bad_config("config must be a JSON object");

  PipelineConfig config;
  for (const auto& [key, value] : doc.items()) {
    if (key == "assets") {
      for (const auto& a : value) config.assets.push_back(a.get<std::string>());
    } else if (key == "display_names") {
      config.display_names = value.get<std::map<std::string, std::string>>();
    } else if (key == "window") {
      config.window = parse_window(value);
    } else if (key == "prices_dir") {
      config.prices_dir = value.get<std::string>();
    } else if (key == "csv_format") {
      const std::string fmt = value.get<std::string>();
      if (fmt == "generic") config.csv_format = CsvFormat::generic_two_column;
      else if (fmt == "coingecko") config.csv_format = CsvFormat::coingecko_export;
      else bad_config("csv_format must be generic or coingecko");
    } else if (key == "endpoint") {
      config.endpoint = value.get<std::string>();
    } else if (key == "cache_dir") {
      config.cache_dir = value.get<std::string>();
    } else if (key == "method") {
      const std::string m = value.get<std::string>();
      if (m == "spearman") config.method = MethodChoice::spearman;
      else if (m == "kendall-b" || m == "kendall_b") config.method = MethodChoice::kendall_b;
      else if (m == "both") config.method = MethodChoice::both;
      else bad_config("method must be spearman, kendall-b, or both");
    } else if (key == "missing_policy") {
      const std::string p = value.get<std::string>();
      if (p == "pairwise") config.missing_policy = MissingPolicy::pairwise_complete;
      else if (p == "listwise") config.missing_policy = MissingPolicy::listwise_complete;
      else bad_config("missing_policy must be pairwise or listwise");
    } else if (key == "gap_policy") {
      const std::string p = value.get<std::string>();
      if (p == "bridge") config.gap_policy = GapPolicy::bridge;
      else if (p == "strict") config.gap_policy = GapPolicy::strict;
      else bad_config("gap_policy must be bridge or strict");
    } else if (key == "exact_n_max") {
      config.exact_n_max = value.get<int>();
    } else if (key == "thresholds") {
      for (const auto& t : value) config.thresholds.push_back(parse_threshold(t));
    } else if (key == "layout") {
      for (const auto& [lk, lv] : value.items()) {
        if (lk == "seed") config.layout.seed = lv.get<uint64_t>();
        else if (lk == "iterations") config.layout.iterations = lv.get<int>();
        else if (lk == "weight_exponent") config.layout.weight_exponent = lv.get<double>();
        else bad_config("unknown layout key \"" + lk + "\"");
      }
    } else if (key == "labels_file") {
      config.labels_file = value.get<std::string>();
    } else if (key == "concordance_permutations") {
      config.concordance_permutations = value.get<int64_t>();
    } else if (key == "concordance_seed") {
      config.concordance_seed = value.get<uint64_t>();
    } else if (key == "output_dir") {
      config.output_dir = value.get<std::string>();
    } else if (key == "threads") {
      config.threads = value.get<unsigned>();
    } else {
      bad_config("unknown key \"" + key + "\"");
    }
  }
  return config;
}

Dataset load_prices(const PipelineConfig& config, const std::optional<DatasetWindow>& window) {
  std::vector<std::string> symbols = config.assets;
  if (symbols.empty()) {
    if (config.prices_dir.empty())
      raise(Errc::invalid_argument, "no assets listed and no prices_dir to scan");
    if (!fs::is_directory(config.prices_dir))
      raise(Errc::invalid_argument, "prices_dir is not a directory: " + config.prices_dir);
    for (const auto& entry : fs::directory_iterator(config.prices_dir))
      if (entry.path().extension() == ".csv") symbols.push_back(entry.path().stem().string());
    std::sort(symbols.begin(), symbols.end());
    if (symbols.empty())
      raise(Errc::invalid_argument, "no .csv files in " + config.prices_dir);
  }

  auto display = [&](const std::string& symbol) {
    const auto it = config.display_names.find(symbol);
    return AssetId{symbol, it == config.display_names.end() ? symbol : it->second};
  };

  std::vector<PriceSeries> series;
  series.reserve(symbols.size());
  for (const auto& symbol : symbols) {
    if (!config.prices_dir.empty()) {
      const fs::path path = fs::path(config.prices_dir) / (symbol + ".csv");
      series.push_back(parse_price_csv(display(symbol),
                                       fileio::read_file(path, Errc::invalid_argument),
                                       config.csv_format));
    } else if (!config.endpoint.empty()) {
      if (!window)
        raise(Errc::invalid_argument, "fetching requires an explicit window");
      FetchOptions options;
      options.cache_dir = config.cache_dir;
      if (options.cache_dir.empty())
        if (const char* env = std::getenv("CORRNET_CACHE_DIR")) options.cache_dir = env;
      series.push_back(fetch_price_history(display(symbol), *window, config.endpoint, options));
    } else {
      raise(Errc::invalid_argument, "need prices_dir or endpoint to load " + symbol);
    }
  }

  DatasetWindow effective;
  if (window) {
    effective = *window;
  } else {
    // intersection of coverage across series
    Date start{INT32_MIN}, end{INT32_MAX};
    for (const auto& s : series) {
      if (s.points.empty()) continue;
      start = std::max(start, s.points.front().date);
      end = std::min(end, s.points.back().date);
    }
    if (start > end)
      raise(Errc::insufficient_coverage, "series coverages do not overlap");
    effective = {start, end};
  }
  return build_dataset(std::move(series), effective);
}

std::string missing_report_csv(const std::vector<MissingReport>& reports) {
  std::string out = "symbol,missing_date\n";
  for (const auto& r : reports)
    for (const auto& d : r.missing_dates) out += r.asset.symbol + "," + d.to_string() + "\n";
  return out;
}

PipelineOutcome run_pipeline(const PipelineConfig& config) {
  PipelineOutcome outcome;
  const fs::path out_dir = config.output_dir;
  auto emit = [&](const std::string& name, const std::string& bytes) {
    fileio::write_file_atomic(out_dir / name, bytes);
    outcome.files_written.push_back((out_dir / name).string());
  };

  const Dataset dataset = stage("ingest", [&] { return load_prices(config, config.window); });
  emit("missing_report.csv", missing_report_csv(report_missing(dataset)));

  const ReturnsMatrix returns = stage("returns", [&] {
    std::vector<ReturnSeries> rs;
    rs.reserve(dataset.series.size());
    for (const auto& s : dataset.series) rs.push_back(daily_returns(s, config.gap_policy));
    return align(rs, dataset.window);
  });
  emit("returns_matrix.csv", returns.to_csv());

  std::vector<GroupLabeling> labelings;
  if (!config.labels_file.empty())
    labelings = stage("labels", [&] {
      return load_group_labels(fileio::read_file(config.labels_file, Errc::invalid_argument));
    });

  std::vector<ThresholdSpec> thresholds = config.thresholds;
  if (thresholds.empty()) {
    thresholds.push_back({ThresholdStrategy::jump});
    thresholds.push_back({ThresholdStrategy::top_k});
    thresholds.push_back({ThresholdStrategy::split});
  }

  std::vector<Method> methods;
  if (config.method == MethodChoice::spearman) methods = {Method::spearman};
  else if (config.method == MethodChoice::kendall_b) methods = {Method::kendall_b};
  else methods = {Method::spearman, Method::kendall_b};

  std::map<Method, std::map<std::string, CorrelationNetwork>> thresholded;
  for (const Method method : methods) {
    const std::string prefix =
        config.method == MethodChoice::both ? std::string(method_name(method)) + "_" : "";

    const CorrelationMatrix cm = stage("corr", [&] {
      return corr_matrix(returns, method, config.missing_policy, config.exact_n_max,
                         config.threads);
    });
    const auto pairs = rank_pairs(cm);
    emit(prefix + "pairs.csv", ranked_pairs_to_csv(pairs));
    emit(prefix + "pairs.txt", render_table_text(pairs, /*significance=*/false));

    std::string significance = render_table_text(pairs, /*significance=*/true);
    size_t at1 = 0, at5 = 0, at10 = 0;
    for (const auto& rp : pairs) {
      at1 += rp.p < 0.01;
      at5 += rp.p < 0.05;
      at10 += rp.p < 0.10;
    }
    significance += "\npairs significant at 1%: " + std::to_string(at1) + " of " +
                    std::to_string(pairs.size()) + "\npairs significant at 5%: " +
                    std::to_string(at5) + " of " + std::to_string(pairs.size()) +
                    "\npairs significant at 10%: " + std::to_string(at10) + " of " +
                    std::to_string(pairs.size()) + "\n";
    emit(prefix + "significance.txt", significance);

    CorrelationNetwork net = stage("network", [&] { return build_network(cm); });
    for (const auto& labeling : labelings)
      for (const auto& node : cm.assets()) {
        const auto it = labeling.assignment.find(node.symbol);
        if (it != labeling.assignment.end())
          net.set_label(node.symbol, labeling.dimension, it->second);
      }
    emit(prefix + "network.json", net.to_json());
    emit(prefix + "network.dot", to_dot(net));

    const Layout layout = stage("layout", [&] {
      return fruchterman_reingold(net, config.layout.seed, config.layout.iterations,
                                  config.layout.weight_exponent);
    });
    emit(prefix + "layout.json", layout.to_json());
    emit(prefix + "network_all.svg", to_svg(net, layout));

    std::string summary;
    for (const auto& spec : thresholds) {
      const ThresholdResult result = stage("threshold", [&] {
        switch (spec.strategy) {
          case ThresholdStrategy::jump: return threshold_jump(net, spec.gap_index);
          case ThresholdStrategy::top_k: return threshold_top_k(net, spec.k, spec.absolute);
          case ThresholdStrategy::split:
            return threshold_split(net, spec.step, spec.count_isolated);
        }
        raise(Errc::invalid_argument, "bad threshold strategy");
      });
      const CorrelationNetwork pruned = apply_threshold(net, result);
      summary += thresholds_summary(net, spec, result);
      emit(prefix + "network_" + strategy_name(spec.strategy) + ".svg", to_svg(pruned, layout));
      thresholded[method][strategy_name(spec.strategy)] = pruned;
    }
    emit(prefix + "thresholds.txt", summary);

    if (!labelings.empty()) {
      std::string concordance;
      for (const auto& labeling : labelings) {
        // A dimension with a singleton category (e.g. the lone pegged asset)
        // cannot be permutation-tested; report it rather than abort the run.
        try {
          const auto r = group_concordance(cm, labeling, config.concordance_permutations,
                                           config.concordance_seed, config.threads);
          concordance += labeling.dimension + ": intra_mean=" + format_fixed4(r.intra_mean) +
                         " inter_mean=" + format_fixed4(r.inter_mean) +
                         " p=" + text::format_double(r.p_value) + " (" +
                         std::to_string(r.permutations) + " permutations)\n";
        } catch (const Error& e) {
          if (e.code() != Errc::degenerate_labeling) throw;
          concordance += labeling.dimension + ": not testable (" + std::string(e.what()) + ")\n";
        }
      }
      emit(prefix + "concordance.txt", concordance);
    }
  }

  if (config.method == MethodChoice::both) {
    std::string agreement;
    for (const auto& spec : thresholds) {
      const auto& a = thresholded[Method::spearman][strategy_name(spec.strategy)];
      const auto& b = thresholded[Method::kendall_b][strategy_name(spec.strategy)];
      agreement += std::string(strategy_name(spec.strategy)) +
                   ": jaccard=" + format_fixed4(network_agreement(a, b)) + "\n";
    }
    emit("agreement.txt", agreement);
  }

  return outcome;
}

}  // namespace corrnet
