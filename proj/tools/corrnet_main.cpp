// corrnet: correlation-network analysis of daily price series.
// Subcommands mirror the pipeline stages; every stage reads and writes the
// documented file formats, so stages can be re-run independently.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "corrnet/errors.hpp"
#include "corrnet/kernels.hpp"
#include "corrnet/layout.hpp"
#include "corrnet/market_data.hpp"
#include "corrnet/network.hpp"
#include "corrnet/pipeline.hpp"
#include "corrnet/rank_stats.hpp"
#include "corrnet/render.hpp"
#include "corrnet/returns.hpp"

namespace fs = std::filesystem;
using namespace corrnet;

namespace {

std::string read_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::invalid_argument, "cannot read file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& path, const std::string& bytes) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  const fs::path tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << bytes;
    if (!out) raise(Errc::invalid_argument, "cannot write file " + path);
  }
  fs::rename(tmp, p);
}

Date parse_date_flag(const std::string& text, const char* flag) {
  const auto d = Date::parse(text);
  if (!d) raise(Errc::invalid_argument, std::string(flag) + " must be YYYY-MM-DD, got " + text);
  return *d;
}

Method parse_method(const std::string& m) {
  if (m == "spearman") return Method::spearman;
  if (m == "kendall-b" || m == "kendall_b") return Method::kendall_b;
  raise(Errc::invalid_argument, "--method must be spearman or kendall-b");
}

MissingPolicy parse_policy(const std::string& p) {
  if (p == "pairwise") return MissingPolicy::pairwise_complete;
  if (p == "listwise") return MissingPolicy::listwise_complete;
  raise(Errc::invalid_argument, "--missing-policy must be pairwise or listwise");
}

GapPolicy parse_gap(const std::string& p) {
  if (p == "bridge") return GapPolicy::bridge;
  if (p == "strict") return GapPolicy::strict;
  raise(Errc::invalid_argument, "--gap-policy must be bridge or strict");
}

GroupLabeling find_dimension(const std::vector<GroupLabeling>& labelings,
                             const std::string& dimension) {
  for (const auto& l : labelings)
    if (l.dimension == dimension) return l;
  raise(Errc::invalid_argument, "labels file has no dimension \"" + dimension + "\"");
}

struct CommonSourceFlags {
  std::vector<std::string> assets;
  std::string prices_dir;
  std::string endpoint;
  std::string format = "generic";
  std::string start, end;
  std::string cache_dir;
};

void add_source_flags(CLI::App* sub, CommonSourceFlags& flags) {
  sub->add_option("--assets", flags.assets,
                  "Asset symbols (default: every *.csv in --prices-dir)")
      ->delimiter(',');
  sub->add_option("--prices-dir", flags.prices_dir, "Directory of <symbol>.csv price files");
  sub->add_option("--endpoint", flags.endpoint,
                  "Price history URL returning [[epoch_millis, price], ...]; "
                  "\"{symbol}\" in the URL is substituted per asset");
  sub->add_option("--format", flags.format, "Price CSV format: generic or coingecko");
  sub->add_option("--start", flags.start, "Window start, YYYY-MM-DD");
  sub->add_option("--end", flags.end, "Window end, YYYY-MM-DD");
  sub->add_option("--cache-dir", flags.cache_dir,
                  "Fetch cache directory (default: $CORRNET_CACHE_DIR)");
}

PipelineConfig config_from_source_flags(const CommonSourceFlags& flags) {
  PipelineConfig config;
  config.assets = flags.assets;
  config.prices_dir = flags.prices_dir;
  config.endpoint = flags.endpoint;
  config.cache_dir = flags.cache_dir;
  config.csv_format =
      flags.format == "coingecko" ? CsvFormat::coingecko_export : CsvFormat::generic_two_column;
  if (flags.format != "generic" && flags.format != "coingecko")
    raise(Errc::invalid_argument, "--format must be generic or coingecko");
  if (!flags.start.empty() != !flags.end.empty())
    raise(Errc::invalid_argument, "--start and --end must be given together");
  if (!flags.start.empty())
    config.window = DatasetWindow{parse_date_flag(flags.start, "--start"),
                                  parse_date_flag(flags.end, "--end")};
  return config;
}

int run(int argc, char** argv) {
  CLI::App app{"correlation networks over daily price series"};
  app.require_subcommand(1);

  // ---- ingest ----
  auto* ingest = app.add_subcommand("ingest", "Parse or fetch prices, window them, report gaps");
  CommonSourceFlags ingest_flags;
  std::string ingest_out = "prices";
  add_source_flags(ingest, ingest_flags);
  ingest->add_option("--out-dir", ingest_out, "Output directory for windowed <symbol>.csv");

  // ---- returns ----
  auto* returns_cmd = app.add_subcommand("returns", "Daily percentage returns, date-aligned");
  CommonSourceFlags returns_flags;
  std::string returns_gap = "bridge", returns_out = "returns_matrix.csv";
  add_source_flags(returns_cmd, returns_flags);
  returns_cmd->add_option("--gap-policy", returns_gap, "bridge or strict");
  returns_cmd->add_option("--out", returns_out, "Output returns matrix CSV");

  // ---- corr ----
  auto* corr = app.add_subcommand("corr", "Rank-correlation estimates for every pair");
  std::string corr_returns, corr_method = "spearman", corr_policy = "pairwise";
  std::string corr_out = "pairs.csv";
  int corr_exact_n_max = kDefaultExactNMax;
  unsigned corr_threads = 1;
  corr->add_option("--returns", corr_returns, "Returns matrix CSV")->required();
  corr->add_option("--method", corr_method, "spearman or kendall-b");
  corr->add_option("--missing-policy", corr_policy, "pairwise or listwise");
  corr->add_option("--exact-n-max", corr_exact_n_max, "Largest n for exact p-values");
  corr->add_option("--threads", corr_threads, "Worker threads (0 = hardware)");
  corr->add_option("--out", corr_out, "Output ranked-pair CSV");

  // ---- test ----
  auto* test_cmd = app.add_subcommand("test", "Two-sided significance report");
  std::string test_returns, test_method = "spearman", test_policy = "pairwise";
  std::string test_out = "significance.txt";
  int test_exact_n_max = kDefaultExactNMax;
  unsigned test_threads = 1;
  test_cmd->add_option("--returns", test_returns, "Returns matrix CSV")->required();
  test_cmd->add_option("--method", test_method, "spearman or kendall-b");
  test_cmd->add_option("--missing-policy", test_policy, "pairwise or listwise");
  test_cmd->add_option("--exact-n-max", test_exact_n_max, "Largest n for exact p-values");
  test_cmd->add_option("--threads", test_threads, "Worker threads (0 = hardware)");
  test_cmd->add_option("--out", test_out, "Output text report");

  // ---- network ----
  auto* network_cmd = app.add_subcommand("network", "Build and optionally threshold the network");
  std::string net_pairs, net_labels, net_strategy = "none", net_out = "network.json";
  int net_gap_index = 1;
  size_t net_k = 10;
  bool net_absolute = false, net_count_isolated = false;
  double net_step = 0.01;
  network_cmd->add_option("--pairs", net_pairs, "Ranked-pair CSV")->required();
  network_cmd->add_option("--labels", net_labels, "Group labels CSV (symbol,dimension,category)");
  network_cmd->add_option("--strategy", net_strategy, "none, jump, top-k, or split");
  network_cmd->add_option("--gap-index", net_gap_index, "jump: which gap, 1 = largest");
  network_cmd->add_option("--k", net_k, "top-k: edges to keep");
  network_cmd->add_flag("--absolute", net_absolute, "top-k: rank by |weight|");
  network_cmd->add_option("--step", net_step, "split: threshold increment");
  network_cmd->add_flag("--count-isolated", net_count_isolated,
                        "split: count isolated nodes as groups");
  network_cmd->add_option("--out", net_out, "Output network JSON");

  // ---- layout ----
  auto* layout_cmd = app.add_subcommand("layout", "Force-directed node placement");
  std::string lay_network, lay_out = "layout.json";
  uint64_t lay_seed = 42;
  int lay_iterations = kDefaultLayoutIterations;
  double lay_exponent = 1.0;
  layout_cmd->add_option("--network", lay_network, "Network JSON")->required();
  layout_cmd->add_option("--seed", lay_seed, "Seed for initial positions");
  layout_cmd->add_option("--iterations", lay_iterations, "Iteration count");
  layout_cmd->add_option("--weight-exponent", lay_exponent, "Attraction weight exponent");
  layout_cmd->add_option("--out", lay_out, "Output layout JSON");

  // ---- render ----
  auto* render_cmd = app.add_subcommand("render", "Diagrams and tables from earlier stages");
  std::string ren_network, ren_layout, ren_pairs;
  std::string ren_svg, ren_dot, ren_table_txt, ren_table_csv;
  bool ren_significance = false;
  render_cmd->add_option("--network", ren_network, "Network JSON (for --svg / --dot)");
  render_cmd->add_option("--layout", ren_layout, "Layout JSON (for --svg)");
  render_cmd->add_option("--pairs", ren_pairs, "Ranked-pair CSV (for tables)");
  render_cmd->add_option("--svg", ren_svg, "Output SVG diagram");
  render_cmd->add_option("--dot", ren_dot, "Output DOT graph");
  render_cmd->add_option("--table-txt", ren_table_txt, "Output text table");
  render_cmd->add_option("--table-csv", ren_table_csv, "Output CSV table (4-decimal values)");
  render_cmd->add_flag("--significance", ren_significance, "Include n, p, p_kind columns");

  // ---- concordance ----
  auto* conc = app.add_subcommand("concordance",
                                  "Permutation test of proposed groupings against correlations");
  std::string conc_pairs, conc_labels, conc_dimension, conc_out;
  int64_t conc_perms = 1000;
  uint64_t conc_seed = 1;
  unsigned conc_threads = 1;
  conc->add_option("--pairs", conc_pairs, "Ranked-pair CSV")->required();
  conc->add_option("--labels", conc_labels, "Group labels CSV")->required();
  conc->add_option("--dimension", conc_dimension, "Label dimension to test")->required();
  conc->add_option("--permutations", conc_perms, "Label shuffles");
  conc->add_option("--seed", conc_seed, "Permutation seed");
  conc->add_option("--threads", conc_threads, "Worker threads (0 = hardware)");
  conc->add_option("--out", conc_out, "Also write the report to this file");

  // ---- pipeline ----
  auto* pipe = app.add_subcommand("pipeline", "Run every stage and write all artifacts");
  CommonSourceFlags pipe_flags;
  std::string pipe_config, pipe_method, pipe_policy, pipe_gap, pipe_labels, pipe_out;
  unsigned pipe_threads = 0;
  bool pipe_threads_set = false;
  pipe->add_option("--config", pipe_config, "JSON config; flags override its values");
  add_source_flags(pipe, pipe_flags);
  pipe->add_option("--method", pipe_method, "spearman, kendall-b, or both");
  pipe->add_option("--missing-policy", pipe_policy, "pairwise or listwise");
  pipe->add_option("--gap-policy", pipe_gap, "bridge or strict");
  pipe->add_option("--labels", pipe_labels, "Group labels CSV");
  pipe->add_option("--out-dir", pipe_out, "Artifact directory");
  pipe->add_option("--threads", pipe_threads, "Worker threads (0 = hardware)")
      ->each([&](const std::string&) { pipe_threads_set = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help text or the parse error
    return code == 0 ? 0 : 2;
  }

  if (*ingest) {
    const PipelineConfig config = config_from_source_flags(ingest_flags);
    const Dataset dataset = load_prices(config, config.window);
    for (const auto& s : dataset.series)
      write_output((fs::path(ingest_out) / (s.asset.symbol + ".csv")).string(),
                   to_generic_csv(s));
    // .txt so the report is never scanned as a price series later
    write_output((fs::path(ingest_out) / "missing_report.txt").string(),
                 missing_report_csv(report_missing(dataset)));
    std::cout << "ingested " << dataset.series.size() << " assets over "
              << dataset.window.start.to_string() << ".." << dataset.window.end.to_string()
              << " into " << ingest_out << "\n";
    return 0;
  }

  if (*returns_cmd) {
    const PipelineConfig config = config_from_source_flags(returns_flags);
    const Dataset dataset = load_prices(config, config.window);
    std::vector<ReturnSeries> rs;
    for (const auto& s : dataset.series) rs.push_back(daily_returns(s, parse_gap(returns_gap)));
    const ReturnsMatrix matrix = align(rs, dataset.window);
    write_output(returns_out, matrix.to_csv());
    std::cout << "wrote " << returns_out << " (" << matrix.rows() << " rows x " << matrix.cols()
              << " assets)\n";
    return 0;
  }

  if (*corr || *test_cmd) {
    const bool is_corr = static_cast<bool>(*corr);
    const std::string& in_path = is_corr ? corr_returns : test_returns;
    const ReturnsMatrix matrix = ReturnsMatrix::from_csv(read_input(in_path));
    const CorrelationMatrix cm =
        corr_matrix(matrix, parse_method(is_corr ? corr_method : test_method),
                    parse_policy(is_corr ? corr_policy : test_policy),
                    is_corr ? corr_exact_n_max : test_exact_n_max,
                    is_corr ? corr_threads : test_threads);
    const auto pairs = rank_pairs(cm);
    if (is_corr) {
      write_output(corr_out, ranked_pairs_to_csv(pairs));
      std::cout << "wrote " << corr_out << " (" << pairs.size() << " pairs)\n";
    } else {
      std::string report = render_table_text(pairs, /*significance=*/true);
      size_t at1 = 0, at5 = 0, at10 = 0;
      for (const auto& rp : pairs) {
        at1 += rp.p < 0.01;
        at5 += rp.p < 0.05;
        at10 += rp.p < 0.10;
      }
      report += "\npairs significant at 1%: " + std::to_string(at1) + " of " +
                std::to_string(pairs.size()) + "\npairs significant at 5%: " +
                std::to_string(at5) + " of " + std::to_string(pairs.size()) +
                "\npairs significant at 10%: " + std::to_string(at10) + " of " +
                std::to_string(pairs.size()) + "\n";
      write_output(test_out, report);
      std::cout << "wrote " << test_out << "\n";
    }
    return 0;
  }

  if (*network_cmd) {
    const auto pairs = ranked_pairs_from_csv(read_input(net_pairs));
    CorrelationNetwork net = build_network(
        matrix_from_pairs(pairs, Method::spearman, MissingPolicy::pairwise_complete));
    if (!net_labels.empty()) {
      for (const auto& labeling : load_group_labels(read_input(net_labels)))
        for (const auto& node : net.nodes())
          if (const auto it = labeling.assignment.find(node.asset.symbol);
              it != labeling.assignment.end())
            net.set_label(node.asset.symbol, labeling.dimension, it->second);
    }
    if (net_strategy != "none") {
      ThresholdResult result;
      if (net_strategy == "jump") result = threshold_jump(net, net_gap_index);
      else if (net_strategy == "top-k" || net_strategy == "top_k")
        result = threshold_top_k(net, net_k, net_absolute);
      else if (net_strategy == "split")
        result = threshold_split(net, net_step, net_count_isolated);
      else
        raise(Errc::invalid_argument, "--strategy must be none, jump, top-k, or split");
      std::cout << strategy_name(result.strategy) << ": threshold="
                << format_fixed4(result.threshold) << " kept_edges=" << result.kept_edges
                << (result.boundary_tie ? " (boundary tie broken lexicographically)" : "")
                << "\n";
      net = apply_threshold(net, result);
    }
    write_output(net_out, net.to_json());
    std::cout << "wrote " << net_out << " (" << net.nodes().size() << " nodes, "
              << net.edges().size() << " edges)\n";
    return 0;
  }

  if (*layout_cmd) {
    const CorrelationNetwork net = CorrelationNetwork::from_json(read_input(lay_network));
    const Layout layout = fruchterman_reingold(net, lay_seed, lay_iterations, lay_exponent);
    write_output(lay_out, layout.to_json());
    std::cout << "wrote " << lay_out << "\n";
    return 0;
  }

  if (*render_cmd) {
    bool wrote = false;
    if (!ren_svg.empty()) {
      if (ren_network.empty() || ren_layout.empty())
        raise(Errc::invalid_argument, "--svg needs --network and --layout");
      const auto net = CorrelationNetwork::from_json(read_input(ren_network));
      const auto layout = Layout::from_json(read_input(ren_layout));
      write_output(ren_svg, to_svg(net, layout));
      std::cout << "wrote " << ren_svg << "\n";
      wrote = true;
    }
    if (!ren_dot.empty()) {
      if (ren_network.empty()) raise(Errc::invalid_argument, "--dot needs --network");
      const auto net = CorrelationNetwork::from_json(read_input(ren_network));
      write_output(ren_dot, to_dot(net));
      std::cout << "wrote " << ren_dot << "\n";
      wrote = true;
    }
    if (!ren_table_txt.empty() || !ren_table_csv.empty()) {
      if (ren_pairs.empty()) raise(Errc::invalid_argument, "tables need --pairs");
      const auto pairs = ranked_pairs_from_csv(read_input(ren_pairs));
      if (!ren_table_txt.empty()) {
        write_output(ren_table_txt, render_table_text(pairs, ren_significance));
        std::cout << "wrote " << ren_table_txt << "\n";
      }
      if (!ren_table_csv.empty()) {
        write_output(ren_table_csv, render_table_csv(pairs, ren_significance));
        std::cout << "wrote " << ren_table_csv << "\n";
      }
      wrote = true;
    }
    if (!wrote)
      raise(Errc::invalid_argument, "render needs at least one of --svg, --dot, --table-txt, --table-csv");
    return 0;
  }

  if (*conc) {
    const auto pairs = ranked_pairs_from_csv(read_input(conc_pairs));
    const auto cm = matrix_from_pairs(pairs, Method::spearman, MissingPolicy::pairwise_complete);
    const auto labeling =
        find_dimension(load_group_labels(read_input(conc_labels)), conc_dimension);
    const ConcordanceResult r = group_concordance(cm, labeling, conc_perms, conc_seed, conc_threads);
    std::string report = conc_dimension + ": intra_mean=" + format_fixed4(r.intra_mean) +
                         " inter_mean=" + format_fixed4(r.inter_mean) + " p=" +
                         std::to_string(r.p_value) + " (" + std::to_string(r.permutations) +
                         " permutations)\n";
    std::cout << report;
    if (!conc_out.empty()) write_output(conc_out, report);
    return 0;
  }

  if (*pipe) {
    PipelineConfig config;
    if (!pipe_config.empty()) config = load_pipeline_config(read_input(pipe_config));

    if (!pipe_flags.assets.empty()) config.assets = pipe_flags.assets;
    if (!pipe_flags.prices_dir.empty()) config.prices_dir = pipe_flags.prices_dir;
    if (!pipe_flags.endpoint.empty()) config.endpoint = pipe_flags.endpoint;
    if (!pipe_flags.cache_dir.empty()) config.cache_dir = pipe_flags.cache_dir;
    if (pipe->count("--format")) {
      if (pipe_flags.format == "generic") config.csv_format = CsvFormat::generic_two_column;
      else if (pipe_flags.format == "coingecko") config.csv_format = CsvFormat::coingecko_export;
      else raise(Errc::invalid_argument, "--format must be generic or coingecko");
    }
    if (!pipe_flags.start.empty() || !pipe_flags.end.empty()) {
      if (pipe_flags.start.empty() || pipe_flags.end.empty())
        raise(Errc::invalid_argument, "--start and --end must be given together");
      config.window = DatasetWindow{parse_date_flag(pipe_flags.start, "--start"),
                                    parse_date_flag(pipe_flags.end, "--end")};
    }
    if (!pipe_method.empty()) {
      if (pipe_method == "spearman") config.method = MethodChoice::spearman;
      else if (pipe_method == "kendall-b" || pipe_method == "kendall_b")
        config.method = MethodChoice::kendall_b;
      else if (pipe_method == "both") config.method = MethodChoice::both;
      else raise(Errc::invalid_argument, "--method must be spearman, kendall-b, or both");
    }
    if (!pipe_policy.empty()) config.missing_policy = parse_policy(pipe_policy);
    if (!pipe_gap.empty()) config.gap_policy = parse_gap(pipe_gap);
    if (!pipe_labels.empty()) config.labels_file = pipe_labels;
    if (!pipe_out.empty()) config.output_dir = pipe_out;
    if (pipe_threads_set) config.threads = pipe_threads;

    const PipelineOutcome outcome = run_pipeline(config);
    for (const auto& f : outcome.files_written) std::cout << "wrote " << f << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(error_class(e.code()));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
