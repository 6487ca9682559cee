#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "corrnet/layout.hpp"
#include "corrnet/market_data.hpp"
#include "corrnet/network.hpp"
#include "corrnet/rank_stats.hpp"
#include "corrnet/returns.hpp"

namespace corrnet {

struct ThresholdSpec {
  ThresholdStrategy strategy = ThresholdStrategy::jump;
  int gap_index = 1;           // jump
  size_t k = 10;               // top_k
  bool absolute = false;       // top_k: rank by |weight|
  double step = 0.01;          // split
  bool count_isolated = false; // split: isolated nodes count as groups
};

struct LayoutSpec {
  uint64_t seed = 42;
  int iterations = kDefaultLayoutIterations;
  double weight_exponent = 1.0;
};

enum class MethodChoice { spearman, kendall_b, both };

struct PipelineConfig {
  std::vector<std::string> assets;  // empty with prices_dir set: every *.csv there
  std::map<std::string, std::string> display_names;
  std::optional<DatasetWindow> window;  // unset: intersection of series coverage
  std::string prices_dir;
  CsvFormat csv_format = CsvFormat::generic_two_column;
  std::string endpoint;   // fetch source when prices_dir is empty
  std::string cache_dir;  // fetch cache; CORRNET_CACHE_DIR when empty
  MethodChoice method = MethodChoice::spearman;
  MissingPolicy missing_policy = MissingPolicy::pairwise_complete;
  GapPolicy gap_policy = GapPolicy::bridge;
  int exact_n_max = kDefaultExactNMax;
  std::vector<ThresholdSpec> thresholds;  // empty: jump(1), top_k(10), split(0.01)
  LayoutSpec layout;
  std::string labels_file;
  int64_t concordance_permutations = 1000;
  uint64_t concordance_seed = 1;
  std::string output_dir = "out";
  unsigned threads = 1;
};

/// Parses the flat JSON config documented in the README. Unknown keys are an
/// error so typos do not silently fall back to defaults.
PipelineConfig load_pipeline_config(std::string_view json_text);

struct PipelineOutcome {
  std::vector<std::string> files_written;
};

/// Runs ingest -> returns -> correlation -> network -> layout -> render and
/// writes every intermediate artifact under config.output_dir.
PipelineOutcome run_pipeline(const PipelineConfig& config);

// Shared by the pipeline and the stage subcommands.
Dataset load_prices(const PipelineConfig& config, const std::optional<DatasetWindow>& window);
const char* method_name(Method m);
std::string missing_report_csv(const std::vector<MissingReport>& reports);

}  // namespace corrnet
