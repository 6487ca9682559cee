#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "corrnet/market_data.hpp"
#include "corrnet/returns.hpp"

namespace corrnet {

/// 1-based ranks; tied values carry the mean of the positions they occupy.
struct RankVector {
  std::vector<double> ranks;
};

RankVector midranks(std::span<const double> values);

/// Product-moment correlation of the two midrank vectors.
double spearman_rho(std::span<const double> x, std::span<const double> y);

/// Tie-corrected Kendall correlation: (concordant - discordant) pairs over
/// sqrt(pairs untied in x) * sqrt(pairs untied in y). With no ties this
/// reduces to (nc - nd) / (n(n-1)/2).
double kendall_tau_b(std::span<const double> x, std::span<const double> y);

/// Pair-count decomposition behind kendall_tau_b, exposed so tests can check
/// the counting against an exhaustive oracle.
struct ConcordanceBreakdown {
  int64_t concordant = 0;
  int64_t discordant = 0;
  int64_t untied_pairs_x = 0;
  int64_t untied_pairs_y = 0;

  bool operator==(const ConcordanceBreakdown&) const = default;
};

ConcordanceBreakdown kendall_breakdown(std::span<const double> x, std::span<const double> y);

enum class Method { spearman, kendall_b };
enum class PKind { exact, asymptotic };

inline constexpr int kDefaultExactNMax = 8;

struct CorrEstimate {
  std::array<std::string, 2> pair;  // symbols; empty for standalone tests
  Method method = Method::spearman;
  double value = 0.0;       // in [-1, 1]
  int64_t n = 0;            // sample size used
  bool had_ties = false;
  double p_two_sided = 1.0;
  PKind p_kind = PKind::asymptotic;
};

/// Two-sided Spearman test. Exact p by full permutation enumeration when
/// there are no ties and n <= exact_n_max; otherwise the t approximation.
CorrEstimate sr_test(std::span<const double> x, std::span<const double> y,
                     int exact_n_max = kDefaultExactNMax);

/// Two-sided Kendall test. Exact null enumeration under the same rule;
/// otherwise the normal approximation with tie-corrected variance.
CorrEstimate kt_test(std::span<const double> x, std::span<const double> y,
                     int exact_n_max = kDefaultExactNMax);

enum class MissingPolicy { pairwise_complete, listwise_complete };

class CorrelationMatrix {
 public:
  CorrelationMatrix(std::vector<AssetId> assets, std::vector<CorrEstimate> estimates,
                    Method method, MissingPolicy policy);

  const std::vector<AssetId>& assets() const { return assets_; }
  Method method() const { return method_; }
  MissingPolicy missing_policy() const { return policy_; }

  size_t pair_count() const { return estimates_.size(); }
  const std::vector<CorrEstimate>& estimates() const { return estimates_; }

  /// Estimate for the unordered pair (i, j), i != j.
  const CorrEstimate& at(size_t i, size_t j) const;

 private:
  std::vector<AssetId> assets_;
  std::vector<CorrEstimate> estimates_;  // one per i < j, row-major over pairs
  Method method_;
  MissingPolicy policy_;
};

/// Estimates every unordered pair of columns. threads = 0 picks the hardware
/// concurrency; results are identical for any worker count.
CorrelationMatrix corr_matrix(const ReturnsMatrix& matrix, Method method, MissingPolicy policy,
                              int exact_n_max = kDefaultExactNMax, unsigned threads = 1);

struct RankedPair {
  int rank = 0;  // 1-based
  std::string first;
  std::string second;
  double value = 0.0;
  int64_t n = 0;
  double p = 1.0;
  PKind p_kind = PKind::asymptotic;

  std::string pair_name() const { return first + " " + second; }
};

/// All pairs sorted by value descending, ties broken by pair name.
std::vector<RankedPair> rank_pairs(const CorrelationMatrix& cm);

/// Machine-readable table (header rank,pair,value,n,p,p_kind) with
/// full-precision values; the 4-decimal presentation table lives in render.
std::string ranked_pairs_to_csv(const std::vector<RankedPair>& pairs);
std::vector<RankedPair> ranked_pairs_from_csv(std::string_view csv);

/// Rebuilds a matrix from a ranked-pair table (assets sorted by symbol).
CorrelationMatrix matrix_from_pairs(const std::vector<RankedPair>& pairs, Method method,
                                    MissingPolicy policy);

namespace stats_detail {
/// Regularized incomplete beta I_x(a, b) by continued fraction.
double regularized_incomplete_beta(double a, double b, double x);
/// P(|T| >= t) for Student's t with dof degrees of freedom.
double student_t_two_sided_p(double t, double dof);
/// P(|Z| >= z) for a standard normal.
double normal_two_sided_p(double z);
}  // namespace stats_detail

}  // namespace corrnet
