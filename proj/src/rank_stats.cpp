#include "corrnet/rank_stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <numeric>
#include <thread>

#include "corrnet/errors.hpp"
#include "corrnet/kernels.hpp"
#include "text_util.hpp"

namespace corrnet {

namespace {

void check_pair_lengths(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    raise(Errc::invalid_argument, "series lengths differ: " + std::to_string(x.size()) + " vs " +
                                      std::to_string(y.size()));
  if (x.size() < 3)
    raise(Errc::invalid_argument, "need at least 3 observations, have " +
                                      std::to_string(x.size()));
}

bool has_ties(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
}

/// Sum over tie groups of t*(t-1)/2, t*(t-1)*(t-2), t*(t-1)*(2t+5), t*(t-1).
struct TieSums {
  int64_t pairs = 0;        // sum t(t-1)/2
  int64_t t_t1 = 0;         // sum t(t-1)
  int64_t t_t1_t2 = 0;      // sum t(t-1)(t-2)
  int64_t t_t1_2t5 = 0;     // sum t(t-1)(2t+5)
};

TieSums tie_sums(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  TieSums sums;
  for (size_t i = 0; i < sorted.size();) {
    size_t j = i + 1;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const int64_t t = static_cast<int64_t>(j - i);
    sums.pairs += t * (t - 1) / 2;
    sums.t_t1 += t * (t - 1);
    sums.t_t1_t2 += t * (t - 1) * (t - 2);
    sums.t_t1_2t5 += t * (t - 1) * (2 * t + 5);
    i = j;
  }
  return sums;
}

double clamp_correlation(double v) { return std::clamp(v, -1.0, 1.0); }

int64_t factorial(int n) {
  int64_t f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

/// Exact two-sided Spearman p under the permutation null. With no ties the
/// ranks are integer permutations and rho = 1 - S/T with S = sum of squared
/// rank differences and T = n(n^2-1)/6, so |rho_perm| >= |rho_obs| is the
/// integer comparison |T - S_perm| >= |T - S_obs|.
double exact_spearman_p(const std::vector<int>& rx, const std::vector<int>& ry) {
  const int n = static_cast<int>(rx.size());
  const int64_t t_center = static_cast<int64_t>(n) * (static_cast<int64_t>(n) * n - 1) / 6;

  int64_t s_obs = 0;
  for (int i = 0; i < n; ++i) {
    const int64_t d = rx[i] - ry[i];
    s_obs += d * d;
  }
  const int64_t dev_obs = std::llabs(t_center - s_obs);

  std::vector<int> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 1);
  int64_t count = 0;
  do {
    int64_t s = 0;
    for (int i = 0; i < n; ++i) {
      const int64_t d = rx[i] - perm[static_cast<size_t>(i)];
      s += d * d;
    }
    count += std::llabs(t_center - s) >= dev_obs;
  } while (std::next_permutation(perm.begin(), perm.end()));

  return static_cast<double>(count) / static_cast<double>(factorial(n));
}

/// Exact two-sided Kendall p: the null distribution of S = nc - nd over all
/// orderings, counting |S_perm| >= |S_obs|.
double exact_kendall_p(int n, int64_t s_obs) {
  std::vector<int> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 1);
  const int64_t dev_obs = std::llabs(s_obs);
  int64_t count = 0;
  do {
    int64_t s = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) s += perm[static_cast<size_t>(j)] > perm[static_cast<size_t>(i)] ? 1 : -1;
    count += std::llabs(s) >= dev_obs;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return static_cast<double>(count) / static_cast<double>(factorial(n));
}

std::vector<int> integer_ranks(const RankVector& rv) {
  std::vector<int> out(rv.ranks.size());
  for (size_t i = 0; i < rv.ranks.size(); ++i) out[i] = static_cast<int>(std::lround(rv.ranks[i]));
  return out;
}

}  // namespace

RankVector midranks(std::span<const double> values) {
  if (values.empty()) raise(Errc::invalid_argument, "midranks of an empty vector");
  for (double v : values)
    if (!std::isfinite(v)) raise(Errc::non_finite, "value " + text::format_double(v));

  const size_t n = values.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return values[a] < values[b]; });

  RankVector rv;
  rv.ranks.assign(n, 0.0);
  for (size_t i = 0; i < n;) {
    size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // positions i+1 .. j occupy the block; everyone gets the mean position
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (size_t k = i; k < j; ++k) rv.ranks[order[k]] = mid;
    i = j;
  }
  return rv;
}

double spearman_rho(std::span<const double> x, std::span<const double> y) {
  check_pair_lengths(x, y);
  const RankVector rx = midranks(x);
  const RankVector ry = midranks(y);
  const size_t n = x.size();

  const double mean_x = kernels::sum(rx.ranks.data(), n) / static_cast<double>(n);
  const double mean_y = kernels::sum(ry.ranks.data(), n) / static_cast<double>(n);

  std::vector<double> cx(n), cy(n);
  for (size_t i = 0; i < n; ++i) {
    cx[i] = rx.ranks[i] - mean_x;
    cy[i] = ry.ranks[i] - mean_y;
  }
  const double var_x = kernels::dot(cx.data(), cx.data(), n);
  const double var_y = kernels::dot(cy.data(), cy.data(), n);
  if (var_x == 0.0 || var_y == 0.0)
    raise(Errc::degenerate_input, "constant series has no rank variance");

  const double cov = kernels::dot(cx.data(), cy.data(), n);
  return clamp_correlation(cov / std::sqrt(var_x * var_y));
}

ConcordanceBreakdown kendall_breakdown(std::span<const double> x, std::span<const double> y) {
  check_pair_lengths(x, y);
  const int64_t n = static_cast<int64_t>(x.size());
  const int64_t all_pairs = n * (n - 1) / 2;
  const auto counts = kernels::concordance_counts(x.data(), y.data(), x.size());
  return {counts.concordant, counts.discordant, all_pairs - tie_sums(x).pairs,
          all_pairs - tie_sums(y).pairs};
}

double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  const ConcordanceBreakdown b = kendall_breakdown(x, y);
  if (b.untied_pairs_x == 0 || b.untied_pairs_y == 0)
    raise(Errc::degenerate_input, "all pairs tied in one series");
  // sqrt of the product, not product of sqrts: when both counts are equal the
  // product is a perfect square and tau of identical orderings is exactly 1.
  const double denom =
      std::sqrt(static_cast<double>(b.untied_pairs_x) * static_cast<double>(b.untied_pairs_y));
  return clamp_correlation(static_cast<double>(b.concordant - b.discordant) / denom);
}

namespace stats_detail {

namespace {

/// Continued-fraction core (Lentz), valid for x < (a+1)/(a+b+2).
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) raise(Errc::invalid_argument, "incomplete beta needs a, b > 0");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double dof) {
  // P(|T| >= t) = I_{dof/(dof+t^2)}(dof/2, 1/2)
  if (!std::isfinite(t)) return 0.0;
  return regularized_incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t));
}

double normal_two_sided_p(double z) {
  return std::erfc(std::fabs(z) / std::sqrt(2.0));
}

}  // namespace stats_detail

CorrEstimate sr_test(std::span<const double> x, std::span<const double> y, int exact_n_max) {
  const double rho = spearman_rho(x, y);
  const int64_t n = static_cast<int64_t>(x.size());
  const bool tied = has_ties(x) || has_ties(y);

  CorrEstimate est;
  est.method = Method::spearman;
  est.value = rho;
  est.n = n;
  est.had_ties = tied;

  if (!tied && n <= exact_n_max) {
    est.p_kind = PKind::exact;
    est.p_two_sided = exact_spearman_p(integer_ranks(midranks(x)), integer_ranks(midranks(y)));
    return est;
  }

  est.p_kind = PKind::asymptotic;
  if (std::fabs(rho) == 1.0) {
    est.p_two_sided = 0.0;
    return est;
  }
  // t = rho * sqrt((n-2)/(1-rho^2)) against Student's t with n-2 dof.
  const double dof = static_cast<double>(n - 2);
  const double t = rho * std::sqrt(dof / (1.0 - rho * rho));
  est.p_two_sided = std::clamp(stats_detail::student_t_two_sided_p(t, dof), 0.0, 1.0);
  return est;
}

CorrEstimate kt_test(std::span<const double> x, std::span<const double> y, int exact_n_max) {
  const ConcordanceBreakdown b = kendall_breakdown(x, y);
  if (b.untied_pairs_x == 0 || b.untied_pairs_y == 0)
    raise(Errc::degenerate_input, "all pairs tied in one series");

  const int64_t n = static_cast<int64_t>(x.size());
  const bool tied = has_ties(x) || has_ties(y);
  const int64_t s = b.concordant - b.discordant;

  CorrEstimate est;
  est.method = Method::kendall_b;
  est.value = clamp_correlation(
      static_cast<double>(s) /
      std::sqrt(static_cast<double>(b.untied_pairs_x) * static_cast<double>(b.untied_pairs_y)));
  est.n = n;
  est.had_ties = tied;

  if (!tied && n <= exact_n_max) {
    est.p_kind = PKind::exact;
    est.p_two_sided = exact_kendall_p(static_cast<int>(n), s);
    return est;
  }

  // Normal approximation for S = nc - nd with the tie-corrected variance
  // (Kendall 1945, as used by R's cor.test and scipy's kendalltau):
  //   Var(S) = [n(n-1)(2n+5) - sum_t t(t-1)(2t+5) - sum_u u(u-1)(2u+5)] / 18
  //          + [sum_t t(t-1)(t-2)][sum_u u(u-1)(u-2)] / (9 n(n-1)(n-2))
  //          + [sum_t t(t-1)][sum_u u(u-1)] / (2 n(n-1))
  // where t, u run over tie-group sizes of x and y. z = S / sqrt(Var(S)).
  const TieSums tx = tie_sums(x);
  const TieSums ty = tie_sums(y);
  const double nd = static_cast<double>(n);
  const double v0 = nd * (nd - 1.0) * (2.0 * nd + 5.0);
  double var_s = (v0 - static_cast<double>(tx.t_t1_2t5) - static_cast<double>(ty.t_t1_2t5)) / 18.0;
  var_s += static_cast<double>(tx.t_t1_t2) * static_cast<double>(ty.t_t1_t2) /
           (9.0 * nd * (nd - 1.0) * (nd - 2.0));
  var_s += static_cast<double>(tx.t_t1) * static_cast<double>(ty.t_t1) / (2.0 * nd * (nd - 1.0));
  if (var_s <= 0.0) raise(Errc::degenerate_input, "degenerate tie structure");

  est.p_kind = PKind::asymptotic;
  const double z = static_cast<double>(s) / std::sqrt(var_s);
  est.p_two_sided = std::clamp(stats_detail::normal_two_sided_p(z), 0.0, 1.0);
  return est;
}

CorrelationMatrix::CorrelationMatrix(std::vector<AssetId> assets,
                                     std::vector<CorrEstimate> estimates, Method method,
                                     MissingPolicy policy)
    : assets_(std::move(assets)), estimates_(std::move(estimates)), method_(method),
      policy_(policy) {
  const size_t n = assets_.size();
  if (estimates_.size() != n * (n - 1) / 2)
    raise(Errc::invalid_argument, "estimate count does not match asset count");
}

const CorrEstimate& CorrelationMatrix::at(size_t i, size_t j) const {
  const size_t n = assets_.size();
  if (i == j || i >= n || j >= n) raise(Errc::invalid_argument, "bad pair index");
  if (i > j) std::swap(i, j);
  // index of (i, j), i < j, in row-major upper-triangle order
  const size_t idx = i * n - i * (i + 1) / 2 + (j - i - 1);
  return estimates_[idx];
}

CorrelationMatrix corr_matrix(const ReturnsMatrix& matrix, Method method, MissingPolicy policy,
                              int exact_n_max, unsigned threads) {
  const size_t ncols = matrix.cols();
  if (ncols < 2) raise(Errc::invalid_argument, "need at least 2 assets");

  // Row filter for listwise deletion; pairwise filtering happens per pair.
  std::vector<char> row_ok(matrix.rows(), 1);
  if (policy == MissingPolicy::listwise_complete) {
    for (size_t r = 0; r < matrix.rows(); ++r)
      for (size_t c = 0; c < ncols; ++c)
        if (!matrix.cell(r, c)) {
          row_ok[r] = 0;
          break;
        }
  }

  struct PairTask {
    size_t i, j;
  };
  std::vector<PairTask> tasks;
  for (size_t i = 0; i < ncols; ++i)
    for (size_t j = i + 1; j < ncols; ++j) tasks.push_back({i, j});

  std::vector<CorrEstimate> estimates(tasks.size());
  std::vector<std::exception_ptr> failures(tasks.size());

  auto run_task = [&](size_t t) {
    const auto [i, j] = tasks[t];
    const auto& a = matrix.assets()[i];
    const auto& b = matrix.assets()[j];
    try {
      std::vector<double> xs, ys;
      xs.reserve(matrix.rows());
      ys.reserve(matrix.rows());
      for (size_t r = 0; r < matrix.rows(); ++r) {
        if (!row_ok[r]) continue;
        const auto& xv = matrix.cell(r, i);
        const auto& yv = matrix.cell(r, j);
        if (!xv || !yv) continue;
        xs.push_back(*xv);
        ys.push_back(*yv);
      }
      if (xs.size() < 3)
        raise(Errc::too_few_observations,
              "pair (" + a.symbol + ", " + b.symbol + ") has " + std::to_string(xs.size()) +
                  " complete observations");
      try {
        CorrEstimate est = method == Method::spearman ? sr_test(xs, ys, exact_n_max)
                                                      : kt_test(xs, ys, exact_n_max);
        est.pair = {a.symbol, b.symbol};
        estimates[t] = std::move(est);
      } catch (const Error& e) {
        if (e.code() == Errc::degenerate_input)
          raise(e.code(), "pair (" + a.symbol + ", " + b.symbol + "): " + e.what());
        throw;
      }
    } catch (...) {
      failures[t] = std::current_exception();
    }
  };

  unsigned nthreads = threads == 0 ? std::thread::hardware_concurrency() : threads;
  nthreads = std::max(1u, std::min<unsigned>(nthreads, static_cast<unsigned>(tasks.size())));
  if (nthreads <= 1) {
    for (size_t t = 0; t < tasks.size(); ++t) run_task(t);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> workers;
    for (unsigned w = 0; w < nthreads; ++w)
      workers.emplace_back([&] {
        for (size_t t; (t = next.fetch_add(1)) < tasks.size();) run_task(t);
      });
    for (auto& w : workers) w.join();
  }

  // first failure in pair order, independent of completion order
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  return CorrelationMatrix(matrix.assets(), std::move(estimates), method, policy);
}

std::vector<RankedPair> rank_pairs(const CorrelationMatrix& cm) {
  std::vector<RankedPair> pairs;
  pairs.reserve(cm.pair_count());
  for (const auto& est : cm.estimates()) {
    RankedPair rp;
    rp.first = est.pair[0];
    rp.second = est.pair[1];
    rp.value = est.value;
    rp.n = est.n;
    rp.p = est.p_two_sided;
    rp.p_kind = est.p_kind;
    pairs.push_back(std::move(rp));
  }
  std::sort(pairs.begin(), pairs.end(), [](const RankedPair& a, const RankedPair& b) {
    if (a.value != b.value) return a.value > b.value;
    return a.pair_name() < b.pair_name();
  });
  for (size_t i = 0; i < pairs.size(); ++i) pairs[i].rank = static_cast<int>(i + 1);
  return pairs;
}

std::string ranked_pairs_to_csv(const std::vector<RankedPair>& pairs) {
  std::string out = "rank,pair,value,n,p,p_kind\n";
  for (const auto& rp : pairs) {
    out += std::to_string(rp.rank);
    out += ',';
    out += rp.pair_name();
    out += ',';
    out += text::format_double(rp.value);
    out += ',';
    out += std::to_string(rp.n);
    out += ',';
    out += text::format_double(rp.p);
    out += ',';
    out += rp.p_kind == PKind::exact ? "exact" : "asymptotic";
    out += '\n';
  }
  return out;
}

std::vector<RankedPair> ranked_pairs_from_csv(std::string_view csv) {
  const auto lines = text::split_lines(csv);
  if (lines.empty() || lines.front() != "rank,pair,value,n,p,p_kind")
    raise(Errc::malformed_csv, "expected header rank,pair,value,n,p,p_kind");
  std::vector<RankedPair> pairs;
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto fields = text::split_fields(lines[i]);
    if (fields.size() != 6)
      raise(Errc::malformed_csv, "row " + std::to_string(i + 1) + ": expected 6 fields");
    const auto rank = text::parse_int(fields[0]);
    const auto symbols = text::split_fields(fields[1], ' ');
    const auto value = text::parse_double(fields[2]);
    const auto n = text::parse_int(fields[3]);
    const auto p = text::parse_double(fields[4]);
    const bool kind_ok = fields[5] == "exact" || fields[5] == "asymptotic";
    if (!rank || symbols.size() != 2 || symbols[0].empty() || symbols[1].empty() || !value ||
        !n || !p || !kind_ok)
      raise(Errc::malformed_csv, "row " + std::to_string(i + 1) + ": bad field");
    RankedPair rp;
    rp.rank = static_cast<int>(*rank);
    rp.first = std::string(symbols[0]);
    rp.second = std::string(symbols[1]);
    rp.value = *value;
    rp.n = *n;
    rp.p = *p;
    rp.p_kind = fields[5] == "exact" ? PKind::exact : PKind::asymptotic;
    pairs.push_back(std::move(rp));
  }
  return pairs;
}

CorrelationMatrix matrix_from_pairs(const std::vector<RankedPair>& pairs, Method method,
                                    MissingPolicy policy) {
  std::map<std::string, size_t> index;
  for (const auto& rp : pairs) {
    index.emplace(rp.first, 0);
    index.emplace(rp.second, 0);
  }
  std::vector<AssetId> assets;
  for (auto& [symbol, idx] : index) {
    idx = assets.size();
    assets.push_back({symbol, symbol});
  }

  const size_t n = assets.size();
  if (pairs.size() != n * (n - 1) / 2)
    raise(Errc::malformed_csv, "table does not cover every unordered pair exactly once");

  std::vector<CorrEstimate> estimates(pairs.size());
  std::vector<char> filled(pairs.size(), 0);
  for (const auto& rp : pairs) {
    size_t i = index[rp.first], j = index[rp.second];
    if (i > j) std::swap(i, j);
    const size_t idx = i * n - i * (i + 1) / 2 + (j - i - 1);
    if (filled[idx]) raise(Errc::malformed_csv, "duplicate pair " + rp.pair_name());
    filled[idx] = 1;
    CorrEstimate est;
    est.pair = {assets[i].symbol, assets[j].symbol};
    est.method = method;
    est.value = rp.value;
    est.n = rp.n;
    est.p_two_sided = rp.p;
    est.p_kind = rp.p_kind;
    estimates[idx] = std::move(est);
  }
  return CorrelationMatrix(std::move(assets), std::move(estimates), method, policy);
}

}  // namespace corrnet
