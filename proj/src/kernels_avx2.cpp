#include <immintrin.h>

#include "corrnet/kernels.hpp"

// AVX2 variants. Lane j of the 256-bit accumulator holds the same partial
// result as lane j of the scalar reference: per-lane adds and multiplies are
// exactly-rounded IEEE ops in the same order, so results are bit-identical.
// This unit is compiled with -mavx2 but without -mfma, and with
// -ffp-contract=off, so no fused multiply-adds can change the rounding.

namespace corrnet::kernels::detail {

namespace {

inline double combine_lanes(__m256d acc, const double* x, const double* y, std::size_t i,
                            std::size_t n) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  if (y == nullptr) {
    for (std::size_t lane = 0; i < n; ++i, ++lane) lanes[lane] += x[i];
  } else {
    for (std::size_t lane = 0; i < n; ++i, ++lane) lanes[lane] += x[i] * y[i];
  }
  return (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
}

}  // namespace

double sum_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  return combine_lanes(acc, x, nullptr, i, n);
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  return combine_lanes(acc, x, y, i, n);
}

PairCounts concordance_avx2(const double* x, const double* y, std::size_t n) {
  PairCounts counts;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const __m256d xi = _mm256_set1_pd(x[i]);
    const __m256d yi = _mm256_set1_pd(y[i]);
    std::size_t j = i + 1;
    for (; j + 4 <= n; j += 4) {
      const __m256d xj = _mm256_loadu_pd(x + j);
      const __m256d yj = _mm256_loadu_pd(y + j);
      const __m256d gx = _mm256_cmp_pd(xj, xi, _CMP_GT_OQ);
      const __m256d lx = _mm256_cmp_pd(xj, xi, _CMP_LT_OQ);
      const __m256d gy = _mm256_cmp_pd(yj, yi, _CMP_GT_OQ);
      const __m256d ly = _mm256_cmp_pd(yj, yi, _CMP_LT_OQ);
      const __m256d conc = _mm256_or_pd(_mm256_and_pd(gx, gy), _mm256_and_pd(lx, ly));
      const __m256d disc = _mm256_or_pd(_mm256_and_pd(gx, ly), _mm256_and_pd(lx, gy));
      counts.concordant += __builtin_popcount(_mm256_movemask_pd(conc));
      counts.discordant += __builtin_popcount(_mm256_movemask_pd(disc));
    }
    const double xiv = x[i], yiv = y[i];
    for (; j < n; ++j) {
      const bool gx = x[j] > xiv, lx = x[j] < xiv;
      const bool gy = y[j] > yiv, ly = y[j] < yiv;
      counts.concordant += (gx && gy) || (lx && ly);
      counts.discordant += (gx && ly) || (lx && gy);
    }
  }
  return counts;
}

}  // namespace corrnet::kernels::detail
