#include "corrnet/kernels.hpp"

// Reference kernels. The striped accumulation order defined in kernels.hpp is
// the contract; the SIMD variants reproduce it lane for lane.

namespace corrnet::kernels::detail {

double sum_scalar(const double* x, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc[0] += x[i];
    acc[1] += x[i + 1];
    acc[2] += x[i + 2];
    acc[3] += x[i + 3];
  }
  for (std::size_t lane = 0; i < n; ++i, ++lane) acc[lane] += x[i];
  return (acc[0] + acc[2]) + (acc[1] + acc[3]);
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc[0] += x[i] * y[i];
    acc[1] += x[i + 1] * y[i + 1];
    acc[2] += x[i + 2] * y[i + 2];
    acc[3] += x[i + 3] * y[i + 3];
  }
  for (std::size_t lane = 0; i < n; ++i, ++lane) acc[lane] += x[i] * y[i];
  return (acc[0] + acc[2]) + (acc[1] + acc[3]);
}

PairCounts concordance_scalar(const double* x, const double* y, std::size_t n) {
  PairCounts counts;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double xi = x[i], yi = y[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool gx = x[j] > xi, lx = x[j] < xi;
      const bool gy = y[j] > yi, ly = y[j] < yi;
      counts.concordant += (gx && gy) || (lx && ly);
      counts.discordant += (gx && ly) || (lx && gy);
    }
  }
  return counts;
}

}  // namespace corrnet::kernels::detail
