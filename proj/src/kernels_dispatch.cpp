#include <atomic>
#include <cstdlib>
#include <string>

#include "corrnet/errors.hpp"
#include "corrnet/kernels.hpp"

namespace corrnet::kernels {

namespace {

bool host_has_avx2() {
#if defined(CORRNET_HAVE_AVX2)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa detect_default() {
  if (const char* env = std::getenv("CORRNET_KERNEL")) {
    const std::string value(env);
    if (value == "scalar") return Isa::scalar;
    if (value == "avx2") {
      if (!host_has_avx2())
        raise(Errc::invalid_argument, "CORRNET_KERNEL=avx2 but this host lacks AVX2");
      return Isa::avx2;
    }
    if (!value.empty() && value != "auto")
      raise(Errc::invalid_argument, "CORRNET_KERNEL must be scalar, avx2, or auto (got \"" +
                                        value + "\")");
  }
  return host_has_avx2() ? Isa::avx2 : Isa::scalar;
}

// -1 = automatic; otherwise holds an Isa value forced via force().
std::atomic<int> g_forced{-1};

Isa current() {
  const int forced = g_forced.load(std::memory_order_relaxed);
  if (forced >= 0) return static_cast<Isa>(forced);
  static const Isa detected = detect_default();
  return detected;
}

}  // namespace

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

bool supported(Isa isa) {
  switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2: return host_has_avx2();
  }
  return false;
}

Isa active() { return current(); }

void force(Isa isa) {
  if (!supported(isa))
    raise(Errc::invalid_argument, std::string("kernel variant not supported on this host: ") +
                                      isa_name(isa));
  g_forced.store(static_cast<int>(isa), std::memory_order_relaxed);
}

void reset() { g_forced.store(-1, std::memory_order_relaxed); }

double sum(const double* x, std::size_t n) {
#if defined(CORRNET_HAVE_AVX2)
  if (current() == Isa::avx2) return detail::sum_avx2(x, n);
#endif
  return detail::sum_scalar(x, n);
}

double dot(const double* x, const double* y, std::size_t n) {
#if defined(CORRNET_HAVE_AVX2)
  if (current() == Isa::avx2) return detail::dot_avx2(x, y, n);
#endif
  return detail::dot_scalar(x, y, n);
}

PairCounts concordance_counts(const double* x, const double* y, std::size_t n) {
#if defined(CORRNET_HAVE_AVX2)
  if (current() == Isa::avx2) return detail::concordance_avx2(x, y, n);
#endif
  return detail::concordance_scalar(x, y, n);
}

}  // namespace corrnet::kernels
