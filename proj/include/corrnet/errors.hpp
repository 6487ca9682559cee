#pragma once

#include <stdexcept>
#include <string>

namespace corrnet {

// Every failure the library reports, one code per condition.
enum class Errc {
  invalid_argument,

  // ingestion
  malformed_csv,
  non_positive_price,
  empty_series,
  http_failure,
  malformed_response,
  insufficient_coverage,

  // returns
  too_short,
  too_few_rows,

  // rank statistics
  non_finite,
  degenerate_input,
  too_few_observations,

  // network
  no_positive_edges,
  never_splits,
  node_set_mismatch,
  degenerate_labeling,

  // layout / render
  empty_network,
  missing_position,
};

// Process exit code buckets used by the CLI.
enum class ErrorClass { usage = 2, data = 3, numeric = 4 };

ErrorClass error_class(Errc code);
const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace corrnet
