#include "corrnet/errors.hpp"

namespace corrnet {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::malformed_csv: return "MalformedCsv";
    case Errc::non_positive_price: return "NonPositivePrice";
    case Errc::empty_series: return "EmptySeries";
    case Errc::http_failure: return "HttpFailure";
    case Errc::malformed_response: return "MalformedResponse";
    case Errc::insufficient_coverage: return "InsufficientCoverage";
    case Errc::too_short: return "TooShort";
    case Errc::too_few_rows: return "TooFewRows";
    case Errc::non_finite: return "NonFinite";
    case Errc::degenerate_input: return "DegenerateInput";
    case Errc::too_few_observations: return "TooFewObservations";
    case Errc::no_positive_edges: return "NoPositiveEdges";
    case Errc::never_splits: return "NeverSplits";
    case Errc::node_set_mismatch: return "NodeSetMismatch";
    case Errc::degenerate_labeling: return "DegenerateLabeling";
    case Errc::empty_network: return "EmptyNetwork";
    case Errc::missing_position: return "MissingPosition";
  }
  return "UnknownError";
}

ErrorClass error_class(Errc code) {
  switch (code) {
    case Errc::invalid_argument:
      return ErrorClass::usage;
    case Errc::malformed_csv:
    case Errc::non_positive_price:
    case Errc::empty_series:
    case Errc::http_failure:
    case Errc::malformed_response:
    case Errc::insufficient_coverage:
    case Errc::too_short:
    case Errc::too_few_rows:
    case Errc::too_few_observations:
    case Errc::node_set_mismatch:
    case Errc::missing_position:
      return ErrorClass::data;
    case Errc::non_finite:
    case Errc::degenerate_input:
    case Errc::no_positive_edges:
    case Errc::never_splits:
    case Errc::degenerate_labeling:
    case Errc::empty_network:
      return ErrorClass::numeric;
  }
  return ErrorClass::data;
}

}  // namespace corrnet
