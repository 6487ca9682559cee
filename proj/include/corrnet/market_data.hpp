#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "corrnet/dates.hpp"

namespace corrnet {

/// Short lowercase ticker plus a human-readable name ("btc" / "Bitcoin").
struct AssetId {
  std::string symbol;
  std::string display_name;
};

struct PricePoint {
  Date date;
  double price_usd = 0.0;  // > 0
};

/// Daily USD observations, strictly increasing dates, calendar gaps allowed.
struct PriceSeries {
  AssetId asset;
  std::vector<PricePoint> points;
};

/// Inclusive date range.
struct DatasetWindow {
  Date start;
  Date end;
};

struct Dataset {
  DatasetWindow window;
  std::vector<PriceSeries> series;  // each restricted to window, non-empty
};

enum class CsvFormat {
  coingecko_export,     // header: snapped_at,price,market_cap,total_volume
  generic_two_column,   // header: date,price
};

/// Parses a daily price CSV. Rows may arrive unsorted; duplicate dates keep
/// the last row; timestamps are truncated to the UTC day.
PriceSeries parse_price_csv(const AssetId& asset, std::string_view text, CsvFormat format);

/// Serializes in generic_two_column form; parse_price_csv round-trips it.
std::string to_generic_csv(const PriceSeries& series);

struct FetchOptions {
  std::string cache_dir;       // empty disables caching
  int timeout_seconds = 30;
};

/// GETs a JSON array of [epoch_millis, price] pairs and windows it. The
/// endpoint may contain a "{symbol}" placeholder. With a cache directory set,
/// the windowed series is stored one JSON file per (symbol, start, end) and
/// later calls are served from disk without touching the network.
PriceSeries fetch_price_history(const AssetId& asset, const DatasetWindow& window,
                                const std::string& endpoint, const FetchOptions& options = {});

/// Restricts every series to the window. Series with no observation at or
/// before the window start are rejected by name rather than truncated, so a
/// caller picking a later window does so explicitly.
Dataset build_dataset(std::vector<PriceSeries> series, const DatasetWindow& window);

struct MissingReport {
  AssetId asset;
  std::vector<Date> missing_dates;
};

/// Every calendar day of the window absent from each series.
std::vector<MissingReport> report_missing(const Dataset& dataset);

}  // namespace corrnet
