#include <filesystem>
#include <map>

#include <httplib.h>
#include <json.hpp>

#include "corrnet/errors.hpp"
#include "corrnet/market_data.hpp"
#include "file_util.hpp"

namespace corrnet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // /path?query ("/" if absent)
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    raise(Errc::invalid_argument, "endpoint must be an absolute http(s) URL: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::string substitute_symbol(std::string templ, const std::string& symbol) {
  const std::string placeholder = "{symbol}";
  for (size_t pos; (pos = templ.find(placeholder)) != std::string::npos;)
    templ.replace(pos, placeholder.size(), symbol);
  return templ;
}

fs::path cache_file(const FetchOptions& options, const AssetId& asset,
                    const DatasetWindow& window) {
  return fs::path(options.cache_dir) /
         (asset.symbol + "_" + window.start.to_string() + "_" + window.end.to_string() + ".json");
}

/// Parses "[[epoch_millis, price], ...]", windows it, keeps the last pair per
/// UTC day.
PriceSeries series_from_pairs(const AssetId& asset, const DatasetWindow& window,
                              const std::string& body) {
  const json doc = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_array())
    raise(Errc::malformed_response, "expected a JSON array of [epoch_millis, price] pairs");

  std::map<Date, double> by_date;
  for (const auto& entry : doc) {
    if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number() || !entry[1].is_number())
      raise(Errc::malformed_response, "expected [epoch_millis, price], got " + entry.dump());
    const Date d = Date::from_epoch_millis(entry[0].get<int64_t>());
    if (d >= window.start && d <= window.end) by_date[d] = entry[1].get<double>();
  }
  if (by_date.empty())
    raise(Errc::empty_series, asset.symbol + ": no observations within " +
                                  window.start.to_string() + ".." + window.end.to_string());

  PriceSeries series{asset, {}};
  for (const auto& [date, price] : by_date) series.points.push_back({date, price});
  return series;
}

std::string pairs_json(const PriceSeries& series) {
  json doc = json::array();
  for (const auto& p : series.points) doc.push_back({p.date.to_epoch_millis(), p.price_usd});
  return doc.dump();
}

}  // namespace

PriceSeries fetch_price_history(const AssetId& asset, const DatasetWindow& window,
                                const std::string& endpoint, const FetchOptions& options) {
  if (window.start > window.end) raise(Errc::invalid_argument, "window start after end");

  if (!options.cache_dir.empty()) {
    const fs::path cached = cache_file(options, asset, window);
    if (fs::exists(cached))
      return series_from_pairs(asset, window, fileio::read_file(cached, Errc::http_failure));
  }

  const auto [origin, path] = split_url(substitute_symbol(endpoint, asset.symbol));
  httplib::Client client(origin);
  client.set_connection_timeout(options.timeout_seconds);
  client.set_read_timeout(options.timeout_seconds);
  client.set_follow_location(true);

  const httplib::Result res = client.Get(path);
  if (!res)
    raise(Errc::http_failure,
          asset.symbol + ": " + origin + " unreachable (" + httplib::to_string(res.error()) + ")");
  if (res->status != 200)
    raise(Errc::http_failure, asset.symbol + ": HTTP " + std::to_string(res->status) + " from " +
                                  origin + path);

  PriceSeries series = series_from_pairs(asset, window, res->body);
  if (!options.cache_dir.empty())
    fileio::write_file_atomic(cache_file(options, asset, window), pairs_json(series));
  return series;
}

}  // namespace corrnet
