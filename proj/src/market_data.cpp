#include "corrnet/market_data.hpp"

#include <cmath>
#include <map>
#include <set>

#include "corrnet/errors.hpp"
#include "text_util.hpp"

namespace corrnet {

namespace {

constexpr std::string_view kCoingeckoHeader = "snapped_at,price,market_cap,total_volume";
constexpr std::string_view kGenericHeader = "date,price";

// "2013-04-28" or "2013-04-28 00:00:00 UTC"; anything past the day is cut.
std::optional<Date> parse_day_field(std::string_view field) {
  if (field.size() > 10) {
    if (field[10] != ' ' && field[10] != 'T') return std::nullopt;
    field = field.substr(0, 10);
  }
  return Date::parse(field);
}

}  // namespace

PriceSeries parse_price_csv(const AssetId& asset, std::string_view text, CsvFormat format) {
  const auto lines = text::split_lines(text);
  const std::string_view want_header =
      format == CsvFormat::coingecko_export ? kCoingeckoHeader : kGenericHeader;
  const size_t want_fields = format == CsvFormat::coingecko_export ? 4 : 2;

  if (lines.empty() || lines.front() != want_header)
    raise(Errc::malformed_csv, "expected header \"" + std::string(want_header) + "\"");

  std::map<Date, double> by_date;  // last row wins per date
  for (size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = text::split_fields(lines[i]);
    if (fields.size() != want_fields)
      raise(Errc::malformed_csv,
            "row " + std::to_string(i + 1) + ": expected " + std::to_string(want_fields) +
                " fields, got " + std::to_string(fields.size()));
    const auto date = parse_day_field(fields[0]);
    if (!date)
      raise(Errc::malformed_csv, "row " + std::to_string(i + 1) + ": bad date \"" +
                                     std::string(fields[0]) + "\"");
    const auto price = text::parse_double(fields[1]);
    if (!price || !std::isfinite(*price))
      raise(Errc::malformed_csv, "row " + std::to_string(i + 1) + ": bad price \"" +
                                     std::string(fields[1]) + "\"");
    if (*price <= 0.0)
      raise(Errc::non_positive_price, "row " + std::to_string(i + 1) + " (" + date->to_string() +
                                          "): price " + text::format_double(*price));
    by_date[*date] = *price;
  }

  if (by_date.empty()) raise(Errc::empty_series, "no data rows for " + asset.symbol);

  PriceSeries series{asset, {}};
  series.points.reserve(by_date.size());
  for (const auto& [date, price] : by_date) series.points.push_back({date, price});
  return series;
}

std::string to_generic_csv(const PriceSeries& series) {
  std::string out{kGenericHeader};
  out += '\n';
  for (const auto& p : series.points) {
    out += p.date.to_string();
    out += ',';
    out += text::format_double(p.price_usd);
    out += '\n';
  }
  return out;
}

Dataset build_dataset(std::vector<PriceSeries> series, const DatasetWindow& window) {
  if (window.start > window.end) raise(Errc::invalid_argument, "window start after end");
  if (series.size() < 2) raise(Errc::invalid_argument, "a dataset needs at least 2 series");

  std::set<std::string> seen;
  for (const auto& s : series) {
    if (s.asset.symbol.empty()) raise(Errc::invalid_argument, "empty asset symbol");
    if (!seen.insert(s.asset.symbol).second)
      raise(Errc::invalid_argument, "duplicate asset symbol " + s.asset.symbol);
  }

  std::string offenders;
  Dataset out{window, {}};
  for (auto& s : series) {
    const bool starts_late = s.points.empty() || s.points.front().date > window.start;
    std::vector<PricePoint> windowed;
    for (const auto& p : s.points)
      if (p.date >= window.start && p.date <= window.end) windowed.push_back(p);
    if (starts_late || windowed.empty()) {
      if (!offenders.empty()) offenders += ", ";
      offenders += s.asset.symbol;
      offenders += s.points.empty() ? " (no data)"
                                    : " (earliest " + s.points.front().date.to_string() + ")";
      continue;
    }
    out.series.push_back({s.asset, std::move(windowed)});
  }

  if (!offenders.empty())
    raise(Errc::insufficient_coverage,
          "coverage starts after " + window.start.to_string() + " for: " + offenders);
  return out;
}

std::vector<MissingReport> report_missing(const Dataset& dataset) {
  std::vector<MissingReport> reports;
  reports.reserve(dataset.series.size());
  for (const auto& s : dataset.series) {
    std::set<Date> observed;
    for (const auto& p : s.points) observed.insert(p.date);
    MissingReport report{s.asset, {}};
    for (Date d = dataset.window.start; d <= dataset.window.end; d = d.next())
      if (!observed.contains(d)) report.missing_dates.push_back(d);
    reports.push_back(std::move(report));
  }
  return reports;
}

}  // namespace corrnet
