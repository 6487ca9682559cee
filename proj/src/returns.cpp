#include "corrnet/returns.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "corrnet/errors.hpp"
#include "text_util.hpp"

namespace corrnet {

ReturnSeries daily_returns(const PriceSeries& series, GapPolicy policy) {
  if (series.points.size() < 2)
    raise(Errc::too_short, series.asset.symbol + ": need at least 2 price points, have " +
                               std::to_string(series.points.size()));

  ReturnSeries out{series.asset, {}};
  out.points.reserve(series.points.size() - 1);
  for (size_t i = 1; i < series.points.size(); ++i) {
    const auto& prev = series.points[i - 1];
    const auto& cur = series.points[i];
    if (policy == GapPolicy::strict && cur.date - prev.date > 1) continue;
    out.points.push_back({cur.date, cur.price_usd / prev.price_usd - 1.0});
  }
  return out;
}

ReturnsMatrix::ReturnsMatrix(std::vector<Date> dates, std::vector<AssetId> assets,
                             std::vector<std::optional<double>> cells)
    : dates_(std::move(dates)), assets_(std::move(assets)), cells_(std::move(cells)) {
  if (cells_.size() != dates_.size() * assets_.size())
    raise(Errc::invalid_argument, "returns matrix is not rectangular");
}

size_t ReturnsMatrix::non_missing_count(size_t col) const {
  size_t count = 0;
  for (size_t row = 0; row < dates_.size(); ++row)
    if (cell(row, col)) ++count;
  return count;
}

std::string ReturnsMatrix::to_csv() const {
  std::string out = "date";
  for (const auto& a : assets_) {
    out += ',';
    out += a.symbol;
  }
  out += '\n';
  for (size_t row = 0; row < dates_.size(); ++row) {
    out += dates_[row].to_string();
    for (size_t col = 0; col < assets_.size(); ++col) {
      out += ',';
      if (const auto& v = cell(row, col)) out += text::format_double(*v);
    }
    out += '\n';
  }
  return out;
}

ReturnsMatrix ReturnsMatrix::from_csv(std::string_view csv) {
  const auto lines = text::split_lines(csv);
  if (lines.empty()) raise(Errc::malformed_csv, "empty returns matrix");
  const auto header = text::split_fields(lines.front());
  if (header.size() < 2 || header.front() != "date")
    raise(Errc::malformed_csv, "returns matrix header must start with \"date\"");

  std::vector<AssetId> assets;
  for (size_t i = 1; i < header.size(); ++i) {
    if (header[i].empty()) raise(Errc::malformed_csv, "empty symbol in header");
    assets.push_back({std::string(header[i]), std::string(header[i])});
  }

  std::vector<Date> dates;
  std::vector<std::optional<double>> cells;
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto fields = text::split_fields(lines[i]);
    if (fields.size() != header.size())
      raise(Errc::malformed_csv, "row " + std::to_string(i + 1) + ": expected " +
                                     std::to_string(header.size()) + " fields");
    const auto date = Date::parse(fields.front());
    if (!date)
      raise(Errc::malformed_csv, "row " + std::to_string(i + 1) + ": bad date \"" +
                                     std::string(fields.front()) + "\"");
    dates.push_back(*date);
    for (size_t f = 1; f < fields.size(); ++f) {
      if (fields[f].empty()) {
        cells.emplace_back(std::nullopt);
        continue;
      }
      const auto value = text::parse_double(fields[f]);
      if (!value)
        raise(Errc::malformed_csv, "row " + std::to_string(i + 1) + ": bad value \"" +
                                       std::string(fields[f]) + "\"");
      cells.emplace_back(*value);
    }
  }
  return ReturnsMatrix(std::move(dates), std::move(assets), std::move(cells));
}

ReturnsMatrix align(const std::vector<ReturnSeries>& series, const DatasetWindow& window) {
  if (series.size() < 2) raise(Errc::invalid_argument, "align needs at least 2 return series");

  std::set<std::string> seen;
  for (const auto& s : series)
    if (!seen.insert(s.asset.symbol).second)
      raise(Errc::invalid_argument, "duplicate asset symbol " + s.asset.symbol);

  std::set<Date> date_union;
  for (const auto& s : series)
    for (const auto& p : s.points)
      if (p.date >= window.start && p.date <= window.end) date_union.insert(p.date);

  const std::vector<Date> dates(date_union.begin(), date_union.end());
  std::vector<AssetId> assets;
  assets.reserve(series.size());
  for (const auto& s : series) assets.push_back(s.asset);

  std::vector<std::optional<double>> cells(dates.size() * assets.size());
  std::string offenders;
  for (size_t col = 0; col < series.size(); ++col) {
    size_t count = 0;
    for (const auto& p : series[col].points) {
      if (p.date < window.start || p.date > window.end) continue;
      const auto row = std::lower_bound(dates.begin(), dates.end(), p.date) - dates.begin();
      cells[static_cast<size_t>(row) * assets.size() + col] = p.value;
      ++count;
    }
    if (count < 3) {
      if (!offenders.empty()) offenders += ", ";
      offenders += series[col].asset.symbol + " (" + std::to_string(count) + ")";
    }
  }
  if (!offenders.empty())
    raise(Errc::too_few_rows, "fewer than 3 returns in window for: " + offenders);

  return ReturnsMatrix(dates, std::move(assets), std::move(cells));
}

}  // namespace corrnet
