#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "corrnet/market_data.hpp"

namespace corrnet {

struct ReturnPoint {
  Date date;
  double value = 0.0;  // decimal fraction, not percent
};

/// Daily percentage changes; the return dated d is the change from the
/// previous available observation to d.
struct ReturnSeries {
  AssetId asset;
  std::vector<ReturnPoint> points;  // strictly increasing dates
};

enum class GapPolicy {
  bridge,  // previous available observation, even across calendar gaps
  strict,  // returns spanning a gap of more than one day are dropped
};

ReturnSeries daily_returns(const PriceSeries& series, GapPolicy policy = GapPolicy::bridge);

/// Date-aligned rectangular grid of returns; a cell without a return for that
/// (date, asset) is missing.
class ReturnsMatrix {
 public:
  ReturnsMatrix(std::vector<Date> dates, std::vector<AssetId> assets,
                std::vector<std::optional<double>> cells);

  const std::vector<Date>& dates() const { return dates_; }
  const std::vector<AssetId>& assets() const { return assets_; }
  size_t rows() const { return dates_.size(); }
  size_t cols() const { return assets_.size(); }

  const std::optional<double>& cell(size_t row, size_t col) const {
    return cells_[row * assets_.size() + col];
  }

  size_t non_missing_count(size_t col) const;

  /// Wide CSV: first column "date", one column per symbol, missing as empty.
  std::string to_csv() const;
  static ReturnsMatrix from_csv(std::string_view text);

 private:
  std::vector<Date> dates_;
  std::vector<AssetId> assets_;
  std::vector<std::optional<double>> cells_;  // row-major
};

/// Aligns series on the union of their return dates within the window.
/// Rejects any asset left with fewer than 3 returns.
ReturnsMatrix align(const std::vector<ReturnSeries>& series, const DatasetWindow& window);

}  // namespace corrnet
