#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "corrnet/errors.hpp"
#include "corrnet/returns.hpp"
#include "corrnet/rng.hpp"

using namespace corrnet;

namespace {

Date d(const char* iso) { return *Date::parse(iso); }

bool throws_code(Errc code, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code() == code;
  }
  return false;
}

PriceSeries series_on_days(const std::string& symbol, Date start,
                           const std::vector<std::pair<int, double>>& day_prices) {
  PriceSeries s{{symbol, symbol}, {}};
  for (const auto& [offset, price] : day_prices) s.points.push_back({start + offset, price});
  return s;
}

}  // namespace

TEST_CASE("consecutive-day returns") {
  const auto s = series_on_days("aaa", d("2018-01-01"), {{0, 100}, {1, 110}, {2, 99}});
  const auto r = daily_returns(s);
  REQUIRE(r.points.size() == 2);
  CHECK(r.points[0].date == d("2018-01-02"));
  CHECK(r.points[0].value == doctest::Approx(0.10).epsilon(1e-14));
  CHECK(r.points[1].value == doctest::Approx(-0.10).epsilon(1e-14));
}

TEST_CASE("constant prices give zero returns") {
  const auto r =
      daily_returns(series_on_days("aaa", d("2018-01-01"), {{0, 50}, {1, 50}, {2, 50}}));
  REQUIRE(r.points.size() == 2);
  CHECK(r.points[0].value == 0.0);
  CHECK(r.points[1].value == 0.0);
}

TEST_CASE("gap handling: bridge keeps the spanning return, strict drops it") {
  const auto s = series_on_days("aaa", d("2018-01-01"), {{0, 100}, {2, 105}});
  const auto bridged = daily_returns(s, GapPolicy::bridge);
  REQUIRE(bridged.points.size() == 1);
  CHECK(bridged.points[0].date == d("2018-01-03"));
  CHECK(bridged.points[0].value == doctest::Approx(0.05).epsilon(1e-14));

  const auto strict = daily_returns(s, GapPolicy::strict);
  CHECK(strict.points.empty());

  // the observation after the gap still produces a return under strict
  const auto s2 = series_on_days("aaa", d("2018-01-01"), {{0, 100}, {2, 105}, {3, 210}});
  const auto strict2 = daily_returns(s2, GapPolicy::strict);
  REQUIRE(strict2.points.size() == 1);
  CHECK(strict2.points[0].date == d("2018-01-04"));
  CHECK(strict2.points[0].value == doctest::Approx(1.0));
}

TEST_CASE("too-short series") {
  CHECK(throws_code(Errc::too_short,
                    [] { daily_returns(series_on_days("aaa", d("2018-01-01"), {{0, 1}})); }));
}

TEST_CASE("returns are scale-invariant") {
  SplitMix64 rng(7);
  PriceSeries s{{"aaa", ""}, {}};
  for (int i = 0; i < 40; ++i)
    s.points.push_back({d("2018-01-01") + i, 20.0 + rng.next_unit() * 100.0});
  const auto base = daily_returns(s);

  // dyadic scaling is exact in floating point: identical series
  PriceSeries scaled = s;
  for (auto& p : scaled.points) p.price_usd *= 1024.0;
  const auto r2 = daily_returns(scaled);
  for (size_t i = 0; i < base.points.size(); ++i) CHECK(r2.points[i].value == base.points[i].value);

  // arbitrary positive scaling agrees to rounding error
  PriceSeries scaled3 = s;
  for (auto& p : scaled3.points) p.price_usd *= 3.7;
  const auto r3 = daily_returns(scaled3);
  for (size_t i = 0; i < base.points.size(); ++i)
    CHECK(r3.points[i].value == doctest::Approx(base.points[i].value).epsilon(1e-12));
}

TEST_CASE("bridge return count is observations minus one") {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    PriceSeries s{{"aaa", ""}, {}};
    Date day = d("2017-01-01");
    const int n = 2 + static_cast<int>(rng.next_below(50));
    for (int i = 0; i < n; ++i) {
      day = day + 1 + static_cast<int32_t>(rng.next_below(4));
      s.points.push_back({day, 1.0 + rng.next_unit()});
    }
    CHECK(daily_returns(s, GapPolicy::bridge).points.size() == s.points.size() - 1);
  }
}

TEST_CASE("align: two complete series over 5 days") {
  const DatasetWindow window{d("2018-01-01"), d("2018-01-05")};
  std::vector<std::pair<int, double>> days5{{0, 10}, {1, 11}, {2, 12}, {3, 13}, {4, 14}};
  const auto ra = daily_returns(series_on_days("aaa", window.start, days5));
  const auto rb = daily_returns(series_on_days("bbb", window.start, days5));
  const auto m = align({ra, rb}, window);
  CHECK(m.rows() == 4);  // first differencing loses one row
  CHECK(m.cols() == 2);
  for (size_t r = 0; r < m.rows(); ++r)
    for (size_t c = 0; c < m.cols(); ++c) CHECK(m.cell(r, c).has_value());
  CHECK(m.non_missing_count(0) == 4);
}

TEST_CASE("align: a date missing for one asset is exactly one missing cell") {
  const DatasetWindow window{d("2018-01-01"), d("2018-01-06")};
  const auto ra = daily_returns(series_on_days(
      "aaa", window.start, {{0, 10}, {1, 11}, {2, 12}, {3, 13}, {4, 14}, {5, 15}}));
  const auto rb = daily_returns(series_on_days(
      "bbb", window.start, {{0, 10}, {1, 11}, {2, 12}, {4, 14}, {5, 15}}));  // day 3 absent
  const auto m = align({ra, rb}, window);
  CHECK(m.rows() == 5);
  size_t missing = 0;
  for (size_t r = 0; r < m.rows(); ++r)
    for (size_t c = 0; c < m.cols(); ++c) missing += !m.cell(r, c).has_value();
  CHECK(missing == 1);
  CHECK(!m.cell(2, 1).has_value());  // 2018-01-04 for bbb (bridged to day 5 instead)
  CHECK(m.non_missing_count(1) == 4);
}

TEST_CASE("align rejects assets with fewer than 3 returns") {
  const DatasetWindow window{d("2018-01-01"), d("2018-01-10")};
  const auto rich = daily_returns(series_on_days(
      "ric", window.start, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}}));
  const auto poor = daily_returns(series_on_days("por", window.start, {{0, 1}, {1, 2}, {2, 3}}));
  try {
    align({rich, poor}, window);
    FAIL("expected TooFewRows");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::too_few_rows);
    CHECK(std::string(e.what()).find("por") != std::string::npos);
  }
  CHECK(throws_code(Errc::invalid_argument, [&] { align({rich}, window); }));
}

TEST_CASE("align is permutation-invariant up to column order") {
  const DatasetWindow window{d("2018-01-01"), d("2018-01-08")};
  SplitMix64 rng(23);
  std::vector<ReturnSeries> rs;
  for (int a = 0; a < 3; ++a) {
    PriceSeries s{{"a" + std::to_string(a), ""}, {}};
    for (int i = 0; i < 8; ++i) s.points.push_back({window.start + i, 1.0 + rng.next_unit()});
    rs.push_back(daily_returns(s));
  }
  const auto m1 = align({rs[0], rs[1], rs[2]}, window);
  const auto m2 = align({rs[2], rs[0], rs[1]}, window);
  REQUIRE(m1.rows() == m2.rows());
  for (size_t c1 = 0; c1 < 3; ++c1) {
    size_t c2 = 0;
    while (m2.assets()[c2].symbol != m1.assets()[c1].symbol) ++c2;
    for (size_t r = 0; r < m1.rows(); ++r) CHECK(m1.cell(r, c1) == m2.cell(r, c2));
  }
}

TEST_CASE("returns matrix csv round-trip, missing cells as empty fields") {
  const DatasetWindow window{d("2018-01-01"), d("2018-01-06")};
  const auto ra = daily_returns(series_on_days(
      "aaa", window.start, {{0, 10}, {1, 11}, {2, 12}, {3, 13}, {4, 14}, {5, 15}}));
  const auto rb = daily_returns(
      series_on_days("bbb", window.start, {{0, 10}, {1, 11}, {2, 12}, {4, 14}, {5, 15}}));
  const auto m = align({ra, rb}, window);

  const std::string csv = m.to_csv();
  CHECK(csv.rfind("date,aaa,bbb\n", 0) == 0);
  CHECK(csv.find(",\n") != std::string::npos);  // missing trailing field on one row

  const auto back = ReturnsMatrix::from_csv(csv);
  REQUIRE(back.rows() == m.rows());
  REQUIRE(back.cols() == m.cols());
  CHECK(back.dates() == m.dates());
  for (size_t r = 0; r < m.rows(); ++r)
    for (size_t c = 0; c < m.cols(); ++c) CHECK(back.cell(r, c) == m.cell(r, c));

  CHECK(throws_code(Errc::malformed_csv, [] { ReturnsMatrix::from_csv("when,aaa\n"); }));
  CHECK(throws_code(Errc::malformed_csv,
                    [] { ReturnsMatrix::from_csv("date,aaa\n2018-01-01\n"); }));
}
