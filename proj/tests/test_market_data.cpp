#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <functional>
#include <set>
#include <thread>

#include <httplib.h>

#include "corrnet/errors.hpp"
#include "corrnet/market_data.hpp"
#include "corrnet/rng.hpp"

using namespace corrnet;
namespace fs = std::filesystem;

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

PriceSeries make_series(const std::string& symbol, Date start, int days, double base) {
  PriceSeries s{{symbol, symbol}, {}};
  for (int i = 0; i < days; ++i) s.points.push_back({start + i, base + i});
  return s;
}

}  // namespace

TEST_CASE("date parsing and arithmetic") {
  CHECK(d("1970-01-01").days == 0);
  CHECK(d("2018-01-01").days == 17532);
  CHECK(d("2018-01-01").to_string() == "2018-01-01");
  CHECK(d("2016-02-29").to_string() == "2016-02-29");  // leap day
  CHECK(!Date::parse("2017-02-29"));
  CHECK(!Date::parse("2018-13-01"));
  CHECK(!Date::parse("2018-1-01"));
  CHECK(!Date::parse("2018/01/01"));
  CHECK(d("2018-03-06") - d("2017-11-09") == 117);
  CHECK(Date::from_epoch_millis(1514764800000) == d("2018-01-01"));
  CHECK(Date::from_epoch_millis(1514764800000 + 86'399'999) == d("2018-01-01"));
  CHECK(Date::from_epoch_millis(1514764800000 - 1) == d("2017-12-31"));
}

TEST_CASE("generic csv: minimal valid input") {
  const auto s = parse_price_csv({"btc", "Bitcoin"}, "date,price\n2018-01-01,100\n2018-01-02,110",
                                 CsvFormat::generic_two_column);
  REQUIRE(s.points.size() == 2);
  CHECK(s.points[0].date == d("2018-01-01"));
  CHECK(s.points[0].price_usd == 100.0);
  CHECK(s.points[1].price_usd == 110.0);
  CHECK(s.asset.symbol == "btc");
}

TEST_CASE("duplicate dates keep the last row") {
  const auto s = parse_price_csv({"btc", "Bitcoin"},
                                 "date,price\n2018-01-01,100\n2018-01-01,105",
                                 CsvFormat::generic_two_column);
  REQUIRE(s.points.size() == 1);
  CHECK(s.points[0].price_usd == 105.0);
}

TEST_CASE("non-positive price is rejected") {
  CHECK(throws_code(Errc::non_positive_price, [] {
    parse_price_csv({"btc", ""}, "date,price\n2018-01-01,0", CsvFormat::generic_two_column);
  }));
  CHECK(throws_code(Errc::non_positive_price, [] {
    parse_price_csv({"btc", ""}, "date,price\n2018-01-01,-3.5", CsvFormat::generic_two_column);
  }));
}

TEST_CASE("malformed csv: header, arity, bad fields, empty") {
  auto generic = [](const char* text) {
    parse_price_csv({"x", ""}, text, CsvFormat::generic_two_column);
  };
  CHECK(throws_code(Errc::malformed_csv, [&] { generic("time,price\n2018-01-01,1"); }));
  CHECK(throws_code(Errc::malformed_csv, [&] { generic("date,price\n2018-01-01,1,9"); }));
  CHECK(throws_code(Errc::malformed_csv, [&] { generic("date,price\nnot-a-date,1"); }));
  CHECK(throws_code(Errc::malformed_csv, [&] { generic("date,price\n2018-01-01,abc"); }));
  CHECK(throws_code(Errc::malformed_csv, [&] { generic("date,price\n2018-01-01,nan"); }));
  CHECK(throws_code(Errc::empty_series, [&] { generic("date,price\n"); }));
}

TEST_CASE("coingecko export: exact header, day truncation, unsorted input") {
  const char* text =
      "snapped_at,price,market_cap,total_volume\n"
      "2013-04-29 00:00:00 UTC,144.54,1603768865,0\n"
      "2013-04-28 00:00:00 UTC,135.3,1500517590,0\n"
      "2013-04-30 23:59:59 UTC,139.0,,\n";
  const auto s = parse_price_csv({"btc", "Bitcoin"}, text, CsvFormat::coingecko_export);
  REQUIRE(s.points.size() == 3);
  CHECK(s.points[0].date == d("2013-04-28"));  // sorted
  CHECK(s.points[1].price_usd == 144.54);
  CHECK(s.points[2].date == d("2013-04-30"));
  CHECK(throws_code(Errc::malformed_csv, [&] {
    parse_price_csv({"btc", ""}, "date,price\n2018-01-01,1", CsvFormat::coingecko_export);
  }));
}

TEST_CASE("generic csv round-trips every (date, price) pair") {
  SplitMix64 rng(404);
  for (int trial = 0; trial < 30; ++trial) {
    PriceSeries s{{"rt", "roundtrip"}, {}};
    Date day = d("2017-06-01");
    const int n = 1 + static_cast<int>(rng.next_below(80));
    for (int i = 0; i < n; ++i) {
      day = day + 1 + static_cast<int32_t>(rng.next_below(3));  // calendar gaps allowed
      s.points.push_back({day, rng.next_unit() * 1000.0 + 1e-6});
    }
    const auto back = parse_price_csv(s.asset, to_generic_csv(s), CsvFormat::generic_two_column);
    REQUIRE(back.points.size() == s.points.size());
    for (size_t i = 0; i < s.points.size(); ++i) {
      CHECK(back.points[i].date == s.points[i].date);
      CHECK(back.points[i].price_usd == s.points[i].price_usd);  // bit-exact
    }
  }
}

TEST_CASE("build_dataset windows series and keeps every asset or errors") {
  const DatasetWindow window{d("2018-01-05"), d("2018-01-20")};
  auto a = make_series("aaa", d("2018-01-01"), 30, 100);
  auto b = make_series("bbb", d("2018-01-05"), 30, 50);

  const auto ds = build_dataset({a, b}, window);
  REQUIRE(ds.series.size() == 2);
  for (const auto& s : ds.series) {
    CHECK(s.points.front().date >= window.start);
    CHECK(s.points.back().date <= window.end);
  }
  CHECK(ds.series[0].points.size() == 16);

  // an asset starting mid-window is named, not dropped
  auto late = make_series("lat", d("2018-01-10"), 30, 10);
  try {
    build_dataset({a, late}, window);
    FAIL("expected InsufficientCoverage");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::insufficient_coverage);
    CHECK(std::string(e.what()).find("lat") != std::string::npos);
    CHECK(std::string(e.what()).find("2018-01-10") != std::string::npos);
  }

  // a series ending before the window has no observations inside it
  auto ended = make_series("end", d("2017-11-01"), 10, 10);
  CHECK(throws_code(Errc::insufficient_coverage,
                    [&] { build_dataset({a, ended}, window); }));

  CHECK(throws_code(Errc::invalid_argument, [&] { build_dataset({a}, window); }));
  CHECK(throws_code(Errc::invalid_argument, [&] { build_dataset({a, a}, window); }));
}

TEST_CASE("fourteen full series across a late-2017 window") {
  const DatasetWindow window{d("2017-11-09"), d("2018-03-06")};
  std::vector<PriceSeries> series;
  for (int i = 0; i < 14; ++i)
    series.push_back(make_series("a" + std::to_string(i), d("2017-10-01"), 200, 10.0 + i));
  const auto ds = build_dataset(std::move(series), window);
  CHECK(ds.series.size() == 14);
  CHECK(ds.series.front().points.size() == 118);  // 117-day span, inclusive
}

TEST_CASE("report_missing lists exactly the absent calendar days") {
  const DatasetWindow window{d("2018-01-01"), d("2018-01-10")};
  auto full = make_series("ful", d("2018-01-01"), 10, 5);
  auto gappy = make_series("gap", d("2018-01-01"), 10, 5);
  gappy.points.erase(gappy.points.begin() + 4);  // drop 2018-01-05
  auto wide = make_series("wid", d("2018-01-01"), 10, 5);
  wide.points.erase(wide.points.begin() + 5, wide.points.begin() + 8);  // 06..08

  const auto ds = build_dataset({full, gappy, wide}, window);
  const auto reports = report_missing(ds);
  REQUIRE(reports.size() == 3);
  CHECK(reports[0].missing_dates.empty());
  REQUIRE(reports[1].missing_dates.size() == 1);
  CHECK(reports[1].missing_dates[0] == d("2018-01-05"));
  REQUIRE(reports[2].missing_dates.size() == 3);
  CHECK(reports[2].missing_dates[0] == d("2018-01-06"));
  CHECK(reports[2].missing_dates[2] == d("2018-01-08"));

  // observed + missing partition the window for every asset
  for (size_t i = 0; i < ds.series.size(); ++i) {
    std::set<Date> all;
    for (const auto& p : ds.series[i].points) all.insert(p.date);
    for (const auto& m : reports[i].missing_dates) CHECK(all.insert(m).second);
    CHECK(all.size() == static_cast<size_t>(window.end - window.start + 1));
  }
}

TEST_CASE("fetch_price_history against a local endpoint") {
  httplib::Server server;
  server.Get("/prices/btc", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("[[1514764800000, 100.0], [1514851200000, 110.0], [999999999, 1.0]]",
                    "application/json");
  });
  server.Get("/prices/one", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("[[1514764800000, 100.0]]", "application/json");
  });
  server.Get("/prices/mty", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("[]", "application/json");
  });
  server.Get("/prices/lim", [](const httplib::Request&, httplib::Response& res) {
    res.status = 429;
    res.set_content("slow down", "text/plain");
  });
  server.Get("/prices/bad", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"prices\": 7}", "application/json");
  });

  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread runner([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  const std::string endpoint = "http://127.0.0.1:" + std::to_string(port) + "/prices/{symbol}";
  const DatasetWindow window{d("2018-01-01"), d("2018-03-06")};
  bool stopped = false;
  auto stop_server = [&] {
    if (!stopped) {
      server.stop();
      runner.join();
      stopped = true;
    }
  };

  SUBCASE("epoch millis map to UTC days and the window applies") {
    const auto s = fetch_price_history({"one", ""}, window, endpoint);
    REQUIRE(s.points.size() == 1);
    CHECK(s.points[0].date == d("2018-01-01"));
    CHECK(s.points[0].price_usd == 100.0);

    const auto b = fetch_price_history({"btc", ""}, window, endpoint);
    CHECK(b.points.size() == 2);  // the 2001 stamp falls outside the window
  }

  SUBCASE("empty array is EmptySeries") {
    CHECK(throws_code(Errc::empty_series,
                      [&] { fetch_price_history({"mty", ""}, window, endpoint); }));
  }

  SUBCASE("http status is carried in HttpFailure") {
    try {
      fetch_price_history({"lim", ""}, window, endpoint);
      FAIL("expected HttpFailure");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::http_failure);
      CHECK(std::string(e.what()).find("429") != std::string::npos);
    }
  }

  SUBCASE("non-array body is MalformedResponse") {
    CHECK(throws_code(Errc::malformed_response,
                      [&] { fetch_price_history({"bad", ""}, window, endpoint); }));
  }

  SUBCASE("cache makes repeat fetches offline-reproducible") {
    const fs::path cache = fs::temp_directory_path() / "corrnet_fetch_cache_test";
    fs::remove_all(cache);
    FetchOptions options;
    options.cache_dir = cache.string();

    const auto first = fetch_price_history({"btc", ""}, window, endpoint, options);
    CHECK(fs::exists(cache / ("btc_" + window.start.to_string() + "_" +
                              window.end.to_string() + ".json")));
    stop_server();

    const auto second = fetch_price_history({"btc", ""}, window, endpoint, options);
    REQUIRE(second.points.size() == first.points.size());
    for (size_t i = 0; i < first.points.size(); ++i) {
      CHECK(second.points[i].date == first.points[i].date);
      CHECK(second.points[i].price_usd == first.points[i].price_usd);
    }
    // offline without the cache: unreachable
    CHECK(throws_code(Errc::http_failure,
                      [&] { fetch_price_history({"btc", ""}, window, endpoint); }));
    fs::remove_all(cache);
  }

  stop_server();
}

TEST_CASE("unreachable endpoint is HttpFailure") {
  CHECK(throws_code(Errc::http_failure, [] {
    FetchOptions options;
    options.timeout_seconds = 2;
    fetch_price_history({"btc", ""}, {d("2018-01-01"), d("2018-01-02")},
                        "http://127.0.0.1:1/prices", options);
  }));
}
