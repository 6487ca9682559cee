#include "corrnet/dates.hpp"

#include <chrono>
#include <cstdio>

#include "corrnet/errors.hpp"

namespace corrnet {

namespace {

namespace chr = std::chrono;

std::optional<Date> ymd_to_date(int year, int month, int day) {
  if (year < 1 || month < 1 || month > 12 || day < 1 || day > 31) return std::nullopt;
  chr::year_month_day ymd{chr::year{year}, chr::month{static_cast<unsigned>(month)},
                          chr::day{static_cast<unsigned>(day)}};
  if (!ymd.ok()) return std::nullopt;
  chr::sys_days sd{ymd};
  return Date{static_cast<int32_t>(sd.time_since_epoch().count())};
}

bool all_digits(std::string_view s) {
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return !s.empty();
}

int to_int(std::string_view s) {
  int v = 0;
  for (char c : s) v = v * 10 + (c - '0');
  return v;
}

}  // namespace

Date Date::from_ymd(int year, int month, int day) {
  auto d = ymd_to_date(year, month, day);
  if (!d) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "invalid calendar date %04d-%02d-%02d", year, month, day);
    raise(Errc::invalid_argument, buf);
  }
  return *d;
}

std::optional<Date> Date::parse(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  std::string_view y = text.substr(0, 4), m = text.substr(5, 2), d = text.substr(8, 2);
  if (!all_digits(y) || !all_digits(m) || !all_digits(d)) return std::nullopt;
  return ymd_to_date(to_int(y), to_int(m), to_int(d));
}

Date Date::from_epoch_millis(int64_t millis) {
  int64_t day = millis / 86'400'000;
  if (millis < 0 && millis % 86'400'000 != 0) --day;  // floor for pre-epoch stamps
  return Date{static_cast<int32_t>(day)};
}

std::string Date::to_string() const {
  chr::sys_days sd{chr::days{days}};
  chr::year_month_day ymd{sd};
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace corrnet
