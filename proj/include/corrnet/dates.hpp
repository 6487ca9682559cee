#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace corrnet {

/// A UTC calendar day, stored as days since 1970-01-01.
struct Date {
  int32_t days = 0;

  auto operator<=>(const Date&) const = default;

  /// Throws InvalidArgument for an impossible calendar date.
  static Date from_ymd(int year, int month, int day);

  /// Strict "YYYY-MM-DD". Returns nullopt on any deviation.
  static std::optional<Date> parse(std::string_view text);

  /// Unix epoch milliseconds, truncated (floored) to the UTC day.
  static Date from_epoch_millis(int64_t millis);

  int64_t to_epoch_millis() const { return static_cast<int64_t>(days) * 86'400'000; }

  Date next() const { return Date{days + 1}; }
  Date prev() const { return Date{days - 1}; }

  std::string to_string() const;  // "YYYY-MM-DD"
};

inline int32_t operator-(Date a, Date b) { return a.days - b.days; }
inline Date operator+(Date a, int32_t n) { return Date{a.days + n}; }

}  // namespace corrnet
