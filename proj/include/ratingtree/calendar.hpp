#pragma once

#include <charconv>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string_view>

namespace ratingtree {

// Day index = floor(unix_seconds / 86400), i.e. days since 1970-01-01 UTC.
inline constexpr std::int64_t kSecondsPerDay = 86400;

constexpr std::int32_t day_from_unix_seconds(std::int64_t unix_seconds) {
  return static_cast<std::int32_t>(unix_seconds / kSecondsPerDay);
}

constexpr std::int32_t day_from_civil(int year, unsigned month, unsigned day) {
  using namespace std::chrono;
  return static_cast<std::int32_t>(
      sys_days{std::chrono::year{year} / std::chrono::month{month} /
               std::chrono::day{day}}
          .time_since_epoch()
          .count());
}

// Accepts "YYYY-MM-DD" or a bare non-negative day index.
inline std::optional<std::int32_t> parse_day(std::string_view text) {
  auto parse_int = [](std::string_view s, int& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
  };
  const auto dash1 = text.find('-');
  if (dash1 == std::string_view::npos) {
    int day = 0;
    if (!parse_int(text, day) || day < 0) return std::nullopt;
    return day;
  }
  const auto dash2 = text.find('-', dash1 + 1);
  if (dash2 == std::string_view::npos) return std::nullopt;
  int y = 0, m = 0, d = 0;
  if (!parse_int(text.substr(0, dash1), y) ||
      !parse_int(text.substr(dash1 + 1, dash2 - dash1 - 1), m) ||
      !parse_int(text.substr(dash2 + 1), d))
    return std::nullopt;
  const auto ymd = std::chrono::year{y} / m / d;
  if (!ymd.ok()) return std::nullopt;
  return day_from_civil(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
}

}  // namespace ratingtree
