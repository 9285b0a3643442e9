#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ratingtree/csv.hpp"

namespace ratingtree {

/// A look-back span of L days ending the day before the query day t, i.e. the
/// inclusive day range [t-L, t-1]. The query day itself is never included.
/// The lifespan window covers all of history: [0, t-1].
class LookbackWindow {
 public:
  constexpr LookbackWindow() = default;

  static constexpr LookbackWindow of_days(std::int32_t days) { return LookbackWindow(days); }
  static constexpr LookbackWindow lifespan() { return LookbackWindow(kLifespan); }

  constexpr bool is_lifespan() const { return days_ == kLifespan; }
  constexpr std::int32_t days() const { return days_; }

  constexpr std::int32_t first_day(std::int32_t t) const {
    if (is_lifespan()) return 0;
    return t - days_ < 0 ? 0 : t - days_;
  }
  constexpr std::int32_t last_day(std::int32_t t) const { return t - 1; }

  friend constexpr bool operator==(LookbackWindow a, LookbackWindow b) = default;

 private:
  static constexpr std::int32_t kLifespan = -1;
  explicit constexpr LookbackWindow(std::int32_t days) : days_(days) {}
  std::int32_t days_ = kLifespan;
};

// The canonical seven spans: 7d, 30d, 90d, 1y, 3y, 5y, lifespan. Years are
// fixed 365-day blocks; no leap handling.
inline constexpr std::array<LookbackWindow, 7> kDefaultWindows = {
    LookbackWindow::of_days(7),    LookbackWindow::of_days(30),
    LookbackWindow::of_days(90),   LookbackWindow::of_days(365),
    LookbackWindow::of_days(1095), LookbackWindow::of_days(1825),
    LookbackWindow::lifespan()};

inline std::string window_label(LookbackWindow w) {
  if (w.is_lifespan()) return "life";
  switch (w.days()) {
    case 365: return "1y";
    case 1095: return "3y";
    case 1825: return "5y";
    default: return std::to_string(w.days()) + "d";
  }
}

// Accepts "7d", "90", "1y", "life"/"lifespan".
inline std::optional<LookbackWindow> parse_window(std::string_view s) {
  if (s == "life" || s == "lifespan") return LookbackWindow::lifespan();
  std::int64_t mult = 1;
  if (!s.empty() && (s.back() == 'd' || s.back() == 'y')) {
    if (s.back() == 'y') mult = 365;
    s.remove_suffix(1);
  }
  const auto n = parse_int64(s);
  if (!n || *n <= 0 || *n * mult > 1000000) return std::nullopt;
  return LookbackWindow::of_days(static_cast<std::int32_t>(*n * mult));
}

// Non-empty, finite spans strictly ascending, lifespan (if present) last.
inline bool valid_window_list(std::span<const LookbackWindow> windows) {
  if (windows.empty()) return false;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    if (windows[i].is_lifespan()) return i + 1 == windows.size();
    if (i > 0 && !windows[i - 1].is_lifespan() &&
        windows[i].days() <= windows[i - 1].days())
      return false;
  }
  return true;
}

inline std::vector<LookbackWindow> default_window_list() {
  return {kDefaultWindows.begin(), kDefaultWindows.end()};
}

}  // namespace ratingtree
