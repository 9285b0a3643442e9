#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace ratingtree {

enum class EntityKind { user, product, category, global };

inline std::string_view entity_kind_name(EntityKind k) {
  switch (k) {
    case EntityKind::user: return "user";
    case EntityKind::product: return "product";
    case EntityKind::category: return "category";
    case EntityKind::global: return "global";
  }
  return "?";
}

inline std::optional<EntityKind> parse_entity_kind(std::string_view s) {
  if (s == "user") return EntityKind::user;
  if (s == "product") return EntityKind::product;
  if (s == "category") return EntityKind::category;
  if (s == "global") return EntityKind::global;
  return std::nullopt;
}

// Ratings live on [1.0, 5.0] and are stored as thousandths so that sums stay
// exact integers no matter the accumulation order.
inline constexpr std::int32_t kRatingScale = 1000;
inline constexpr std::int32_t kMinRatingMilli = 1 * kRatingScale;
inline constexpr std::int32_t kMaxRatingMilli = 5 * kRatingScale;

inline constexpr bool rating_milli_in_range(std::int32_t milli) {
  return milli >= kMinRatingMilli && milli <= kMaxRatingMilli;
}

// "4", "4.5", "3.25", "4.125" -> 4000, 4500, 3250, 4125. At most three
// fractional digits; anything finer is not representable and is rejected.
inline std::optional<std::int32_t> rating_milli_from_text(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::int64_t whole = 0;
  std::size_t i = 0;
  bool any_digit = false;
  for (; i < s.size() && s[i] != '.'; ++i) {
    if (s[i] < '0' || s[i] > '9') return std::nullopt;
    whole = whole * 10 + (s[i] - '0');
    any_digit = true;
    if (whole > 1000) return std::nullopt;  // far outside any rating scale
  }
  std::int64_t frac = 0;
  int frac_digits = 0;
  if (i < s.size()) {  // s[i] == '.'
    ++i;
    if (i == s.size()) return std::nullopt;
    for (; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9') return std::nullopt;
      if (++frac_digits > 3) return std::nullopt;
      frac = frac * 10 + (s[i] - '0');
    }
  }
  if (!any_digit) return std::nullopt;
  for (; frac_digits < 3; ++frac_digits) frac *= 10;
  return static_cast<std::int32_t>(whole * kRatingScale + frac);
}

// Quantizes a double (e.g. a JSON number) to thousandths, rejecting values
// that are not within rounding noise of a representable rating.
inline std::optional<std::int32_t> rating_milli_from_double(double v) {
  if (!(v >= 0.0) || v > 1000.0) return std::nullopt;
  const double scaled = v * kRatingScale;
  const double rounded = std::nearbyint(scaled);
  if (std::fabs(scaled - rounded) > 1e-6 * kRatingScale) return std::nullopt;
  return static_cast<std::int32_t>(rounded);
}

// 4500 -> "4.5", 5000 -> "5", 3125 -> "3.125".
inline std::string rating_text(std::int64_t milli) {
  std::string sign;
  if (milli < 0) {
    sign = "-";
    milli = -milli;
  }
  std::string out = sign + std::to_string(milli / kRatingScale);
  std::int64_t frac = milli % kRatingScale;
  if (frac == 0) return out;
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%03d", static_cast<int>(frac));
  std::string f(buf);
  while (!f.empty() && f.back() == '0') f.pop_back();
  return out + "." + f;
}

// One review. Entity ids are dense integers from the stream's interners.
struct RatingEvent {
  std::int32_t user = 0;
  std::int32_t product = 0;
  std::int32_t category = 0;
  std::int32_t rating_milli = 0;
  std::int32_t day = 0;

  double rating() const { return rating_milli / static_cast<double>(kRatingScale); }

  friend bool operator==(const RatingEvent&, const RatingEvent&) = default;
};

// Reversible string <-> dense integer mapping. Ids are assigned in first-seen
// order, so identical input order yields identical ids.
class Interner {
 public:
  std::int32_t intern(std::string_view name) {
    if (auto it = ids_.find(name); it != ids_.end()) return it->second;
    const auto id = static_cast<std::int32_t>(names_.size());
    names_.emplace_back(name);
    ids_.emplace(names_.back(), id);
    return id;
  }

  std::optional<std::int32_t> find(std::string_view name) const {
    if (auto it = ids_.find(name); it != ids_.end()) return it->second;
    return std::nullopt;
  }

  const std::string& name(std::int32_t id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= names_.size())
      throw std::out_of_range("Interner::name: unknown id " + std::to_string(id));
    return names_[static_cast<std::size_t>(id)];
  }

  std::int32_t size() const { return static_cast<std::int32_t>(names_.size()); }

  const std::vector<std::string>& names() const { return names_; }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };
  std::unordered_map<std::string, std::int32_t, Hash, std::equal_to<>> ids_;
  std::vector<std::string> names_;
};

// Canonical event stream: sorted by day, ties keep input order. Immutable
// once built; safe to share across threads.
struct EventStream {
  std::vector<RatingEvent> events;
  Interner users;
  Interner products;
  Interner categories;

  bool empty() const { return events.empty(); }

  std::optional<std::pair<std::int32_t, std::int32_t>> day_range() const {
    if (events.empty()) return std::nullopt;
    return std::make_pair(events.front().day, events.back().day);
  }

  void sort_by_day() {
    std::stable_sort(events.begin(), events.end(),
                     [](const RatingEvent& a, const RatingEvent& b) { return a.day < b.day; });
  }
};

}  // namespace ratingtree
