#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <ostream>
#include <vector>

#include "ratingtree/types.hpp"
#include "ratingtree/windows.hpp"

namespace ratingtree {

// One (entity, day) row: how many ratings landed that day and their exact sum.
// Days without activity have no row; storage is sparse.
struct DailyAggregate {
  EntityKind kind = EntityKind::user;
  std::int32_t entity = 0;  // ignored for kind == global
  std::int32_t day = 0;
  std::int64_t count = 0;
  std::int64_t sum_milli = 0;

  friend bool operator==(const DailyAggregate&, const DailyAggregate&) = default;
};

// Exact statistics over an inclusive day range. count == 0 implies sum == 0.
struct WindowStats {
  std::int64_t count = 0;
  std::int64_t sum_milli = 0;
  std::int32_t first_day = 0;
  std::int32_t last_day = -1;

  double average() const {
    return static_cast<double>(sum_milli) / (static_cast<double>(kRatingScale) * static_cast<double>(count));
  }

  friend bool operator==(const WindowStats&, const WindowStats&) = default;
};

namespace detail {

// Partitions day-sorted events into per-entity runs without sorting: one
// counting pass, one scatter pass. Day order is preserved inside each run.
template <typename EntityOf>
inline void append_kind_aggregates(const EventStream& stream, EntityKind kind,
                                   std::int32_t n_entities, EntityOf entity_of,
                                   std::vector<DailyAggregate>& out) {
  if (n_entities <= 0) return;
  std::vector<std::int64_t> counts(static_cast<std::size_t>(n_entities), 0);
  for (const auto& ev : stream.events) ++counts[static_cast<std::size_t>(entity_of(ev))];
  std::vector<std::int64_t> offsets(static_cast<std::size_t>(n_entities) + 1, 0);
  for (std::int32_t e = 0; e < n_entities; ++e)
    offsets[static_cast<std::size_t>(e) + 1] = offsets[static_cast<std::size_t>(e)] + counts[static_cast<std::size_t>(e)];

  struct DayRating {
    std::int32_t day;
    std::int32_t milli;
  };
  std::vector<DayRating> scattered(stream.events.size());
  {
    std::vector<std::int64_t> cursor(offsets.begin(), offsets.end() - 1);
    for (const auto& ev : stream.events) {
      const auto e = static_cast<std::size_t>(entity_of(ev));
      scattered[static_cast<std::size_t>(cursor[e]++)] = {ev.day, ev.rating_milli};
    }
  }
  for (std::int32_t e = 0; e < n_entities; ++e) {
    std::int64_t i = offsets[static_cast<std::size_t>(e)];
    const std::int64_t end = offsets[static_cast<std::size_t>(e) + 1];
    while (i < end) {
      DailyAggregate row{kind, e, scattered[static_cast<std::size_t>(i)].day, 0, 0};
      while (i < end && scattered[static_cast<std::size_t>(i)].day == row.day) {
        ++row.count;
        row.sum_milli += scattered[static_cast<std::size_t>(i)].milli;
        ++i;
      }
      out.push_back(row);
    }
  }
}

}  // namespace detail

// Collapses the stream to per-entity per-day (count, sum) rows for all four
// entity kinds. Output is ordered (kind, entity, day); requires the stream's
// day-sorted invariant.
inline std::vector<DailyAggregate> build_daily_aggregates(const EventStream& stream) {
  std::vector<DailyAggregate> rows;
  detail::append_kind_aggregates(stream, EntityKind::user, stream.users.size(),
                                 [](const RatingEvent& e) { return e.user; }, rows);
  detail::append_kind_aggregates(stream, EntityKind::product, stream.products.size(),
                                 [](const RatingEvent& e) { return e.product; }, rows);
  detail::append_kind_aggregates(stream, EntityKind::category, stream.categories.size(),
                                 [](const RatingEvent& e) { return e.category; }, rows);
  detail::append_kind_aggregates(stream, EntityKind::global, stream.empty() ? 0 : 1,
                                 [](const RatingEvent&) { return 0; }, rows);
  return rows;
}

/// Per-entity day lists with inclusive cumulative (count, sum) arrays.
/// A window query is two binary searches plus two subtractions: O(log d)
/// in the entity's number of active days.
class PrefixIndex {
 public:
  struct Series {
    std::vector<std::int32_t> days;          // strictly increasing
    std::vector<std::int64_t> cum_count;     // cum_count[i] = count over days[0..i]
    std::vector<std::int64_t> cum_sum;       // same, for milli sums
  };

  static PrefixIndex build(const std::vector<DailyAggregate>& aggregates) {
    PrefixIndex index;
    for (const auto& row : aggregates) {
      Series& s = index.series_slot(row.kind, row.entity);
      s.days.push_back(row.day);
      const std::int64_t prev_count = s.cum_count.empty() ? 0 : s.cum_count.back();
      const std::int64_t prev_sum = s.cum_sum.empty() ? 0 : s.cum_sum.back();
      s.cum_count.push_back(prev_count + row.count);
      s.cum_sum.push_back(prev_sum + row.sum_milli);
    }
    return index;
  }

  // Statistics over [t-L, t-1] (lifespan: [0, t-1]). Day t is excluded for
  // every entity kind. Unknown entities yield count == 0.
  WindowStats window(EntityKind kind, std::int32_t entity, std::int32_t t,
                     LookbackWindow w) const {
    WindowStats stats;
    stats.first_day = w.first_day(t);
    stats.last_day = w.last_day(t);
    const Series* s = find_series(kind, entity);
    if (!s || stats.last_day < stats.first_day) return stats;
    const auto begin = s->days.begin();
    const auto lo = std::lower_bound(begin, s->days.end(), stats.first_day) - begin;
    const auto hi = std::upper_bound(begin, s->days.end(), stats.last_day) - begin;
    if (hi <= lo) return stats;
    stats.count = s->cum_count[static_cast<std::size_t>(hi - 1)] -
                  (lo > 0 ? s->cum_count[static_cast<std::size_t>(lo - 1)] : 0);
    stats.sum_milli = s->cum_sum[static_cast<std::size_t>(hi - 1)] -
                      (lo > 0 ? s->cum_sum[static_cast<std::size_t>(lo - 1)] : 0);
    return stats;
  }

  const Series* find_series(EntityKind kind, std::int32_t entity) const {
    if (kind == EntityKind::global) return global_.days.empty() ? nullptr : &global_;
    const auto& table = per_kind_[kind_slot(kind)];
    if (entity < 0 || static_cast<std::size_t>(entity) >= table.size()) return nullptr;
    const Series& s = table[static_cast<std::size_t>(entity)];
    return s.days.empty() ? nullptr : &s;
  }

 private:
  static std::size_t kind_slot(EntityKind kind) {
    switch (kind) {
      case EntityKind::user: return 0;
      case EntityKind::product: return 1;
      case EntityKind::category: return 2;
      case EntityKind::global: break;
    }
    return 3;
  }

  Series& series_slot(EntityKind kind, std::int32_t entity) {
    if (kind == EntityKind::global) return global_;
    auto& table = per_kind_[kind_slot(kind)];
    if (static_cast<std::size_t>(entity) >= table.size())
      table.resize(static_cast<std::size_t>(entity) + 1);
    return table[static_cast<std::size_t>(entity)];
  }

  std::array<std::vector<Series>, 3> per_kind_;
  Series global_;
};

inline PrefixIndex build_prefix_index(const std::vector<DailyAggregate>& aggregates) {
  return PrefixIndex::build(aggregates);
}

inline WindowStats window_stats(const PrefixIndex& index, EntityKind kind,
                                std::int32_t entity, std::int32_t t, LookbackWindow w) {
  return index.window(kind, entity, t, w);
}

// Same contract as PrefixIndex::window, computed by a full scan of the raw
// events. Reference implementation and the "no daily aggregation" baseline.
inline WindowStats naive_window_stats(const EventStream& stream, EntityKind kind,
                                      std::int32_t entity, std::int32_t t,
                                      LookbackWindow w) {
  WindowStats stats;
  stats.first_day = w.is_lifespan() ? 0 : (t - w.days() < 0 ? 0 : t - w.days());
  stats.last_day = t - 1;
  for (const auto& ev : stream.events) {
    if (ev.day < stats.first_day || ev.day > stats.last_day) continue;
    bool match = false;
    switch (kind) {
      case EntityKind::user: match = ev.user == entity; break;
      case EntityKind::product: match = ev.product == entity; break;
      case EntityKind::category: match = ev.category == entity; break;
      case EntityKind::global: match = true; break;
    }
    if (match) {
      ++stats.count;
      stats.sum_milli += ev.rating_milli;
    }
  }
  return stats;
}

// kind,entity,day,count,sum rows in index order. Global rows use "-".
inline void write_aggregate_csv(const std::vector<DailyAggregate>& aggregates,
                                const EventStream& stream, std::ostream& out) {
  out << "kind,entity,day,count,sum\n";
  for (const auto& row : aggregates) {
    out << entity_kind_name(row.kind) << ',';
    switch (row.kind) {
      case EntityKind::user: out << stream.users.name(row.entity); break;
      case EntityKind::product: out << stream.products.name(row.entity); break;
      case EntityKind::category: out << stream.categories.name(row.entity); break;
      case EntityKind::global: out << '-'; break;
    }
    out << ',' << row.day << ',' << row.count << ',' << rating_text(row.sum_milli) << '\n';
  }
}

}  // namespace ratingtree
