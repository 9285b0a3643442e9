#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>

#include "ratingtree/trees.hpp"
#include "ratingtree/types.hpp"
#include "ratingtree/windows.hpp"

namespace ratingtree {

// Brute-force restatements of the cascade and AUC definitions. These scan raw
// data with no index and no shared cascade code; equivalence tests pit them
// against the fast paths.

namespace detail {

struct ScanStats {
  std::int64_t count = 0;
  std::int64_t sum_milli = 0;
};

inline ScanStats scan_entity(const EventStream& stream, EntityKind kind, std::int32_t entity,
                             std::int32_t t, LookbackWindow w) {
  const std::int32_t first = w.is_lifespan() ? 0 : (t - w.days() < 0 ? 0 : t - w.days());
  const std::int32_t last = t - 1;
  ScanStats stats;
  for (const auto& ev : stream.events) {
    if (ev.day < first || ev.day > last) continue;
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

inline double scan_average(const ScanStats& s) {
  return static_cast<double>(s.sum_milli) /
         (static_cast<double>(kRatingScale) * static_cast<double>(s.count));
}

}  // namespace detail

inline TreeOutput brute_force_tree_eval(const EventStream& stream, TreeKind tree,
                                        std::int32_t user, std::int32_t product,
                                        std::int32_t category, std::int32_t t,
                                        LookbackWindow w,
                                        double default_rating = kDefaultRating) {
  const auto product_stats = detail::scan_entity(stream, EntityKind::product, product, t, w);
  const auto user_stats = detail::scan_entity(stream, EntityKind::user, user, t, w);
  const auto category_stats = detail::scan_entity(stream, EntityKind::category, category, t, w);
  const auto global_stats = detail::scan_entity(stream, EntityKind::global, 0, t, w);

  auto answer = [&](const detail::ScanStats& s, FallbackLevel level) {
    return TreeOutput{detail::scan_average(s), level, tree};
  };

  switch (tree) {
    case TreeKind::pt1:
      if (product_stats.count > 0) return answer(product_stats, FallbackLevel::product);
      if (category_stats.count > 0) return answer(category_stats, FallbackLevel::category);
      if (global_stats.count > 0) return answer(global_stats, FallbackLevel::global);
      break;
    case TreeKind::pt2:
      if (product_stats.count > 0) return answer(product_stats, FallbackLevel::product);
      if (user_stats.count > 0) return answer(user_stats, FallbackLevel::user);
      if (category_stats.count > 0) return answer(category_stats, FallbackLevel::category);
      if (global_stats.count > 0) return answer(global_stats, FallbackLevel::global);
      break;
    case TreeKind::ut:
      if (user_stats.count > 0) return answer(user_stats, FallbackLevel::user);
      if (product_stats.count > 0) return answer(product_stats, FallbackLevel::product);
      if (category_stats.count > 0) return answer(category_stats, FallbackLevel::category);
      if (global_stats.count > 0) return answer(global_stats, FallbackLevel::global);
      break;
  }
  return TreeOutput{default_rating, FallbackLevel::defaulted, tree};
}

// AUC as the plain pairwise concordance count: (#concordant + 0.5 * #tied)
// over all positive/negative pairs. O(n_pos * n_neg).
inline std::optional<double> brute_force_auc(std::span<const double> scores,
                                             std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("brute_force_auc: length mismatch");
  std::int64_t n_pos = 0, n_neg = 0;
  for (int y : labels) (y == 1 ? n_pos : n_neg)++;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  double numerator = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] == 1) continue;
      if (scores[i] > scores[j])
        numerator += 1.0;
      else if (scores[i] == scores[j])
        numerator += 0.5;
    }
  }
  return numerator / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

}  // namespace ratingtree
