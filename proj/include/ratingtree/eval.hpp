#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ratingtree/calendar.hpp"
#include "ratingtree/csv.hpp"
#include "ratingtree/trees.hpp"

namespace ratingtree {

// Binary target: 1 iff the rating is above 3 stars.
inline int binarize_label_milli(std::int32_t rating_milli) {
  if (!rating_milli_in_range(rating_milli))
    throw std::invalid_argument("rating out of range [1,5]: " + rating_text(rating_milli));
  return rating_milli > 3 * kRatingScale ? 1 : 0;
}

inline int binarize_label(double rating) {
  const auto milli = rating_milli_from_double(rating);
  if (!milli) throw std::invalid_argument("rating not representable: " + format_double(rating));
  return binarize_label_milli(*milli);
}

// Out-of-time split: everything before valid_start trains, test days strictly
// follow, days past test_end are dropped.
struct SplitConfig {
  std::int32_t valid_start_day = day_from_civil(2016, 1, 1);
  std::int32_t test_start_day = day_from_civil(2017, 1, 1);
  std::int32_t test_end_day = day_from_civil(2018, 10, 31);

  bool valid() const {
    return valid_start_day < test_start_day && test_start_day <= test_end_day;
  }
};

enum class Split { train, valid, test, dropped };

inline std::string_view split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::valid: return "valid";
    case Split::test: return "test";
    case Split::dropped: return "dropped";
  }
  return "?";
}

inline Split classify_day(std::int32_t day, const SplitConfig& config) {
  if (day < config.valid_start_day) return Split::train;
  if (day < config.test_start_day) return Split::valid;
  if (day <= config.test_end_day) return Split::test;
  return Split::dropped;
}

struct SplitCounts {
  std::uint64_t train = 0, valid = 0, test = 0, dropped = 0;
  std::uint64_t total() const { return train + valid + test + dropped; }
};

inline std::vector<Split> split_by_time(const EventStream& stream, const SplitConfig& config,
                                        SplitCounts* counts_out = nullptr) {
  if (!config.valid()) throw std::invalid_argument("invalid split: need valid_start < test_start <= test_end");
  std::vector<Split> tags;
  tags.reserve(stream.events.size());
  SplitCounts counts;
  for (const auto& ev : stream.events) {
    const Split s = classify_day(ev.day, config);
    tags.push_back(s);
    switch (s) {
      case Split::train: ++counts.train; break;
      case Split::valid: ++counts.valid; break;
      case Split::test: ++counts.test; break;
      case Split::dropped: ++counts.dropped; break;
    }
  }
  if (counts_out) *counts_out = counts;
  return tags;
}

// Rank-based (Mann-Whitney) AUC with average ranks for tied scores, so a tie
// between a positive and a negative counts one half. Single-class inputs have
// no defined value and return nullopt.
inline std::optional<double> compute_auc(std::span<const double> scores,
                                         std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("compute_auc: scores/labels length mismatch");
  const std::size_t n = scores.size();
  std::int64_t n_pos = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw std::invalid_argument("compute_auc: labels must be 0/1");
    n_pos += y;
  }
  const std::int64_t n_neg = static_cast<std::int64_t>(n) - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Tied scores share the average of the 1-based ranks they span.
  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]] == 1) pos_rank_sum += avg_rank;
    i = j;
  }
  const double numerator =
      pos_rank_sum - static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
  return numerator / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

// One modeling row: the 21 tree values (PT1 block, PT2 block, UT block) plus
// label, split tag and the segment keys every report slices on.
struct LabeledInstance {
  std::int32_t user = 0;
  std::int32_t product = 0;
  std::int32_t category = 0;
  std::int32_t day = 0;
  int label = 0;
  Split split = Split::train;
  bool user_cold = false;
  bool product_cold = false;
  std::vector<double> tree_values;
};

inline std::vector<LabeledInstance> build_labeled_instances(
    const EventStream& stream, const PrefixIndex& index, const SplitConfig& split,
    std::span<const LookbackWindow> windows = kDefaultWindows,
    double default_rating = kDefaultRating) {
  if (!split.valid()) throw std::invalid_argument("invalid split configuration");
  std::vector<LabeledInstance> instances;
  instances.reserve(stream.events.size());
  for (const auto& ev : stream.events) {
    const FeatureVector fv = assemble_features(index, Setting::s4, ev.user, ev.product,
                                               ev.category, ev.day, windows, default_rating);
    LabeledInstance inst;
    inst.user = ev.user;
    inst.product = ev.product;
    inst.category = ev.category;
    inst.day = ev.day;
    inst.label = binarize_label_milli(ev.rating_milli);
    inst.split = classify_day(ev.day, split);
    inst.user_cold = fv.user_cold_start;
    inst.product_cold = fv.product_cold_start;
    inst.tree_values = std::move(fv.values);
    instances.push_back(std::move(inst));
  }
  return instances;
}

// Slice of an instance's 21 values for one setting (S4 = everything).
inline std::span<const double> setting_features(const LabeledInstance& inst, Setting setting,
                                                std::size_t n_windows) {
  const std::span<const double> all(inst.tree_values);
  switch (setting) {
    case Setting::s1: return all.subspan(0, n_windows);
    case Setting::s2: return all.subspan(n_windows, n_windows);
    case Setting::s3: return all.subspan(2 * n_windows, n_windows);
    case Setting::s4: return all;
  }
  return all;
}

inline std::vector<const LabeledInstance*> filter_split(
    const std::vector<LabeledInstance>& instances, Split split) {
  std::vector<const LabeledInstance*> out;
  for (const auto& inst : instances)
    if (inst.split == split) out.push_back(&inst);
  return out;
}

// One report cell. `value` is the cell's metric (an AUC, or a relative
// difference for ranking cells); cells whose AUC is undefined keep nullopt and
// are never imputed.
struct EvalCell {
  std::string report;
  std::string setting;
  std::string segment;
  std::optional<double> value;
  std::int64_t n_pos = 0;
  std::int64_t n_neg = 0;
};

struct EvalReport {
  std::vector<EvalCell> cells;

  const EvalCell* find(std::string_view report, std::string_view setting,
                       std::string_view segment) const {
    for (const auto& c : cells)
      if (c.report == report && c.setting == setting && c.segment == segment) return &c;
    return nullptr;
  }

  void merge(EvalReport&& other) {
    for (auto& c : other.cells) cells.push_back(std::move(c));
  }

  void write_csv(std::ostream& out) const {
    out << "report,setting,segment,auc,n_pos,n_neg\n";
    for (const auto& c : cells) {
      out << c.report << ',' << c.setting << ',' << c.segment << ',';
      if (c.value) out << format_double(*c.value);
      out << ',' << c.n_pos << ',' << c.n_neg << '\n';
    }
  }
};

namespace detail {

inline EvalCell make_auc_cell(std::string report, std::string setting, std::string segment,
                              std::span<const double> scores, std::span<const int> labels) {
  EvalCell cell;
  cell.report = std::move(report);
  cell.setting = std::move(setting);
  cell.segment = std::move(segment);
  for (int y : labels) (y == 1 ? cell.n_pos : cell.n_neg)++;
  cell.value = compute_auc(scores, labels);
  return cell;
}

}  // namespace detail

// Each raw tree value, alone, as the prediction score: 3 trees x |windows|
// AUC cells. Isolates how much each tree/window knows on its own.
inline EvalReport dissection_report(std::span<const LabeledInstance* const> test_instances,
                                    std::span<const LookbackWindow> windows = kDefaultWindows) {
  EvalReport report;
  const TreeKind trees[] = {TreeKind::pt1, TreeKind::pt2, TreeKind::ut};
  std::vector<int> labels;
  labels.reserve(test_instances.size());
  for (const auto* inst : test_instances) labels.push_back(inst->label);
  std::vector<double> scores(test_instances.size());
  for (std::size_t ti = 0; ti < 3; ++ti) {
    for (std::size_t wi = 0; wi < windows.size(); ++wi) {
      const std::size_t col = ti * windows.size() + wi;
      for (std::size_t i = 0; i < test_instances.size(); ++i)
        scores[i] = test_instances[i]->tree_values[col];
      report.cells.push_back(detail::make_auc_cell(
          "dissection", std::string(tree_kind_name(trees[ti])), window_label(windows[wi]),
          scores, labels));
    }
  }
  return report;
}

// Warm/cold portfolios. Each instance is in exactly one user segment and one
// product segment; warm means at least one prior rating over the lifespan.
inline EvalReport portfolio_report(
    const std::map<Setting, std::vector<double>>& scores_by_setting,
    std::span<const LabeledInstance* const> test_instances) {
  EvalReport report;
  struct Segment {
    std::string_view name;
    bool (*in)(const LabeledInstance&);
  };
  const Segment segments[] = {
      {"user_warm", [](const LabeledInstance& i) { return !i.user_cold; }},
      {"user_cold", [](const LabeledInstance& i) { return i.user_cold; }},
      {"product_warm", [](const LabeledInstance& i) { return !i.product_cold; }},
      {"product_cold", [](const LabeledInstance& i) { return i.product_cold; }},
  };
  for (const auto& [setting, scores] : scores_by_setting) {
    if (scores.size() != test_instances.size())
      throw std::invalid_argument("portfolio_report: score/instance count mismatch");
    for (const auto& segment : segments) {
      std::vector<double> seg_scores;
      std::vector<int> seg_labels;
      for (std::size_t i = 0; i < test_instances.size(); ++i) {
        if (segment.in(*test_instances[i])) {
          seg_scores.push_back(scores[i]);
          seg_labels.push_back(test_instances[i]->label);
        }
      }
      report.cells.push_back(detail::make_auc_cell("portfolio", std::string(setting_name(setting)),
                                                   std::string(segment.name), seg_scores,
                                                   seg_labels));
    }
  }
  return report;
}

// Per-category AUC per setting plus an overall row, followed by the
// S3-vs-S1 and S3-vs-S2 relative differences ranked largest first.
// Categories whose AUC is undefined under any of the involved settings are
// left out of the ranking; callers can surface them via `excluded_out`.
inline EvalReport per_category_report(
    const std::map<Setting, std::vector<double>>& scores_by_setting,
    std::span<const LabeledInstance* const> test_instances, const Interner& categories,
    std::vector<std::string>* excluded_out = nullptr) {
  EvalReport report;

  // Category display order: by test volume, largest first.
  std::map<std::int32_t, std::int64_t> counts;
  for (const auto* inst : test_instances) ++counts[inst->category];
  std::vector<std::int32_t> order;
  for (const auto& [cat, n] : counts) order.push_back(cat);
  std::stable_sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
    if (counts[a] != counts[b]) return counts[a] > counts[b];
    return categories.name(a) < categories.name(b);
  });

  for (const auto& [setting, scores] : scores_by_setting) {
    if (scores.size() != test_instances.size())
      throw std::invalid_argument("per_category_report: score/instance count mismatch");
    std::vector<int> labels;
    labels.reserve(test_instances.size());
    for (const auto* inst : test_instances) labels.push_back(inst->label);
    report.cells.push_back(detail::make_auc_cell(
        "per_category", std::string(setting_name(setting)), "overall", scores, labels));
    for (const std::int32_t cat : order) {
      std::vector<double> cat_scores;
      std::vector<int> cat_labels;
      for (std::size_t i = 0; i < test_instances.size(); ++i) {
        if (test_instances[i]->category == cat) {
          cat_scores.push_back(scores[i]);
          cat_labels.push_back(test_instances[i]->label);
        }
      }
      report.cells.push_back(detail::make_auc_cell("per_category",
                                                   std::string(setting_name(setting)),
                                                   categories.name(cat), cat_scores, cat_labels));
    }
  }

  // Relative difference rankings, e.g. (AUC(s3) - AUC(s1)) / AUC(s1).
  const std::pair<Setting, std::string> comparisons[] = {
      {Setting::s1, "s3_vs_s1"},
      {Setting::s2, "s3_vs_s2"},
  };
  for (const auto& [base, label] : comparisons) {
    if (!scores_by_setting.count(base) || !scores_by_setting.count(Setting::s3)) continue;
    std::vector<EvalCell> ranked;
    for (const std::int32_t cat : order) {
      const std::string& cat_name = categories.name(cat);
      const EvalCell* base_cell = report.find("per_category", setting_name(base), cat_name);
      const EvalCell* s3_cell = report.find("per_category", "s3", cat_name);
      if (!base_cell || !s3_cell || !base_cell->value || !s3_cell->value) {
        if (excluded_out) excluded_out->push_back(cat_name);
        continue;
      }
      EvalCell cell;
      cell.report = "per_category_reldiff";
      cell.setting = label;
      cell.segment = cat_name;
      cell.value = (*s3_cell->value - *base_cell->value) / *base_cell->value;
      cell.n_pos = s3_cell->n_pos;
      cell.n_neg = s3_cell->n_neg;
      ranked.push_back(std::move(cell));
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const EvalCell& a, const EvalCell& b) { return *a.value > *b.value; });
    for (auto& cell : ranked) report.cells.push_back(std::move(cell));
  }
  return report;
}

// Entity activity bucketed by day / 30-day block / 365-day block from day 0.
// Calendar-free blocks: these series are for trend shape, not date fidelity.
enum class TimelineGranularity { daily, monthly, yearly };

inline std::string_view timeline_granularity_name(TimelineGranularity g) {
  switch (g) {
    case TimelineGranularity::daily: return "daily";
    case TimelineGranularity::monthly: return "monthly";
    case TimelineGranularity::yearly: return "yearly";
  }
  return "?";
}

inline std::optional<TimelineGranularity> parse_timeline_granularity(std::string_view s) {
  if (s == "daily") return TimelineGranularity::daily;
  if (s == "monthly") return TimelineGranularity::monthly;
  if (s == "yearly") return TimelineGranularity::yearly;
  return std::nullopt;
}

inline constexpr std::int32_t timeline_bucket_days(TimelineGranularity g) {
  switch (g) {
    case TimelineGranularity::daily: return 1;
    case TimelineGranularity::monthly: return 30;
    case TimelineGranularity::yearly: return 365;
  }
  return 1;
}

struct TimelineBucket {
  std::int64_t bucket = 0;  // day / bucket_days
  std::int64_t count = 0;
  double average = 0.0;
};

inline std::vector<TimelineBucket> timeline_report(const EventStream& stream, EntityKind kind,
                                                   std::int32_t entity,
                                                   TimelineGranularity granularity) {
  const std::int32_t width = timeline_bucket_days(granularity);
  std::map<std::int64_t, std::pair<std::int64_t, std::int64_t>> acc;  // bucket -> (count, sum)
  for (const auto& ev : stream.events) {
    bool match = false;
    switch (kind) {
      case EntityKind::user: match = ev.user == entity; break;
      case EntityKind::product: match = ev.product == entity; break;
      case EntityKind::category: match = ev.category == entity; break;
      case EntityKind::global: match = true; break;
    }
    if (!match) continue;
    auto& [count, sum] = acc[ev.day / width];
    ++count;
    sum += ev.rating_milli;
  }
  std::vector<TimelineBucket> series;
  series.reserve(acc.size());
  for (const auto& [bucket, cs] : acc) {
    series.push_back(TimelineBucket{
        bucket, cs.first,
        static_cast<double>(cs.second) /
            (static_cast<double>(kRatingScale) * static_cast<double>(cs.first))});
  }
  return series;
}

inline void write_timeline_csv(std::span<const TimelineBucket> series, EntityKind kind,
                               std::string_view entity_name, TimelineGranularity granularity,
                               std::ostream& out) {
  out << "# timeline kind=" << entity_kind_name(kind) << " entity=" << entity_name
      << " granularity=" << timeline_granularity_name(granularity)
      << " bucket_days=" << timeline_bucket_days(granularity) << '\n';
  out << "bucket,count,avg\n";
  for (const auto& b : series)
    out << b.bucket << ',' << b.count << ',' << format_double(b.average) << '\n';
}

}  // namespace ratingtree
