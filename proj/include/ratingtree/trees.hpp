#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ratingtree/aggregate.hpp"
#include "ratingtree/windows.hpp"

namespace ratingtree {

/// The three fallback cascades, each evaluated fresh at a query day t over a
/// look-back window L. Every branch is the plain average of the ratings the
/// matching entity received/gave inside [t-L, t-1]; the first branch with at
/// least one rating wins.
///
///   product tree 1: product -> category -> global            (crowd wisdom)
///   product tree 2: product -> user -> category -> global    (crowd wisdom,
///                   user rescue when the product has no history)
///   user tree:      user -> product -> category -> global    (individual taste)
///
/// User branches look across all categories. When every branch is empty the
/// output is a configured default constant, flagged as such.
enum class TreeKind { pt1, pt2, ut };

enum class FallbackLevel { product, user, category, global, defaulted };

inline std::string_view tree_kind_name(TreeKind t) {
  switch (t) {
    case TreeKind::pt1: return "pt1";
    case TreeKind::pt2: return "pt2";
    case TreeKind::ut: return "ut";
  }
  return "?";
}

inline std::string_view fallback_level_name(FallbackLevel level) {
  switch (level) {
    case FallbackLevel::product: return "product";
    case FallbackLevel::user: return "user";
    case FallbackLevel::category: return "category";
    case FallbackLevel::global: return "global";
    case FallbackLevel::defaulted: return "default";
  }
  return "?";
}

// Rating-scale midpoint; used when every branch of a cascade is empty.
inline constexpr double kDefaultRating = 3.0;

struct TreeOutput {
  double value = kDefaultRating;
  FallbackLevel level = FallbackLevel::defaulted;
  TreeKind tree = TreeKind::pt1;

  friend bool operator==(const TreeOutput&, const TreeOutput&) = default;
};

namespace detail {

struct Branch {
  EntityKind kind;
  std::int32_t entity;
  FallbackLevel level;
};

inline TreeOutput eval_cascade(const PrefixIndex& index, TreeKind tree,
                               std::span<const Branch> branches, std::int32_t t,
                               LookbackWindow w, double default_rating) {
  for (const auto& b : branches) {
    const WindowStats stats = index.window(b.kind, b.entity, t, w);
    if (stats.count > 0) return TreeOutput{stats.average(), b.level, tree};
  }
  return TreeOutput{default_rating, FallbackLevel::defaulted, tree};
}

}  // namespace detail

inline TreeOutput eval_product_tree_1(const PrefixIndex& index, std::int32_t product,
                                      std::int32_t category, std::int32_t t,
                                      LookbackWindow w,
                                      double default_rating = kDefaultRating) {
  const detail::Branch branches[] = {
      {EntityKind::product, product, FallbackLevel::product},
      {EntityKind::category, category, FallbackLevel::category},
      {EntityKind::global, 0, FallbackLevel::global},
  };
  return detail::eval_cascade(index, TreeKind::pt1, branches, t, w, default_rating);
}

inline TreeOutput eval_product_tree_2(const PrefixIndex& index, std::int32_t user,
                                      std::int32_t product, std::int32_t category,
                                      std::int32_t t, LookbackWindow w,
                                      double default_rating = kDefaultRating) {
  const detail::Branch branches[] = {
      {EntityKind::product, product, FallbackLevel::product},
      {EntityKind::user, user, FallbackLevel::user},
      {EntityKind::category, category, FallbackLevel::category},
      {EntityKind::global, 0, FallbackLevel::global},
  };
  return detail::eval_cascade(index, TreeKind::pt2, branches, t, w, default_rating);
}

inline TreeOutput eval_user_tree(const PrefixIndex& index, std::int32_t user,
                                 std::int32_t product, std::int32_t category,
                                 std::int32_t t, LookbackWindow w,
                                 double default_rating = kDefaultRating) {
  const detail::Branch branches[] = {
      {EntityKind::user, user, FallbackLevel::user},
      {EntityKind::product, product, FallbackLevel::product},
      {EntityKind::category, category, FallbackLevel::category},
      {EntityKind::global, 0, FallbackLevel::global},
  };
  return detail::eval_cascade(index, TreeKind::ut, branches, t, w, default_rating);
}

inline TreeOutput eval_tree(const PrefixIndex& index, TreeKind tree, std::int32_t user,
                            std::int32_t product, std::int32_t category, std::int32_t t,
                            LookbackWindow w, double default_rating = kDefaultRating) {
  switch (tree) {
    case TreeKind::pt1:
      return eval_product_tree_1(index, product, category, t, w, default_rating);
    case TreeKind::pt2:
      return eval_product_tree_2(index, user, product, category, t, w, default_rating);
    case TreeKind::ut:
      break;
  }
  return eval_user_tree(index, user, product, category, t, w, default_rating);
}

// Feature bundles: S1 = PT1 per window, S2 = PT2, S3 = UT, S4 = all three
// blocks concatenated (PT1 block, then PT2, then UT).
enum class Setting { s1, s2, s3, s4 };

inline std::string_view setting_name(Setting s) {
  switch (s) {
    case Setting::s1: return "s1";
    case Setting::s2: return "s2";
    case Setting::s3: return "s3";
    case Setting::s4: return "s4";
  }
  return "?";
}

inline std::optional<Setting> parse_setting(std::string_view s) {
  if (s == "s1" || s == "S1") return Setting::s1;
  if (s == "s2" || s == "S2") return Setting::s2;
  if (s == "s3" || s == "S3") return Setting::s3;
  if (s == "s4" || s == "S4") return Setting::s4;
  return std::nullopt;
}

inline std::vector<TreeKind> setting_trees(Setting s) {
  switch (s) {
    case Setting::s1: return {TreeKind::pt1};
    case Setting::s2: return {TreeKind::pt2};
    case Setting::s3: return {TreeKind::ut};
    case Setting::s4: return {TreeKind::pt1, TreeKind::pt2, TreeKind::ut};
  }
  return {};
}

struct FeatureVector {
  Setting setting = Setting::s1;
  std::vector<double> values;          // one block of |windows| values per tree
  std::vector<FallbackLevel> levels;   // which branch produced each value
  bool user_cold_start = false;        // no ratings by the user before t
  bool product_cold_start = false;     // no ratings for the product before t
};

// Evaluates the setting's trees at every window, in window order within each
// tree block. Cold-start flags come from the lifespan window, so they mean
// "no history at all before t", not "quiet lately".
inline FeatureVector assemble_features(const PrefixIndex& index, Setting setting,
                                       std::int32_t user, std::int32_t product,
                                       std::int32_t category, std::int32_t t,
                                       std::span<const LookbackWindow> windows = kDefaultWindows,
                                       double default_rating = kDefaultRating) {
  FeatureVector fv;
  fv.setting = setting;
  const auto trees = setting_trees(setting);
  fv.values.reserve(trees.size() * windows.size());
  fv.levels.reserve(trees.size() * windows.size());
  for (const TreeKind tree : trees) {
    for (const LookbackWindow w : windows) {
      const TreeOutput out = eval_tree(index, tree, user, product, category, t, w, default_rating);
      fv.values.push_back(out.value);
      fv.levels.push_back(out.level);
    }
  }
  const auto life = LookbackWindow::lifespan();
  fv.user_cold_start = index.window(EntityKind::user, user, t, life).count == 0;
  fv.product_cold_start = index.window(EntityKind::product, product, t, life).count == 0;
  return fv;
}

// Column names for the feature csv, e.g. pt1_7d ... ut_life.
inline std::vector<std::string> feature_column_names(Setting setting,
                                                     std::span<const LookbackWindow> windows = kDefaultWindows) {
  std::vector<std::string> names;
  for (const TreeKind tree : setting_trees(setting))
    for (const LookbackWindow w : windows)
      names.push_back(std::string(tree_kind_name(tree)) + "_" + window_label(w));
  return names;
}

}  // namespace ratingtree
