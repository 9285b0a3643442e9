#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "ratingtree/eval.hpp"
#include "ratingtree/ingest.hpp"
#include "ratingtree/synth.hpp"
#include "test_support.hpp"

using namespace ratingtree;

TEST_CASE("same seed, same stream") {
  SynthConfig config;
  config.n_events = 3000;
  config.seed = 1234;
  const auto a = generate_synthetic(config);
  const auto b = generate_synthetic(config);
  CHECK(canonical_csv_string(a) == canonical_csv_string(b));

  config.seed = 1235;
  const auto c = generate_synthetic(config);
  CHECK(canonical_csv_string(a) != canonical_csv_string(c));
}

TEST_CASE("pure user effects give each user constant ratings") {
  SynthConfig config;
  config.n_events = 2000;
  config.user_bias_weight = 1.0;
  config.product_bias_weight = 0.0;
  config.noise_std = 0.0;
  config.trend_slope_min = 0.0;
  config.trend_slope_max = 0.0;
  config.seed = 7;
  const auto stream = generate_synthetic(config);
  std::map<std::int32_t, std::int32_t> seen;
  for (const auto& ev : stream.events) {
    const auto [it, inserted] = seen.emplace(ev.user, ev.rating_milli);
    if (!inserted) CHECK(it->second == ev.rating_milli);
  }
}

TEST_CASE("event count and day range are exact") {
  SynthConfig config;
  config.n_events = 10000;
  config.seed = 11;
  const auto stream = generate_synthetic(config);
  CHECK(stream.events.size() == 10000);
  for (const auto& ev : stream.events) {
    CHECK(ev.day >= config.start_day);
    CHECK(ev.day <= config.end_day);
    CHECK(ev.rating_milli >= kMinRatingMilli);
    CHECK(ev.rating_milli <= kMaxRatingMilli);
    CHECK(ev.rating_milli % kRatingScale == 0);  // whole stars
  }
}

TEST_CASE("default config populates both classes in every split") {
  SynthConfig config;
  config.seed = 13;
  const auto stream = generate_synthetic(config);
  SplitConfig split;  // default calendar boundaries sit inside the default day range
  std::map<Split, std::pair<int, int>> class_counts;
  for (const auto& ev : stream.events) {
    auto& [neg, pos] = class_counts[classify_day(ev.day, split)];
    (binarize_label_milli(ev.rating_milli) == 1 ? pos : neg)++;
  }
  for (const auto s : {Split::train, Split::valid, Split::test}) {
    CAPTURE(split_name(s));
    CHECK(class_counts[s].first > 0);
    CHECK(class_counts[s].second > 0);
  }
}

TEST_CASE("reserved cold entities first appear after the entry day") {
  SynthConfig config;
  config.n_users = 100;
  config.n_products = 100;
  config.n_events = 8000;
  config.cold_start_fraction = 0.3;
  config.start_day = 100;
  config.end_day = 700;
  config.cold_entry_day = 500;
  config.seed = 17;
  const auto stream = generate_synthetic(config);

  std::map<std::int32_t, std::int32_t> first_day;
  for (const auto& ev : stream.events)
    if (!first_day.count(ev.user)) first_day[ev.user] = ev.day;
  int cold_users = 0;
  for (const auto& [user, day] : first_day) cold_users += day >= config.cold_entry_day ? 1 : 0;
  CHECK(cold_users > 0);

  // ids u70..u99 are the reserved range; any that appear must start late
  for (const auto& [user, day] : first_day) {
    const auto& name = stream.users.name(user);
    const int raw = std::stoi(name.substr(1));
    if (raw >= 70) CHECK(day >= config.cold_entry_day);
  }
}

TEST_CASE("infeasible configurations are rejected") {
  SynthConfig config;
  config.cold_start_fraction = 1.0;
  CHECK_THROWS_AS(generate_synthetic(config), std::invalid_argument);

  SynthConfig bad_days;
  bad_days.start_day = 500;
  bad_days.end_day = 100;
  CHECK_THROWS_AS(generate_synthetic(bad_days), std::invalid_argument);

  SynthConfig bad_entry;
  bad_entry.cold_start_fraction = 0.2;
  bad_entry.cold_entry_day = bad_entry.end_day + 5;
  CHECK_THROWS_AS(generate_synthetic(bad_entry), std::invalid_argument);

  SynthConfig no_events;
  no_events.n_events = 0;
  CHECK_THROWS_AS(generate_synthetic(no_events), std::invalid_argument);

  SynthConfig bad_weight;
  bad_weight.user_bias_weight = 1.5;
  CHECK_THROWS_AS(generate_synthetic(bad_weight), std::invalid_argument);
}

TEST_CASE("designed effects are recoverable from single-tree scores") {
  auto dissection_auc_at_life = [](double user_w, double product_w, std::uint64_t seed,
                                   TreeKind tree) {
    SynthConfig config;
    config.n_users = 80;
    config.n_products = 80;
    config.n_events = 8000;
    config.user_bias_weight = user_w;
    config.product_bias_weight = product_w;
    config.noise_std = 0.5;
    config.start_day = 100;
    config.end_day = 700;
    config.cold_entry_day = 500;
    config.cold_start_fraction = 0.05;
    config.seed = seed;
    const auto stream = generate_synthetic(config);
    const auto index = PrefixIndex::build(build_daily_aggregates(stream));
    SplitConfig split;
    split.valid_start_day = 400;
    split.test_start_day = 500;
    split.test_end_day = 700;
    const auto instances = build_labeled_instances(stream, index, split);
    const auto test_instances = filter_split(instances, Split::test);
    const auto report = dissection_report(test_instances);
    const auto* cell = report.find("dissection", tree_kind_name(tree), "life");
    REQUIRE(cell != nullptr);
    REQUIRE(cell->value.has_value());
    return *cell->value;
  };

  const double ut_user_dom = dissection_auc_at_life(0.9, 0.1, 101, TreeKind::ut);
  const double pt1_user_dom = dissection_auc_at_life(0.9, 0.1, 101, TreeKind::pt1);
  CHECK(ut_user_dom > pt1_user_dom);

  const double ut_prod_dom = dissection_auc_at_life(0.1, 0.9, 101, TreeKind::ut);
  const double pt1_prod_dom = dissection_auc_at_life(0.1, 0.9, 101, TreeKind::pt1);
  CHECK(pt1_prod_dom > ut_prod_dom);
}

TEST_CASE("popularity skew concentrates events on early ids") {
  SynthConfig config;
  config.n_events = 5000;
  config.popularity_skew = 4.0;
  config.seed = 23;
  const auto stream = generate_synthetic(config);
  std::int64_t low_id = 0;
  for (const auto& ev : stream.events) {
    const int raw = std::stoi(stream.users.name(ev.user).substr(1));
    low_id += raw < config.n_users / 4 ? 1 : 0;
  }
  // uniform sampling would put ~25% in the lowest quartile
  CHECK(low_id > static_cast<std::int64_t>(stream.events.size()) / 2);
}
