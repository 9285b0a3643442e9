#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "ratingtree/eval.hpp"
#include "ratingtree/reference.hpp"
#include "test_support.hpp"

using namespace ratingtree;

TEST_CASE("labels binarize above three stars") {
  CHECK(binarize_label(4.0) == 1);
  CHECK(binarize_label(3.0) == 0);
  CHECK(binarize_label(5.0) == 1);
  CHECK(binarize_label(3.5) == 1);
  CHECK(binarize_label(1.0) == 0);
  CHECK(binarize_label_milli(3001) == 1);
  CHECK(binarize_label_milli(3000) == 0);
  CHECK_THROWS_AS(binarize_label(0.5), std::invalid_argument);
  CHECK_THROWS_AS(binarize_label(5.5), std::invalid_argument);
}

TEST_CASE("default split matches the calendar boundaries") {
  const SplitConfig config;
  CHECK(config.valid_start_day == 16801);  // 2016-01-01
  CHECK(config.test_start_day == 17167);   // 2017-01-01
  CHECK(config.test_end_day == 17835);     // 2018-10-31
  CHECK(classify_day(17683, config) == Split::test);  // 2018-06-01
  CHECK(classify_day(16800, config) == Split::train);
  CHECK(classify_day(17166, config) == Split::valid);
  CHECK(classify_day(16801, config) == Split::valid);
  CHECK(classify_day(17167, config) == Split::test);
  CHECK(classify_day(17835, config) == Split::test);
  CHECK(classify_day(17836, config) == Split::dropped);
}

TEST_CASE("every event lands in exactly one split and counts add up") {
  const auto stream = rtt::small_synth_stream(71);
  SplitConfig config;
  config.valid_start_day = 300;
  config.test_start_day = 450;
  config.test_end_day = 600;
  SplitCounts counts;
  const auto tags = split_by_time(stream, config, &counts);
  REQUIRE(tags.size() == stream.events.size());
  CHECK(counts.total() == stream.events.size());
  std::uint64_t dropped = 0;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    CHECK(tags[i] == classify_day(stream.events[i].day, config));
    dropped += tags[i] == Split::dropped ? 1 : 0;
  }
  CHECK(dropped == counts.dropped);
  CHECK(counts.dropped > 0);  // the stream runs past day 600
}

TEST_CASE("invalid split configuration is rejected") {
  SplitConfig config;
  config.valid_start_day = 100;
  config.test_start_day = 100;
  config.test_end_day = 200;
  CHECK_FALSE(config.valid());
  CHECK_THROWS_AS(split_by_time(rtt::d0_stream(), config), std::invalid_argument);
}

TEST_CASE("auc handles perfect, reversed, mixed and tied rankings") {
  const std::vector<int> pn = {1, 0};
  CHECK(compute_auc(std::vector<double>{0.9, 0.1}, pn) == 1.0);
  CHECK(compute_auc(std::vector<double>{0.1, 0.9}, pn) == 0.0);
  CHECK(compute_auc(std::vector<double>{0.8, 0.4, 0.6, 0.2}, std::vector<int>{1, 1, 0, 0}) ==
        0.75);
  CHECK(compute_auc(std::vector<double>{0.3, 0.3, 0.3, 0.3}, std::vector<int>{1, 0, 1, 0}) ==
        0.5);
  CHECK_FALSE(compute_auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}).has_value());
  CHECK_FALSE(compute_auc(std::vector<double>{}, std::vector<int>{}).has_value());
  CHECK_THROWS_AS(compute_auc(std::vector<double>{0.1}, std::vector<int>{1, 0}),
                  std::invalid_argument);
}

TEST_CASE("rank-based auc equals pairwise concordance") {
  std::mt19937_64 rng(1001);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng() % 120;
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      // coarse grid forces plenty of ties
      scores[i] = static_cast<double>(rng() % 12) / 11.0;
      labels[i] = static_cast<int>(rng() % 2);
    }
    const auto fast = compute_auc(scores, labels);
    const auto slow = brute_force_auc(scores, labels);
    REQUIRE(fast.has_value() == slow.has_value());
    if (fast) CHECK(std::fabs(*fast - *slow) < 1e-12);
  }
}

TEST_CASE("auc complement symmetry on tie-free scores") {
  std::mt19937_64 rng(1002);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng() % 200;
    std::vector<double> scores(n);
    std::vector<int> labels(n), flipped(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(i) + static_cast<double>(rng() % 1000) * 1e-6;
      labels[i] = static_cast<int>(rng() % 2);
      flipped[i] = 1 - labels[i];
    }
    const auto a = compute_auc(scores, labels);
    const auto b = compute_auc(scores, flipped);
    if (a && b) CHECK(*a + *b == Catch::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("auc is invariant under strictly increasing transforms") {
  std::mt19937_64 rng(1003);
  std::vector<double> scores(300);
  std::vector<int> labels(300);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scores[i] = static_cast<double>(rng() % 50) / 7.0;
    labels[i] = static_cast<int>(rng() % 2);
  }
  const auto base = compute_auc(scores, labels);
  auto mapped = scores;
  for (auto& s : mapped) s = std::exp(0.3 * s) + 2.0;
  CHECK(compute_auc(mapped, labels) == base);
  for (auto& s : mapped) s = std::atan(s) * 5 - 100;
  CHECK(compute_auc(mapped, labels) == base);
}

namespace {

std::vector<LabeledInstance> d0_instances(std::int32_t valid_start = 104,
                                          std::int32_t test_start = 106,
                                          std::int32_t test_end = 200) {
  const auto stream = rtt::d0_stream();
  const auto index = PrefixIndex::build(build_daily_aggregates(stream));
  SplitConfig split;
  split.valid_start_day = valid_start;
  split.test_start_day = test_start;
  split.test_end_day = test_end;
  return build_labeled_instances(stream, index, split);
}

}  // namespace

TEST_CASE("labeled instances carry labels, splits and cold flags") {
  const auto instances = d0_instances();
  REQUIRE(instances.size() == 4);
  CHECK(instances[0].label == 1);  // rating 5
  CHECK(instances[1].label == 1);  // rating 4
  CHECK(instances[2].label == 0);  // rating 2
  CHECK(instances[0].split == Split::train);
  CHECK(instances[1].split == Split::valid);
  CHECK(instances[2].split == Split::test);
  CHECK(instances[3].split == Split::test);
  CHECK(instances[0].user_cold);       // u1's first review
  CHECK_FALSE(instances[1].user_cold); // u1 again
  CHECK(instances[3].user_cold);       // u3's only review
  CHECK(instances[3].product_cold);    // p3 has no history
  for (const auto& inst : instances) REQUIRE(inst.tree_values.size() == 21);
}

TEST_CASE("dissection grid has one auc per tree and window") {
  const auto stream = rtt::small_synth_stream(81, 3000);
  const auto index = PrefixIndex::build(build_daily_aggregates(stream));
  SplitConfig split;
  split.valid_start_day = 300;
  split.test_start_day = 450;
  split.test_end_day = 700;
  const auto instances = build_labeled_instances(stream, index, split);
  const auto test_instances = filter_split(instances, Split::test);
  const auto report = dissection_report(test_instances);
  REQUIRE(report.cells.size() == 21);
  for (const auto& cell : report.cells) {
    CHECK(cell.report == "dissection");
    REQUIRE(cell.value.has_value());
    // every cell must agree with the pairwise-concordance reference
    std::vector<double> scores;
    std::vector<int> labels;
    const auto trees = std::vector<std::string>{"pt1", "pt2", "ut"};
    const auto tree_idx =
        std::find(trees.begin(), trees.end(), cell.setting) - trees.begin();
    std::size_t window_idx = 0;
    for (std::size_t wi = 0; wi < kDefaultWindows.size(); ++wi)
      if (window_label(kDefaultWindows[wi]) == cell.segment) window_idx = wi;
    for (const auto* inst : test_instances) {
      scores.push_back(inst->tree_values[tree_idx * 7 + window_idx]);
      labels.push_back(inst->label);
    }
    const auto expected = brute_force_auc(scores, labels);
    REQUIRE(expected.has_value());
    CHECK(std::fabs(*cell.value - *expected) < 1e-12);
  }
}

TEST_CASE("dissection marks single-class cells undefined") {
  std::vector<LabeledInstance> instances(3);
  for (auto& inst : instances) {
    inst.split = Split::test;
    inst.label = 1;
    inst.tree_values.assign(21, 3.0);
  }
  const auto test_instances = filter_split(instances, Split::test);
  const auto report = dissection_report(test_instances);
  for (const auto& cell : report.cells) {
    CHECK_FALSE(cell.value.has_value());
    CHECK(cell.n_pos == 3);
    CHECK(cell.n_neg == 0);
  }
}

TEST_CASE("user-history dissection beats chance on user-biased data") {
  SynthConfig config;
  config.n_users = 60;
  config.n_products = 50;
  config.n_events = 6000;
  config.user_bias_weight = 0.95;
  config.product_bias_weight = 0.05;
  config.noise_std = 0.4;
  config.start_day = 100;
  config.end_day = 700;
  config.cold_entry_day = 500;
  config.cold_start_fraction = 0.05;
  config.seed = 83;
  const auto stream = generate_synthetic(config);
  const auto index = PrefixIndex::build(build_daily_aggregates(stream));
  SplitConfig split;
  split.valid_start_day = 400;
  split.test_start_day = 500;
  split.test_end_day = 700;
  const auto instances = build_labeled_instances(stream, index, split);
  const auto test_instances = filter_split(instances, Split::test);
  const auto report = dissection_report(test_instances);
  const auto* cell = report.find("dissection", "ut", "7d");
  REQUIRE(cell != nullptr);
  REQUIRE(cell->value.has_value());
  CHECK(*cell->value > 0.5);
}

TEST_CASE("portfolio segments partition the test set") {
  const auto stream = rtt::small_synth_stream(91, 2500);
  const auto index = PrefixIndex::build(build_daily_aggregates(stream));
  SplitConfig split;
  split.valid_start_day = 300;
  split.test_start_day = 450;
  split.test_end_day = 700;
  const auto instances = build_labeled_instances(stream, index, split);
  const auto test_instances = filter_split(instances, Split::test);

  std::map<Setting, std::vector<double>> scores;
  auto& s1 = scores[Setting::s1];
  for (const auto* inst : test_instances) s1.push_back(inst->tree_values[6]);  // pt1_life

  const auto report = portfolio_report(scores, test_instances);
  REQUIRE(report.cells.size() == 4);
  const auto* warm = report.find("portfolio", "s1", "user_warm");
  const auto* cold = report.find("portfolio", "s1", "user_cold");
  REQUIRE(warm != nullptr);
  REQUIRE(cold != nullptr);
  CHECK(warm->n_pos + warm->n_neg + cold->n_pos + cold->n_neg ==
        static_cast<std::int64_t>(test_instances.size()));
  const auto* pwarm = report.find("portfolio", "s1", "product_warm");
  const auto* pcold = report.find("portfolio", "s1", "product_cold");
  CHECK(pwarm->n_pos + pwarm->n_neg + pcold->n_pos + pcold->n_neg ==
        static_cast<std::int64_t>(test_instances.size()));
}

TEST_CASE("on user-cold instances pt1 and pt2 raw scores rank identically") {
  const auto stream = rtt::small_synth_stream(93, 2500);
  const auto index = PrefixIndex::build(build_daily_aggregates(stream));
  SplitConfig split;
  split.valid_start_day = 300;
  split.test_start_day = 450;
  split.test_end_day = 700;
  const auto instances = build_labeled_instances(stream, index, split);

  std::vector<const LabeledInstance*> user_cold_test;
  for (const auto& inst : instances)
    if (inst.split == Split::test && inst.user_cold) user_cold_test.push_back(&inst);
  REQUIRE(user_cold_test.size() > 2);

  for (std::size_t wi = 0; wi < 7; ++wi) {
    std::vector<double> pt1_scores, pt2_scores;
    std::vector<int> labels;
    for (const auto* inst : user_cold_test) {
      pt1_scores.push_back(inst->tree_values[wi]);
      pt2_scores.push_back(inst->tree_values[7 + wi]);
      labels.push_back(inst->label);
    }
    CHECK(pt1_scores == pt2_scores);
    CHECK(compute_auc(pt1_scores, labels) == compute_auc(pt2_scores, labels));
  }
}

TEST_CASE("per-category report: symmetry and the relative-difference formula") {
  // two categories with identical score/label multisets
  std::vector<LabeledInstance> instances;
  Interner categories;
  const auto cat_a = categories.intern("A");
  const auto cat_b = categories.intern("B");
  const double score_sets[] = {0.9, 0.2, 0.7, 0.4};
  const int label_sets[] = {1, 0, 1, 0};
  std::map<Setting, std::vector<double>> scores;
  for (int copy = 0; copy < 2; ++copy)
    for (int i = 0; i < 4; ++i) {
      LabeledInstance inst;
      inst.category = copy == 0 ? cat_a : cat_b;
      inst.label = label_sets[i];
      inst.split = Split::test;
      instances.push_back(inst);
      for (const auto s : {Setting::s1, Setting::s2, Setting::s3})
        scores[s].push_back(score_sets[i]);
    }
  const auto test_instances = filter_split(instances, Split::test);
  const auto report = per_category_report(scores, test_instances, categories);

  const auto* a_cell = report.find("per_category", "s1", "A");
  const auto* b_cell = report.find("per_category", "s1", "B");
  const auto* overall = report.find("per_category", "s1", "overall");
  REQUIRE(a_cell);
  REQUIRE(b_cell);
  REQUIRE(overall);
  CHECK(*a_cell->value == *b_cell->value);
  const auto* rd_a = report.find("per_category_reldiff", "s3_vs_s1", "A");
  REQUIRE(rd_a);
  CHECK(*rd_a->value == 0.0);

  // known-answer check of the relative-difference formula
  const double rd = (0.7572 - 0.6892) / 0.6892;
  CHECK(rd == Catch::Approx(0.0987).margin(5e-5));
}

TEST_CASE("single-category input: overall equals the category row") {
  std::vector<LabeledInstance> instances;
  Interner categories;
  const auto only = categories.intern("Only");
  std::map<Setting, std::vector<double>> scores;
  std::mt19937_64 rng(95);
  for (int i = 0; i < 40; ++i) {
    LabeledInstance inst;
    inst.category = only;
    inst.label = static_cast<int>(rng() % 2);
    inst.split = Split::test;
    instances.push_back(inst);
    scores[Setting::s1].push_back(static_cast<double>(rng() % 100));
  }
  const auto test_instances = filter_split(instances, Split::test);
  const auto report = per_category_report(scores, test_instances, categories);
  const auto* overall = report.find("per_category", "s1", "overall");
  const auto* cat = report.find("per_category", "s1", "Only");
  REQUIRE(overall);
  REQUIRE(cat);
  CHECK(overall->value == cat->value);
}

TEST_CASE("undefined categories are excluded from the ranking") {
  std::vector<LabeledInstance> instances;
  Interner categories;
  const auto good = categories.intern("good");
  const auto degenerate = categories.intern("degenerate");
  std::map<Setting, std::vector<double>> scores;
  std::mt19937_64 rng(97);
  for (int i = 0; i < 30; ++i) {
    LabeledInstance inst;
    inst.category = i < 20 ? good : degenerate;
    inst.label = i < 20 ? static_cast<int>(rng() % 2) : 1;  // degenerate: all positive
    inst.split = Split::test;
    instances.push_back(inst);
    for (const auto s : {Setting::s1, Setting::s2, Setting::s3})
      scores[s].push_back(static_cast<double>(rng() % 100));
  }
  const auto test_instances = filter_split(instances, Split::test);
  std::vector<std::string> excluded;
  const auto report = per_category_report(scores, test_instances, categories, &excluded);
  CHECK(report.find("per_category_reldiff", "s3_vs_s1", "good") != nullptr);
  CHECK(report.find("per_category_reldiff", "s3_vs_s1", "degenerate") == nullptr);
  REQUIRE_FALSE(excluded.empty());
  CHECK(excluded.front() == "degenerate");
}

TEST_CASE("timelines bucket D0 as expected") {
  const auto stream = rtt::d0_stream();
  const auto p1_daily = timeline_report(stream, EntityKind::product, rtt::pid(stream, "p1"),
                                        TimelineGranularity::daily);
  REQUIRE(p1_daily.size() == 2);
  CHECK(p1_daily[0].bucket == 100);
  CHECK(p1_daily[0].count == 1);
  CHECK(p1_daily[0].average == 5.0);
  CHECK(p1_daily[1].bucket == 106);
  CHECK(p1_daily[1].average == 2.0);

  const auto u1_yearly = timeline_report(stream, EntityKind::user, rtt::uid(stream, "u1"),
                                         TimelineGranularity::yearly);
  REQUIRE(u1_yearly.size() == 1);
  CHECK(u1_yearly[0].bucket == 0);
  CHECK(u1_yearly[0].count == 2);
  CHECK(u1_yearly[0].average == 4.5);

  const auto u3 = timeline_report(stream, EntityKind::user, rtt::uid(stream, "u3"),
                                  TimelineGranularity::monthly);
  REQUIRE(u3.size() == 1);
  CHECK(u3[0].average == 4.0);  // singleton bucket: average equals the rating

  CHECK(timeline_report(stream, EntityKind::user, 999, TimelineGranularity::daily).empty());
}

TEST_CASE("timeline buckets conserve counts and mass") {
  const auto stream = rtt::small_synth_stream(99, 1500);
  for (const auto granularity : {TimelineGranularity::daily, TimelineGranularity::monthly,
                                 TimelineGranularity::yearly}) {
    for (std::int32_t u = 0; u < 5; ++u) {
      const auto series = timeline_report(stream, EntityKind::user, u, granularity);
      std::int64_t expected_count = 0;
      std::int64_t expected_sum = 0;
      for (const auto& ev : stream.events)
        if (ev.user == u) {
          ++expected_count;
          expected_sum += ev.rating_milli;
        }
      std::int64_t got_count = 0;
      double got_mass = 0;
      for (const auto& b : series) {
        got_count += b.count;
        got_mass += b.average * static_cast<double>(b.count);
      }
      CHECK(got_count == expected_count);
      CHECK(got_mass ==
            Catch::Approx(static_cast<double>(expected_sum) / kRatingScale).epsilon(1e-9));
    }
  }
}
