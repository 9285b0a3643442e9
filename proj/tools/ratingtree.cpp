// Command-line front end for the rating-history pipeline. One verb per
// pipeline stage plus the evaluation verbs; `run` chains everything.
//
// Exit codes: 0 success, 1 validation error, 2 runtime error, 3 partial
// artifacts (a later stage failed after earlier artifacts were written).

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ratingtree/ratingtree.hpp"

namespace rt = ratingtree;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitPartial = 3;

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::int32_t require_day(const std::string& text, const std::string& flag) {
  const auto day = rt::parse_day(text);
  if (!day) throw ValidationError(flag + ": expected YYYY-MM-DD or a day index, got '" + text + "'");
  return *day;
}

rt::SplitConfig make_split(const std::string& valid_start, const std::string& test_start,
                           const std::string& test_end) {
  rt::SplitConfig split;
  split.valid_start_day = require_day(valid_start, "--valid-start");
  split.test_start_day = require_day(test_start, "--test-start");
  split.test_end_day = require_day(test_end, "--test-end");
  if (!split.valid())
    throw ValidationError("split boundaries must satisfy valid_start < test_start <= test_end");
  return split;
}

std::vector<rt::LookbackWindow> make_windows(const std::vector<std::string>& labels) {
  std::vector<rt::LookbackWindow> windows;
  for (const auto& label : labels) {
    const auto w = rt::parse_window(label);
    if (!w) throw ValidationError("--windows: unknown window '" + label + "'");
    windows.push_back(*w);
  }
  if (!rt::valid_window_list(windows))
    throw ValidationError("--windows: list must be ascending with lifespan last");
  return windows;
}

std::vector<rt::Setting> make_settings(const std::vector<std::string>& names) {
  std::vector<rt::Setting> settings;
  for (const auto& name : names) {
    const auto s = rt::parse_setting(name);
    if (!s) throw ValidationError("unknown setting '" + name + "' (expected s1..s4)");
    if (std::find(settings.begin(), settings.end(), *s) == settings.end())
      settings.push_back(*s);
  }
  if (settings.empty()) throw ValidationError("no settings selected");
  return settings;
}

rt::IngestOptions make_ingest_options(const std::string& format, bool csv_header,
                                      const std::string& error_policy,
                                      const std::string& default_category) {
  rt::IngestOptions opts;
  const auto fmt = rt::parse_input_format(format);
  if (!fmt) throw ValidationError("--format must be csv or jsonl");
  opts.format = *fmt;
  opts.csv_has_header = csv_header;
  if (error_policy == "abort") opts.error_policy = rt::ErrorPolicy::abort;
  else if (error_policy == "skip") opts.error_policy = rt::ErrorPolicy::skip;
  else throw ValidationError("--error-policy must be abort or skip");
  opts.default_category = default_category;
  return opts;
}

void write_text_file(const std::string& path, const std::function<void(std::ostream&)>& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  fn(out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

// --- subcommand option bags -------------------------------------------------

struct SplitFlags {
  std::string valid_start = "2016-01-01";
  std::string test_start = "2017-01-01";
  std::string test_end = "2018-10-31";

  void attach(CLI::App* cmd) {
    cmd->add_option("--valid-start", valid_start, "First validation day (date or day index)")
        ->capture_default_str();
    cmd->add_option("--test-start", test_start, "First test day")->capture_default_str();
    cmd->add_option("--test-end", test_end, "Last test day (inclusive)")->capture_default_str();
  }
  rt::SplitConfig value() const { return make_split(valid_start, test_start, test_end); }
};

struct CombinerFlags {
  rt::CombinerConfig config;

  void attach(CLI::App* cmd) {
    cmd->add_option("--lr", config.learning_rate, "Gradient-descent learning rate")
        ->capture_default_str();
    cmd->add_option("--l2", config.l2, "L2 penalty on weights")->capture_default_str();
    cmd->add_option("--epochs", config.max_epochs, "Max full-batch epochs")
        ->capture_default_str();
    cmd->add_option("--patience", config.patience,
                    "Early-stop after this many stale validation evaluations")
        ->capture_default_str();
    cmd->add_option("--seed", config.seed, "Seed recorded in model metadata")
        ->capture_default_str();
  }
};

struct IngestFlags {
  std::vector<std::string> inputs;
  std::string format = "csv";
  bool csv_header = false;
  std::string error_policy = "abort";
  std::string default_category;

  void attach(CLI::App* cmd) {
    cmd->add_option("--input", inputs, "Input file (repeatable)")->required();
    cmd->add_option("--format", format, "Input format: csv or jsonl")->capture_default_str();
    cmd->add_flag("--csv-header", csv_header, "First csv line is a header");
    cmd->add_option("--error-policy", error_policy, "Malformed lines: abort or skip")
        ->capture_default_str();
    cmd->add_option("--category", default_category,
                    "Category for jsonl records without a category field");
  }
  rt::IngestOptions value() const {
    return make_ingest_options(format, csv_header, error_policy, default_category);
  }
};

// --- subcommands --------------------------------------------------------------

int run_ingest(const IngestFlags& flags, const std::string& out_path) {
  rt::IngestStats stats;
  const auto stream = rt::build_event_stream(flags.inputs, flags.value(), &stats);
  write_text_file(out_path, [&](std::ostream& out) { rt::write_canonical_csv(stream, out); });
  std::cout << "events=" << stats.parsed << " skipped=" << stats.skipped
            << " out=" << out_path << '\n';
  return kExitOk;
}

int run_aggregate(const std::string& events_path, const std::string& out_path) {
  const auto stream = rt::load_canonical_csv(events_path);
  const auto aggregates = rt::build_daily_aggregates(stream);
  write_text_file(out_path,
                  [&](std::ostream& out) { rt::write_aggregate_csv(aggregates, stream, out); });
  std::cout << "rows=" << aggregates.size() << " out=" << out_path << '\n';
  return kExitOk;
}

int run_features(const std::string& events_path, const std::string& setting_name,
                 const std::vector<std::string>& window_labels, double default_rating,
                 const std::string& out_path) {
  const auto setting = rt::parse_setting(setting_name);
  if (!setting) throw ValidationError("unknown setting '" + setting_name + "'");
  const auto windows = make_windows(window_labels);
  if (default_rating < 1.0 || default_rating > 5.0)
    throw ValidationError("--default-rating must lie in [1,5]");

  const auto stream = rt::load_canonical_csv(events_path);
  const auto index = rt::PrefixIndex::build(rt::build_daily_aggregates(stream));
  // The split only tags rows downstream; any valid config yields the same features.
  const auto instances =
      rt::build_labeled_instances(stream, index, rt::SplitConfig{}, windows, default_rating);
  write_text_file(out_path, [&](std::ostream& out) {
    rt::write_feature_csv(stream, instances, *setting, windows, out);
  });
  std::cout << "rows=" << instances.size() << " out=" << out_path << '\n';
  return kExitOk;
}

int run_train(const std::string& features_path, const SplitFlags& split_flags,
              const CombinerFlags& combiner, const std::string& category,
              const std::string& out_path) {
  const auto split = split_flags.value();
  const auto table = rt::read_feature_csv(features_path, split);
  std::int32_t category_filter = -1;
  if (!category.empty()) {
    const auto cat = table.categories.find(category);
    if (!cat) throw ValidationError("category '" + category + "' not present in features file");
    category_filter = *cat;
  }
  const std::size_t n_cols = table.feature_columns.size();
  const auto train = rt::make_dataset(table.instances, rt::Split::train, 0, n_cols, category_filter);
  const auto valid = rt::make_dataset(table.instances, rt::Split::valid, 0, n_cols, category_filter);
  auto model = rt::fit(train, valid, combiner.config);
  model.setting = std::string(rt::setting_name(table.setting));
  model.category_filter = category;
  write_text_file(out_path, [&](std::ostream& out) { rt::save_model(model, out); });
  std::cout << "trained setting=" << model.setting << " n_train=" << model.n_train
            << " epochs=" << model.epochs_run << " out=" << out_path << '\n';
  return kExitOk;
}

// Shared by `evaluate` and `portfolio`. The features file must carry the s4
// layout for multi-setting evaluation; a single-setting file evaluates only
// its own setting.
rt::EvaluationOutput evaluate_from_file(const std::string& features_path,
                                        const rt::SplitConfig& split,
                                        const std::vector<std::string>& setting_names,
                                        const rt::CombinerConfig& combiner,
                                        bool per_category_models, rt::FeatureTable& table_out) {
  table_out = rt::read_feature_csv(features_path, split);
  std::vector<rt::Setting> settings;
  if (table_out.setting == rt::Setting::s4) {
    settings = make_settings(setting_names);
  } else {
    settings = {table_out.setting};
  }
  return rt::evaluate_settings(table_out.instances, table_out.categories, settings,
                               table_out.n_windows, combiner, per_category_models);
}

int run_evaluate(const std::string& features_path, const SplitFlags& split_flags,
                 const std::vector<std::string>& setting_names, const CombinerFlags& combiner,
                 bool per_category_models, const std::string& out_path) {
  rt::FeatureTable table;
  auto evaluation = evaluate_from_file(features_path, split_flags.value(), setting_names,
                                       combiner.config, per_category_models, table);
  write_text_file(out_path, [&](std::ostream& out) { evaluation.reports.write_csv(out); });
  for (const auto& cell : evaluation.reports.cells)
    if (cell.report == "per_category" && cell.segment == "overall")
      std::cout << cell.setting << " overall auc="
                << (cell.value ? rt::format_double(*cell.value) : "undefined") << '\n';
  std::cout << "cells=" << evaluation.reports.cells.size() << " out=" << out_path << '\n';
  return kExitOk;
}

int run_portfolio(const std::string& features_path, const SplitFlags& split_flags,
                  const std::vector<std::string>& setting_names, const CombinerFlags& combiner,
                  const std::string& out_path) {
  rt::FeatureTable table;
  auto evaluation = evaluate_from_file(features_path, split_flags.value(), setting_names,
                                       combiner.config, false, table);
  rt::EvalReport portfolio;
  for (auto& cell : evaluation.reports.cells)
    if (cell.report == "portfolio") portfolio.cells.push_back(std::move(cell));
  write_text_file(out_path, [&](std::ostream& out) { portfolio.write_csv(out); });
  std::cout << "cells=" << portfolio.cells.size() << " out=" << out_path << '\n';
  return kExitOk;
}

int run_dissect(const std::string& features_path, const SplitFlags& split_flags,
                const std::string& out_path) {
  const auto table = rt::read_feature_csv(features_path, split_flags.value());
  if (table.setting != rt::Setting::s4)
    throw ValidationError("dissection needs an s4 features file (all three tree blocks)");
  std::vector<rt::LookbackWindow> windows;
  for (std::size_t i = 0; i < table.n_windows; ++i) {
    const auto& col = table.feature_columns[i];
    const auto w = rt::parse_window(col.substr(col.find('_') + 1));
    if (!w) throw ValidationError("cannot parse window from column '" + col + "'");
    windows.push_back(*w);
  }
  const auto test_instances = rt::filter_split(table.instances, rt::Split::test);
  const auto report = rt::dissection_report(test_instances, windows);
  write_text_file(out_path, [&](std::ostream& out) { report.write_csv(out); });
  std::cout << "cells=" << report.cells.size() << " out=" << out_path << '\n';
  return kExitOk;
}

int run_timeline(const std::string& events_path, const std::string& kind_name,
                 const std::string& entity, const std::string& granularity_name,
                 const std::string& out_path) {
  const auto kind = rt::parse_entity_kind(kind_name);
  if (!kind) throw ValidationError("--kind must be user, product, category or global");
  const auto granularity = rt::parse_timeline_granularity(granularity_name);
  if (!granularity) throw ValidationError("--granularity must be daily, monthly or yearly");

  const auto stream = rt::load_canonical_csv(events_path);
  std::int32_t entity_id = 0;
  if (*kind != rt::EntityKind::global) {
    const rt::Interner* interner = nullptr;
    switch (*kind) {
      case rt::EntityKind::user: interner = &stream.users; break;
      case rt::EntityKind::product: interner = &stream.products; break;
      default: interner = &stream.categories; break;
    }
    if (const auto id = interner->find(entity)) {
      entity_id = *id;
    } else {
      entity_id = -1;  // unknown entity: empty series, not an error
    }
  }
  const auto series = rt::timeline_report(stream, *kind, entity_id, *granularity);
  write_text_file(out_path, [&](std::ostream& out) {
    rt::write_timeline_csv(series, *kind, entity, *granularity, out);
  });
  std::cout << "buckets=" << series.size() << " out=" << out_path << '\n';
  return kExitOk;
}

int run_synth(const rt::SynthConfig& config, const std::string& out_path) {
  const auto stream = rt::generate_synthetic(config);
  write_text_file(out_path, [&](std::ostream& out) { rt::write_canonical_csv(stream, out); });
  std::cout << "events=" << stream.events.size() << " users=" << stream.users.size()
            << " products=" << stream.products.size() << " out=" << out_path << '\n';
  return kExitOk;
}

int run_bench(const rt::BenchConfig& config, const std::string& out_path) {
  const auto report = rt::bench_aggregation(config);
  if (!out_path.empty())
    write_text_file(out_path,
                    [&](std::ostream& out) { rt::write_bench_csv(config, report, out); });
  std::cout << "n_events=" << report.n_events << " indexed_s=" << report.indexed_seconds
            << " naive_s=" << report.naive_seconds << " speedup=" << report.speedup
            << " checksums_match=" << (report.checksums_match ? "yes" : "no") << '\n';
  return report.checksums_match ? kExitOk : kExitRuntime;
}

int run_full(const rt::PipelineConfig& config) {
  const auto result = rt::run_pipeline(config);
  for (const auto& problem : result.validation_errors)
    std::cerr << "config error: " << problem << '\n';
  if (result.status == rt::PipelineStatus::ok) {
    for (const auto& artifact : result.artifacts)
      std::cout << artifact.path << " rows=" << artifact.rows << " " << artifact.digest << '\n';
    std::cout << "manifest=" << result.manifest_path << '\n';
  } else if (!result.failed_stage.empty()) {
    std::cerr << "stage '" << result.failed_stage << "' failed: " << result.error << '\n';
  }
  switch (result.status) {
    case rt::PipelineStatus::ok: return kExitOk;
    case rt::PipelineStatus::validation_error: return kExitValidation;
    case rt::PipelineStatus::runtime_failure: return kExitRuntime;
    case rt::PipelineStatus::partial: return kExitPartial;
  }
  return kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Historical-rating fallback trees: pipeline, evaluation and benchmarks"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI config file; sections per subcommand, flags win over file");

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "Parse raw reviews into the canonical csv");
  IngestFlags ingest_flags;
  ingest_flags.attach(ingest_cmd);
  std::string ingest_out = "events.csv";
  ingest_cmd->add_option("--out", ingest_out, "Canonical csv path")->capture_default_str();

  // aggregate
  auto* aggregate_cmd = app.add_subcommand("aggregate", "Daily per-entity (count, sum) rows");
  std::string aggregate_events, aggregate_out = "aggregates.csv";
  aggregate_cmd->add_option("--events", aggregate_events, "Canonical events csv")->required();
  aggregate_cmd->add_option("--out", aggregate_out, "Aggregate csv path")->capture_default_str();

  // features
  auto* features_cmd = app.add_subcommand("features", "Instance-level tree features");
  std::string features_events, features_setting = "s4", features_out = "features.csv";
  std::vector<std::string> features_windows = {"7d", "30d", "90d", "1y", "3y", "5y", "life"};
  double features_default_rating = rt::kDefaultRating;
  features_cmd->add_option("--events", features_events, "Canonical events csv")->required();
  features_cmd->add_option("--setting", features_setting, "s1, s2, s3 or s4")
      ->capture_default_str();
  features_cmd->add_option("--windows", features_windows, "Look-back windows, ascending")
      ->delimiter(',')
      ->capture_default_str();
  features_cmd->add_option("--default-rating", features_default_rating,
                           "Value when every fallback level is empty")
      ->capture_default_str();
  features_cmd->add_option("--out", features_out, "Feature csv path")->capture_default_str();

  // train
  auto* train_cmd = app.add_subcommand("train", "Fit the logistic combiner on a features file");
  std::string train_features, train_category, train_out = "model.txt";
  SplitFlags train_split;
  CombinerFlags train_combiner;
  train_cmd->add_option("--features", train_features, "Feature csv")->required();
  train_split.attach(train_cmd);
  train_combiner.attach(train_cmd);
  train_cmd->add_option("--category", train_category, "Train only on this category");
  train_cmd->add_option("--out", train_out, "Model file path")->capture_default_str();

  // evaluate
  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "Per-category and portfolio AUC reports");
  std::string evaluate_features, evaluate_out = "reports.csv";
  std::vector<std::string> evaluate_settings_names = {"s1", "s2", "s3", "s4"};
  bool evaluate_per_category = false;
  SplitFlags evaluate_split;
  CombinerFlags evaluate_combiner;
  evaluate_cmd->add_option("--features", evaluate_features, "Feature csv (s4 layout)")
      ->required();
  evaluate_split.attach(evaluate_cmd);
  evaluate_combiner.attach(evaluate_cmd);
  evaluate_cmd->add_option("--settings", evaluate_settings_names, "Settings to evaluate")
      ->delimiter(',')
      ->capture_default_str();
  evaluate_cmd->add_flag("--per-category-models", evaluate_per_category,
                         "Also fit one model per category and report single vs multi");
  evaluate_cmd->add_option("--out", evaluate_out, "Report csv path")->capture_default_str();

  // dissect
  auto* dissect_cmd =
      app.add_subcommand("dissect", "AUC of each raw tree value per window");
  std::string dissect_features, dissect_out = "dissection.csv";
  SplitFlags dissect_split;
  dissect_cmd->add_option("--features", dissect_features, "Feature csv (s4 layout)")->required();
  dissect_split.attach(dissect_cmd);
  dissect_cmd->add_option("--out", dissect_out, "Report csv path")->capture_default_str();

  // portfolio
  auto* portfolio_cmd =
      app.add_subcommand("portfolio", "Warm/cold-start portfolio AUC report");
  std::string portfolio_features, portfolio_out = "portfolio.csv";
  std::vector<std::string> portfolio_settings_names = {"s1", "s2", "s3", "s4"};
  SplitFlags portfolio_split;
  CombinerFlags portfolio_combiner;
  portfolio_cmd->add_option("--features", portfolio_features, "Feature csv (s4 layout)")
      ->required();
  portfolio_split.attach(portfolio_cmd);
  portfolio_combiner.attach(portfolio_cmd);
  portfolio_cmd->add_option("--settings", portfolio_settings_names, "Settings to evaluate")
      ->delimiter(',')
      ->capture_default_str();
  portfolio_cmd->add_option("--out", portfolio_out, "Report csv path")->capture_default_str();

  // timeline
  auto* timeline_cmd = app.add_subcommand("timeline", "Entity activity buckets over time");
  std::string timeline_events, timeline_kind = "user", timeline_entity,
              timeline_granularity = "monthly", timeline_out = "timeline.csv";
  timeline_cmd->add_option("--events", timeline_events, "Canonical events csv")->required();
  timeline_cmd->add_option("--kind", timeline_kind, "user, product, category or global")
      ->capture_default_str();
  timeline_cmd->add_option("--entity", timeline_entity, "Entity name (ignored for global)");
  timeline_cmd->add_option("--granularity", timeline_granularity, "daily, monthly or yearly")
      ->capture_default_str();
  timeline_cmd->add_option("--out", timeline_out, "Timeline csv path")->capture_default_str();

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic review stream");
  rt::SynthConfig synth_config;
  std::string synth_out = "events.csv";
  std::string synth_start = "2014-01-01", synth_end = "2018-10-31", synth_cold_entry = "2017-01-01";
  synth_cmd->add_option("--users", synth_config.n_users, "Number of users")->capture_default_str();
  synth_cmd->add_option("--products", synth_config.n_products, "Number of products")
      ->capture_default_str();
  synth_cmd->add_option("--categories", synth_config.n_categories, "Number of categories")
      ->capture_default_str();
  synth_cmd->add_option("--events", synth_config.n_events, "Number of events")
      ->capture_default_str();
  synth_cmd->add_option("--user-bias", synth_config.user_bias_weight, "User effect weight [0,1]")
      ->capture_default_str();
  synth_cmd
      ->add_option("--product-bias", synth_config.product_bias_weight,
                   "Product effect weight [0,1]")
      ->capture_default_str();
  synth_cmd->add_option("--trend-min", synth_config.trend_slope_min, "Entity drift per day, low")
      ->capture_default_str();
  synth_cmd->add_option("--trend-max", synth_config.trend_slope_max, "Entity drift per day, high")
      ->capture_default_str();
  synth_cmd->add_option("--noise", synth_config.noise_std, "Latent noise stddev")
      ->capture_default_str();
  synth_cmd
      ->add_option("--cold-fraction", synth_config.cold_start_fraction,
                   "Fraction of entities reserved to first appear at/after the cold entry day")
      ->capture_default_str();
  synth_cmd->add_option("--start", synth_start, "First day (date or index)")
      ->capture_default_str();
  synth_cmd->add_option("--end", synth_end, "Last day (date or index)")->capture_default_str();
  synth_cmd->add_option("--cold-entry", synth_cold_entry, "Cold entities appear at/after this day")
      ->capture_default_str();
  synth_cmd->add_option("--base-mean", synth_config.base_mean, "Latent rating base level")
      ->capture_default_str();
  synth_cmd->add_option("--effect-scale", synth_config.effect_scale,
                        "Entity effects drawn uniform in [-scale, scale]")
      ->capture_default_str();
  synth_cmd->add_option("--skew", synth_config.popularity_skew, "Popularity skew, >= 1")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth_config.seed, "Generator seed")->capture_default_str();
  synth_cmd->add_option("--out", synth_out, "Canonical csv path")->capture_default_str();

  // bench
  auto* bench_cmd =
      app.add_subcommand("bench", "Indexed vs naive window-query wall time");
  rt::BenchConfig bench_config;
  std::string bench_out;
  bench_cmd->add_option("--density", bench_config.events_per_entity_day, "Events per entity-day")
      ->capture_default_str();
  bench_cmd->add_option("--entities", bench_config.n_entities, "Entity count")
      ->capture_default_str();
  bench_cmd->add_option("--days", bench_config.n_days, "Day count")->capture_default_str();
  bench_cmd->add_option("--queries", bench_config.n_queries, "Window query count")
      ->capture_default_str();
  bench_cmd->add_option("--seed", bench_config.seed, "Query sampling seed")
      ->capture_default_str();
  bench_cmd->add_option("--out", bench_out, "Optional csv path for the timing report");

  // run
  auto* run_cmd = app.add_subcommand("run", "Full pipeline: ingest through reports");
  IngestFlags run_ingest_flags;
  run_ingest_flags.attach(run_cmd);
  SplitFlags run_split;
  run_split.attach(run_cmd);
  CombinerFlags run_combiner;
  run_combiner.attach(run_cmd);
  std::vector<std::string> run_windows = {"7d", "30d", "90d", "1y", "3y", "5y", "life"};
  std::vector<std::string> run_settings = {"s1", "s2", "s3", "s4"};
  double run_default_rating = rt::kDefaultRating;
  std::string run_category_filter, run_out_dir = "out";
  bool run_no_train = false, run_per_category = false;
  run_cmd->add_option("--windows", run_windows, "Look-back windows, ascending")
      ->delimiter(',')
      ->capture_default_str();
  run_cmd->add_option("--settings", run_settings, "Feature settings to emit")
      ->delimiter(',')
      ->capture_default_str();
  run_cmd->add_option("--default-rating", run_default_rating,
                      "Value when every fallback level is empty")
      ->capture_default_str();
  run_cmd->add_option("--category-filter", run_category_filter,
                      "Keep only instances of this category");
  run_cmd->add_flag("--no-train", run_no_train, "Skip combiner fits and model-based reports");
  run_cmd->add_flag("--per-category-models", run_per_category,
                    "Also fit per-category models (single vs multi report)");
  run_cmd->add_option("--out-dir", run_out_dir, "Artifact directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (ingest_cmd->parsed()) return run_ingest(ingest_flags, ingest_out);
    if (aggregate_cmd->parsed()) return run_aggregate(aggregate_events, aggregate_out);
    if (features_cmd->parsed())
      return run_features(features_events, features_setting, features_windows,
                          features_default_rating, features_out);
    if (train_cmd->parsed())
      return run_train(train_features, train_split, train_combiner, train_category, train_out);
    if (evaluate_cmd->parsed())
      return run_evaluate(evaluate_features, evaluate_split, evaluate_settings_names,
                          evaluate_combiner, evaluate_per_category, evaluate_out);
    if (portfolio_cmd->parsed())
      return run_portfolio(portfolio_features, portfolio_split, portfolio_settings_names,
                           portfolio_combiner, portfolio_out);
    if (dissect_cmd->parsed()) return run_dissect(dissect_features, dissect_split, dissect_out);
    if (timeline_cmd->parsed())
      return run_timeline(timeline_events, timeline_kind, timeline_entity, timeline_granularity,
                          timeline_out);
    if (synth_cmd->parsed()) {
      synth_config.start_day = require_day(synth_start, "--start");
      synth_config.end_day = require_day(synth_end, "--end");
      synth_config.cold_entry_day = require_day(synth_cold_entry, "--cold-entry");
      return run_synth(synth_config, synth_out);
    }
    if (bench_cmd->parsed()) return run_bench(bench_config, bench_out);
    if (run_cmd->parsed()) {
      rt::PipelineConfig config;
      config.inputs = run_ingest_flags.inputs;
      config.ingest = run_ingest_flags.value();
      config.split = run_split.value();
      config.windows = make_windows(run_windows);
      config.default_rating = run_default_rating;
      config.settings = make_settings(run_settings);
      config.combiner = run_combiner.config;
      config.category_filter = run_category_filter;
      config.train_models = !run_no_train;
      config.per_category_models = run_per_category;
      config.out_dir = run_out_dir;
      return run_full(config);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitValidation;
}
