#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ratingtree/aggregate.hpp"
#include "ratingtree/combiner.hpp"
#include "ratingtree/digest.hpp"
#include "ratingtree/eval.hpp"
#include "ratingtree/ingest.hpp"
#include "ratingtree/reference.hpp"
#include "ratingtree/synth.hpp"
#include "ratingtree/trees.hpp"

namespace ratingtree {

// ---------------------------------------------------------------------------
// feature files: the instance-level modeling data
// ---------------------------------------------------------------------------

inline std::pair<std::size_t, std::size_t> setting_column_range(Setting setting,
                                                                std::size_t n_windows) {
  switch (setting) {
    case Setting::s1: return {0, n_windows};
    case Setting::s2: return {n_windows, n_windows};
    case Setting::s3: return {2 * n_windows, n_windows};
    case Setting::s4: return {0, 3 * n_windows};
  }
  return {0, 0};
}

inline std::uint64_t write_feature_csv(const EventStream& stream,
                                       const std::vector<LabeledInstance>& instances,
                                       Setting setting,
                                       std::span<const LookbackWindow> windows,
                                       std::ostream& out) {
  out << "user,product,category,day,label";
  for (const auto& col : feature_column_names(setting, windows)) out << ',' << col;
  out << ",user_cold,product_cold\n";
  const auto [offset, n_cols] = setting_column_range(setting, windows.size());
  for (const auto& inst : instances) {
    out << stream.users.name(inst.user) << ',' << stream.products.name(inst.product) << ','
        << stream.categories.name(inst.category) << ',' << inst.day << ',' << inst.label;
    for (std::size_t j = 0; j < n_cols; ++j)
      out << ',' << format_double(inst.tree_values[offset + j]);
    out << ',' << (inst.user_cold ? 1 : 0) << ',' << (inst.product_cold ? 1 : 0) << '\n';
  }
  return instances.size();
}

class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A feature csv read back: instances carry the file's feature block in
// tree_values, and the split tag is recomputed from the day column.
struct FeatureTable {
  Setting setting = Setting::s4;
  std::size_t n_windows = 0;
  std::vector<std::string> feature_columns;
  std::vector<LabeledInstance> instances;
  Interner users, products, categories;
};

inline FeatureTable read_feature_csv(const std::string& path, const SplitConfig& split) {
  std::ifstream in(path);
  if (!in) throw PipelineError("cannot open features file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw PipelineError("empty features file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_fields(line);
  if (header.size() < 8 || header[0] != "user" || header[1] != "product" ||
      header[2] != "category" || header[3] != "day" || header[4] != "label" ||
      header[header.size() - 2] != "user_cold" || header.back() != "product_cold")
    throw PipelineError("unrecognized feature csv header in " + path);

  FeatureTable table;
  std::size_t pt1 = 0, pt2 = 0, ut = 0;
  for (std::size_t i = 5; i + 2 < header.size(); ++i) {
    const std::string col(header[i]);
    table.feature_columns.push_back(col);
    if (col.rfind("pt1_", 0) == 0) ++pt1;
    else if (col.rfind("pt2_", 0) == 0) ++pt2;
    else if (col.rfind("ut_", 0) == 0) ++ut;
    else throw PipelineError("unknown feature column '" + col + "' in " + path);
  }
  if (pt2 == 0 && ut == 0) { table.setting = Setting::s1; table.n_windows = pt1; }
  else if (pt1 == 0 && ut == 0) { table.setting = Setting::s2; table.n_windows = pt2; }
  else if (pt1 == 0 && pt2 == 0) { table.setting = Setting::s3; table.n_windows = ut; }
  else if (pt1 == pt2 && pt2 == ut) { table.setting = Setting::s4; table.n_windows = pt1; }
  else throw PipelineError("feature columns do not form a known setting in " + path);

  const std::size_t n_cols = table.feature_columns.size();
  std::uint64_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_fields(line);
    if (fields.size() != n_cols + 7)
      throw PipelineError(path + ":" + std::to_string(line_no) + ": wrong column count");
    LabeledInstance inst;
    inst.user = table.users.intern(fields[0]);
    inst.product = table.products.intern(fields[1]);
    inst.category = table.categories.intern(fields[2]);
    const auto day = parse_int64(fields[3]);
    const auto label = parse_int64(fields[4]);
    if (!day || *day < 0 || !label || (*label != 0 && *label != 1))
      throw PipelineError(path + ":" + std::to_string(line_no) + ": bad day/label");
    inst.day = static_cast<std::int32_t>(*day);
    inst.label = static_cast<int>(*label);
    inst.split = classify_day(inst.day, split);
    inst.tree_values.reserve(n_cols);
    for (std::size_t j = 0; j < n_cols; ++j) {
      const auto v = parse_double(fields[5 + j]);
      if (!v) throw PipelineError(path + ":" + std::to_string(line_no) + ": bad feature value");
      inst.tree_values.push_back(*v);
    }
    const auto uc = parse_int64(fields[5 + n_cols]);
    const auto pc = parse_int64(fields[6 + n_cols]);
    if (!uc || !pc) throw PipelineError(path + ":" + std::to_string(line_no) + ": bad cold flag");
    inst.user_cold = *uc != 0;
    inst.product_cold = *pc != 0;
    table.instances.push_back(std::move(inst));
  }
  return table;
}

// ---------------------------------------------------------------------------
// datasets and the per-setting evaluation flow
// ---------------------------------------------------------------------------

inline Dataset make_dataset(const std::vector<LabeledInstance>& instances, Split split,
                            std::size_t col_offset, std::size_t n_cols,
                            std::int32_t category_filter = -1) {
  Dataset data;
  data.n_features = n_cols;
  for (const auto& inst : instances) {
    if (inst.split != split) continue;
    if (category_filter >= 0 && inst.category != category_filter) continue;
    data.add_row(std::span<const double>(inst.tree_values).subspan(col_offset, n_cols),
                 inst.label);
  }
  return data;
}

struct EvaluationOutput {
  std::map<Setting, LinearModel> models;
  std::map<Setting, std::vector<double>> test_scores;  // aligned with test instances
  EvalReport reports;
  std::vector<std::string> excluded_categories;
};

// Fits one combiner per setting on the train split (early stopping on valid),
// scores the test split, and assembles the portfolio and per-category
// reports. With per_category_models, additionally fits one model per
// category per setting and reports single-vs-multi AUC side by side.
inline EvaluationOutput evaluate_settings(const std::vector<LabeledInstance>& instances,
                                          const Interner& categories,
                                          std::span<const Setting> settings,
                                          std::size_t n_windows, const CombinerConfig& config,
                                          bool per_category_models = false) {
  EvaluationOutput out;
  const auto test_instances = filter_split(instances, Split::test);

  for (const Setting setting : settings) {
    const auto [offset, n_cols] = setting_column_range(setting, n_windows);
    const Dataset train = make_dataset(instances, Split::train, offset, n_cols);
    const Dataset valid = make_dataset(instances, Split::valid, offset, n_cols);
    LinearModel model = fit(train, valid, config);
    model.setting = std::string(setting_name(setting));
    std::vector<double> scores;
    scores.reserve(test_instances.size());
    for (const auto* inst : test_instances)
      scores.push_back(predict_proba(
          model, std::span<const double>(inst->tree_values).subspan(offset, n_cols)));
    out.models.emplace(setting, std::move(model));
    out.test_scores.emplace(setting, std::move(scores));
  }

  out.reports.merge(per_category_report(out.test_scores, test_instances, categories,
                                        &out.excluded_categories));
  out.reports.merge(portfolio_report(out.test_scores, test_instances));

  if (per_category_models) {
    for (const Setting setting : settings) {
      const auto [offset, n_cols] = setting_column_range(setting, n_windows);
      const auto& single_scores = out.test_scores.at(setting);
      for (std::int32_t cat = 0; cat < categories.size(); ++cat) {
        std::vector<double> cat_single, cat_multi;
        std::vector<int> cat_labels;
        std::vector<const LabeledInstance*> cat_test;
        for (std::size_t i = 0; i < test_instances.size(); ++i) {
          if (test_instances[i]->category != cat) continue;
          cat_test.push_back(test_instances[i]);
          cat_single.push_back(single_scores[i]);
          cat_labels.push_back(test_instances[i]->label);
        }
        out.reports.cells.push_back(detail::make_auc_cell(
            "single_vs_multi", std::string(setting_name(setting)) + "_single",
            categories.name(cat), cat_single, cat_labels));

        EvalCell multi_cell;
        multi_cell.report = "single_vs_multi";
        multi_cell.setting = std::string(setting_name(setting)) + "_multi";
        multi_cell.segment = categories.name(cat);
        for (int y : cat_labels) (y == 1 ? multi_cell.n_pos : multi_cell.n_neg)++;
        const Dataset cat_train = make_dataset(instances, Split::train, offset, n_cols, cat);
        std::int64_t pos = 0;
        for (int y : cat_train.labels) pos += y;
        if (pos > 0 && pos < static_cast<std::int64_t>(cat_train.size())) {
          const Dataset cat_valid = make_dataset(instances, Split::valid, offset, n_cols, cat);
          LinearModel model = fit(cat_train, cat_valid, config);
          model.setting = std::string(setting_name(setting));
          model.category_filter = categories.name(cat);
          for (const auto* inst : cat_test)
            cat_multi.push_back(predict_proba(
                model, std::span<const double>(inst->tree_values).subspan(offset, n_cols)));
          multi_cell.value = compute_auc(cat_multi, cat_labels);
        }
        out.reports.cells.push_back(std::move(multi_cell));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// full pipeline
// ---------------------------------------------------------------------------

struct PipelineConfig {
  std::vector<std::string> inputs;
  IngestOptions ingest;
  SplitConfig split;
  std::vector<LookbackWindow> windows = default_window_list();
  double default_rating = kDefaultRating;
  std::vector<Setting> settings = {Setting::s1, Setting::s2, Setting::s3, Setting::s4};
  CombinerConfig combiner;
  std::string category_filter;  // restrict modeling data to one category
  bool train_models = true;
  bool per_category_models = false;
  std::string out_dir = "out";
};

inline std::vector<std::string> validate_pipeline_config(const PipelineConfig& config) {
  std::vector<std::string> problems;
  if (config.inputs.empty()) problems.push_back("no input files configured");
  for (const auto& path : config.inputs)
    if (!std::filesystem::exists(path)) problems.push_back("input does not exist: " + path);
  if (!config.split.valid())
    problems.push_back("split boundaries must satisfy valid_start < test_start <= test_end");
  if (!valid_window_list(config.windows))
    problems.push_back("window list must be non-empty, ascending, lifespan last");
  if (config.settings.empty()) problems.push_back("no settings configured");
  if (config.default_rating < 1.0 || config.default_rating > 5.0)
    problems.push_back("default rating must lie in [1,5]");
  if (config.combiner.learning_rate <= 0) problems.push_back("learning rate must be positive");
  if (config.combiner.max_epochs < 1) problems.push_back("max epochs must be >= 1");
  if (config.combiner.l2 < 0) problems.push_back("l2 must be >= 0");
  if (config.out_dir.empty()) problems.push_back("output directory not set");
  return problems;
}

struct ArtifactEntry {
  std::string path;  // relative to the output directory
  std::uint64_t rows = 0;
  std::string digest;
};

enum class PipelineStatus { ok = 0, validation_error = 1, runtime_failure = 2, partial = 3 };

struct PipelineResult {
  PipelineStatus status = PipelineStatus::ok;
  std::vector<std::string> validation_errors;
  std::string failed_stage;
  std::string error;
  std::vector<ArtifactEntry> artifacts;
  std::string manifest_path;
  IngestStats ingest_stats;
  SplitCounts split_counts;
};

namespace detail {

class ArtifactWriter {
 public:
  ArtifactWriter(std::filesystem::path dir, std::vector<ArtifactEntry>& entries)
      : dir_(std::move(dir)), entries_(entries) {}

  template <typename Fn>
  void write(const std::string& name, Fn&& fn) {
    const auto full = dir_ / name;
    std::uint64_t rows = 0;
    {
      std::ofstream out(full, std::ios::binary);
      if (!out) throw PipelineError("cannot write artifact: " + full.string());
      rows = fn(out);
      if (!out) throw PipelineError("write failed: " + full.string());
    }
    entries_.push_back(ArtifactEntry{name, rows, digest_file(full.string())});
  }

 private:
  std::filesystem::path dir_;
  std::vector<ArtifactEntry>& entries_;
};

inline nlohmann::ordered_json manifest_json(const PipelineResult& result, bool complete) {
  nlohmann::ordered_json doc;
  doc["format"] = "ratingtree-manifest-v1";
  doc["complete"] = complete;
  auto& list = doc["artifacts"] = nlohmann::ordered_json::array();
  for (const auto& a : result.artifacts)
    list.push_back({{"path", a.path}, {"rows", a.rows}, {"digest", a.digest}});
  return doc;
}

inline void write_manifest(const std::filesystem::path& dir, PipelineResult& result,
                           bool complete) {
  const auto path = dir / "manifest.json";
  std::ofstream out(path, std::ios::binary);
  out << manifest_json(result, complete).dump(2) << '\n';
  result.manifest_path = path.string();
}

}  // namespace detail

// ingest -> daily aggregation -> window index -> features per setting ->
// combiner fits -> reports; every artifact lands in out_dir and is listed in
// manifest.json with a content digest. Identical config + inputs reproduce
// identical bytes.
inline PipelineResult run_pipeline(const PipelineConfig& config) {
  PipelineResult result;
  result.validation_errors = validate_pipeline_config(config);
  if (!result.validation_errors.empty()) {
    result.status = PipelineStatus::validation_error;
    return result;
  }

  const std::filesystem::path out_dir(config.out_dir);
  std::filesystem::create_directories(out_dir);
  detail::ArtifactWriter writer(out_dir, result.artifacts);

  std::string stage;
  try {
    stage = "ingest";
    EventStream stream = build_event_stream(config.inputs, config.ingest, &result.ingest_stats);
    writer.write("events.csv", [&](std::ostream& out) {
      write_canonical_csv(stream, out);
      return stream.events.size();
    });

    stage = "aggregate";
    const auto aggregates = build_daily_aggregates(stream);
    writer.write("aggregates.csv", [&](std::ostream& out) {
      write_aggregate_csv(aggregates, stream, out);
      return aggregates.size();
    });
    const PrefixIndex index = PrefixIndex::build(aggregates);

    stage = "features";
    auto instances = build_labeled_instances(stream, index, config.split, config.windows,
                                             config.default_rating);
    if (!config.category_filter.empty()) {
      const auto cat = stream.categories.find(config.category_filter);
      if (!cat) throw PipelineError("category filter matches nothing: " + config.category_filter);
      std::vector<LabeledInstance> kept;
      for (auto& inst : instances)
        if (inst.category == *cat) kept.push_back(std::move(inst));
      instances = std::move(kept);
    }
    for (const auto& inst : instances) {
      switch (inst.split) {
        case Split::train: ++result.split_counts.train; break;
        case Split::valid: ++result.split_counts.valid; break;
        case Split::test: ++result.split_counts.test; break;
        case Split::dropped: ++result.split_counts.dropped; break;
      }
    }
    for (const Setting setting : config.settings) {
      writer.write("features_" + std::string(setting_name(setting)) + ".csv",
                   [&](std::ostream& out) {
                     return write_feature_csv(stream, instances, setting, config.windows, out);
                   });
    }

    EvalReport reports;
    std::vector<std::string> excluded;
    const auto test_instances = filter_split(instances, Split::test);
    reports.merge(dissection_report(test_instances, config.windows));

    std::optional<EvaluationOutput> evaluation;
    if (config.train_models) {
      stage = "train";
      evaluation = evaluate_settings(instances, stream.categories, config.settings,
                                     config.windows.size(), config.combiner,
                                     config.per_category_models);
      for (const auto& [setting, model] : evaluation->models) {
        writer.write("model_" + std::string(setting_name(setting)) + ".txt",
                     [&](std::ostream& out) {
                       save_model(model, out);
                       return model.weights.size();
                     });
      }
      excluded = evaluation->excluded_categories;
    }

    stage = "evaluate";
    if (evaluation) reports.merge(std::move(evaluation->reports));
    writer.write("reports.csv", [&](std::ostream& out) {
      reports.write_csv(out);
      return reports.cells.size();
    });

    writer.write("summary.json", [&](std::ostream& out) {
      nlohmann::ordered_json doc;
      doc["format"] = "ratingtree-summary-v1";
      doc["split"] = {{"valid_start_day", config.split.valid_start_day},
                      {"test_start_day", config.split.test_start_day},
                      {"test_end_day", config.split.test_end_day}};
      doc["instances"] = {{"train", result.split_counts.train},
                          {"valid", result.split_counts.valid},
                          {"test", result.split_counts.test},
                          {"dropped", result.split_counts.dropped}};
      auto& windows = doc["windows"] = nlohmann::ordered_json::array();
      for (const auto w : config.windows) windows.push_back(window_label(w));
      auto& settings = doc["settings"] = nlohmann::ordered_json::array();
      for (const auto s : config.settings) settings.push_back(std::string(setting_name(s)));
      if (evaluation) {
        auto& models = doc["models"] = nlohmann::ordered_json::object();
        for (const auto& [setting, model] : evaluation->models)
          models[std::string(setting_name(setting))] = {{"epochs", model.epochs_run},
                                                        {"n_train", model.n_train}};
      }
      auto& cells = doc["reports"] = nlohmann::ordered_json::array();
      for (const auto& c : reports.cells) {
        nlohmann::ordered_json cell = {{"report", c.report},
                                       {"setting", c.setting},
                                       {"segment", c.segment},
                                       {"auc", nullptr},
                                       {"n_pos", c.n_pos},
                                       {"n_neg", c.n_neg}};
        if (c.value) cell["auc"] = *c.value;
        cells.push_back(std::move(cell));
      }
      doc["excluded_categories"] = excluded;
      out << doc.dump(2) << '\n';
      return reports.cells.size();
    });
  } catch (const std::exception& e) {
    result.failed_stage = stage;
    result.error = e.what();
    result.status =
        result.artifacts.empty() ? PipelineStatus::runtime_failure : PipelineStatus::partial;
    detail::write_manifest(out_dir, result, /*complete=*/false);
    return result;
  }

  detail::write_manifest(out_dir, result, /*complete=*/true);
  result.status = PipelineStatus::ok;
  return result;
}

// ---------------------------------------------------------------------------
// aggregation benchmark: indexed vs naive window queries
// ---------------------------------------------------------------------------

struct BenchConfig {
  std::int32_t events_per_entity_day = 50;
  std::int32_t n_entities = 100;
  std::int32_t n_days = 365;
  std::int32_t n_queries = 1000;
  std::uint64_t seed = 1;
};

struct BenchReport {
  std::uint64_t n_events = 0;
  std::int32_t n_queries = 0;
  double indexed_seconds = 0.0;  // includes daily aggregation + index build
  double naive_seconds = 0.0;
  double speedup = 0.0;
  bool checksums_match = false;
};

inline BenchReport bench_aggregation(const BenchConfig& config) {
  if (config.events_per_entity_day < 1 || config.n_entities < 1 || config.n_days < 1 ||
      config.n_queries < 1)
    throw std::invalid_argument("bench config values must be positive");

  EventStream stream;
  for (std::int32_t e = 0; e < config.n_entities; ++e)
    stream.users.intern("u" + std::to_string(e));
  const std::int32_t product = stream.products.intern("p0");
  const std::int32_t category = stream.categories.intern("cat0");
  stream.events.reserve(static_cast<std::size_t>(config.events_per_entity_day) *
                        static_cast<std::size_t>(config.n_entities) *
                        static_cast<std::size_t>(config.n_days));
  for (std::int32_t day = 0; day < config.n_days; ++day)
    for (std::int32_t e = 0; e < config.n_entities; ++e)
      for (std::int32_t k = 0; k < config.events_per_entity_day; ++k) {
        RatingEvent ev;
        ev.user = e;
        ev.product = product;
        ev.category = category;
        ev.rating_milli = (1 + (day + e + k) % 5) * kRatingScale;
        ev.day = day;
        stream.events.push_back(ev);
      }

  struct Query {
    std::int32_t entity;
    std::int32_t t;
    LookbackWindow w;
  };
  Rng rng(config.seed);
  std::vector<Query> queries;
  queries.reserve(static_cast<std::size_t>(config.n_queries));
  for (std::int32_t q = 0; q < config.n_queries; ++q) {
    Query query;
    query.entity = static_cast<std::int32_t>(rng.uniform_int(config.n_entities));
    query.t = static_cast<std::int32_t>(1 + rng.uniform_int(config.n_days));
    query.w = kDefaultWindows[static_cast<std::size_t>(rng.uniform_int(kDefaultWindows.size()))];
    queries.push_back(query);
  }

  auto mix = [](std::uint64_t h, const WindowStats& s) {
    h = h * 1099511628211ull + static_cast<std::uint64_t>(s.count);
    h = h * 1099511628211ull + static_cast<std::uint64_t>(s.sum_milli);
    return h;
  };
  using clock = std::chrono::steady_clock;

  BenchReport report;
  report.n_events = stream.events.size();
  report.n_queries = config.n_queries;

  std::uint64_t checksum_indexed = 14695981039346656037ull;
  const auto t0 = clock::now();
  const auto aggregates = build_daily_aggregates(stream);
  const PrefixIndex index = PrefixIndex::build(aggregates);
  for (const auto& q : queries)
    checksum_indexed = mix(checksum_indexed, index.window(EntityKind::user, q.entity, q.t, q.w));
  const auto t1 = clock::now();

  std::uint64_t checksum_naive = 14695981039346656037ull;
  for (const auto& q : queries)
    checksum_naive =
        mix(checksum_naive, naive_window_stats(stream, EntityKind::user, q.entity, q.t, q.w));
  const auto t2 = clock::now();

  report.indexed_seconds = std::chrono::duration<double>(t1 - t0).count();
  report.naive_seconds = std::chrono::duration<double>(t2 - t1).count();
  report.speedup =
      report.indexed_seconds > 0 ? report.naive_seconds / report.indexed_seconds : 0.0;
  report.checksums_match = checksum_indexed == checksum_naive;
  return report;
}

inline void write_bench_csv(const BenchConfig& config, const BenchReport& report,
                            std::ostream& out) {
  out << "events_per_entity_day,n_entities,n_days,n_queries,n_events,"
         "indexed_seconds,naive_seconds,speedup,checksums_match\n";
  out << config.events_per_entity_day << ',' << config.n_entities << ',' << config.n_days << ','
      << report.n_queries << ',' << report.n_events << ','
      << format_double(report.indexed_seconds) << ',' << format_double(report.naive_seconds)
      << ',' << format_double(report.speedup) << ',' << (report.checksums_match ? 1 : 0)
      << '\n';
}

}  // namespace ratingtree
