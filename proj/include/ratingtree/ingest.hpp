#pragma once

#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ratingtree/calendar.hpp"
#include "ratingtree/csv.hpp"
#include "ratingtree/types.hpp"

namespace ratingtree {

enum class InputFormat { csv, jsonl };

inline std::optional<InputFormat> parse_input_format(std::string_view s) {
  if (s == "csv") return InputFormat::csv;
  if (s == "jsonl") return InputFormat::jsonl;
  return std::nullopt;
}

// What to do with a line that fails to parse: stop the run or count and move on.
enum class ErrorPolicy { abort, skip };

struct IngestOptions {
  InputFormat format = InputFormat::csv;
  ErrorPolicy error_policy = ErrorPolicy::abort;
  bool csv_has_header = false;
  // Fallback category for jsonl records without a "category" field (the
  // upstream corpus ships one file per category, so the source file decides).
  std::string default_category;
};

struct IngestStats {
  std::uint64_t lines = 0;
  std::uint64_t parsed = 0;
  std::uint64_t skipped = 0;
};

class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ParseOutcome {
  std::optional<RatingEvent> event;
  std::string error;
  bool ok() const { return event.has_value(); }
};

namespace detail {

inline ParseOutcome parse_failure(std::string message) {
  return ParseOutcome{std::nullopt, std::move(message)};
}

inline ParseOutcome parse_csv_event(std::string_view line, EventStream& stream) {
  const auto fields = split_csv_fields(line);
  if (fields.size() != 5)
    return parse_failure("expected 5 fields user,product,category,rating,day, got " +
                         std::to_string(fields.size()));
  if (fields[0].empty() || fields[1].empty() || fields[2].empty())
    return parse_failure("empty id field");
  const auto milli = rating_milli_from_text(fields[3]);
  if (!milli) return parse_failure("malformed rating '" + std::string(fields[3]) + "'");
  if (!rating_milli_in_range(*milli))
    return parse_failure("rating out of range [1,5]: " + std::string(fields[3]));
  const auto day = parse_int64(fields[4]);
  if (!day || *day < 0 || *day > INT32_MAX)
    return parse_failure("malformed day '" + std::string(fields[4]) + "'");
  RatingEvent ev;
  ev.user = stream.users.intern(fields[0]);
  ev.product = stream.products.intern(fields[1]);
  ev.category = stream.categories.intern(fields[2]);
  ev.rating_milli = *milli;
  ev.day = static_cast<std::int32_t>(*day);
  return ParseOutcome{ev, {}};
}

inline ParseOutcome parse_jsonl_event(std::string_view line, EventStream& stream,
                                      std::string_view default_category) {
  const auto doc = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) return parse_failure("malformed json");

  const auto* reviewer = doc.contains("reviewerID") && doc["reviewerID"].is_string()
                             ? doc["reviewerID"].get_ptr<const std::string*>()
                             : nullptr;
  if (!reviewer || reviewer->empty()) return parse_failure("missing field reviewerID");
  const auto* asin = doc.contains("asin") && doc["asin"].is_string()
                         ? doc["asin"].get_ptr<const std::string*>()
                         : nullptr;
  if (!asin || asin->empty()) return parse_failure("missing field asin");

  std::string category;
  if (doc.contains("category") && doc["category"].is_string())
    category = doc["category"].get<std::string>();
  else if (!default_category.empty())
    category = std::string(default_category);
  if (category.empty()) return parse_failure("missing field category");

  if (!doc.contains("overall") || !doc["overall"].is_number())
    return parse_failure("missing field overall");
  const auto milli = rating_milli_from_double(doc["overall"].get<double>());
  if (!milli) return parse_failure("malformed rating");
  if (!rating_milli_in_range(*milli)) return parse_failure("rating out of range [1,5]");

  if (!doc.contains("unixReviewTime") || !doc["unixReviewTime"].is_number_integer())
    return parse_failure("missing field unixReviewTime");
  const auto ts = doc["unixReviewTime"].get<std::int64_t>();
  if (ts < 0) return parse_failure("negative timestamp");

  RatingEvent ev;
  ev.user = stream.users.intern(*reviewer);
  ev.product = stream.products.intern(*asin);
  ev.category = stream.categories.intern(category);
  ev.rating_milli = *milli;
  ev.day = day_from_unix_seconds(ts);
  return ParseOutcome{ev, {}};
}

}  // namespace detail

// Parses one record and interns its ids into `stream`. Does not append the
// event; callers decide what to do with it.
inline ParseOutcome parse_event_line(std::string_view line, InputFormat format,
                                     EventStream& stream,
                                     std::string_view default_category = {}) {
  if (format == InputFormat::csv) return detail::parse_csv_event(line, stream);
  return detail::parse_jsonl_event(line, stream, default_category);
}

namespace detail {

inline void ingest_lines(std::istream& in, std::string_view source_name,
                         const IngestOptions& opts, EventStream& stream,
                         IngestStats& stats) {
  std::string line;
  std::uint64_t line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (opts.format == InputFormat::csv && opts.csv_has_header && !saw_header) {
      saw_header = true;
      continue;
    }
    if (line.empty()) continue;
    ++stats.lines;
    auto outcome = parse_event_line(line, opts.format, stream, opts.default_category);
    if (outcome.ok()) {
      stream.events.push_back(*outcome.event);
      ++stats.parsed;
    } else if (opts.error_policy == ErrorPolicy::skip) {
      ++stats.skipped;
    } else {
      throw IngestError(std::string(source_name) + ":" + std::to_string(line_no) + ": " +
                        outcome.error);
    }
  }
}

}  // namespace detail

// Reads every source, then sorts by day with stable tie order. Unreadable
// files abort regardless of the error policy.
inline EventStream build_event_stream(std::span<const std::string> paths,
                                      const IngestOptions& opts,
                                      IngestStats* stats_out = nullptr) {
  EventStream stream;
  IngestStats stats;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open input file: " + path);
    detail::ingest_lines(in, path, opts, stream, stats);
  }
  stream.sort_by_day();
  if (stats_out) *stats_out = stats;
  return stream;
}

// Same pipeline over an in-memory text blob; used by tests and fixtures.
inline EventStream build_event_stream_from_text(std::string_view text,
                                                const IngestOptions& opts,
                                                IngestStats* stats_out = nullptr) {
  EventStream stream;
  IngestStats stats;
  std::istringstream in{std::string(text)};
  detail::ingest_lines(in, "<text>", opts, stream, stats);
  stream.sort_by_day();
  if (stats_out) *stats_out = stats;
  return stream;
}

// Canonical dump: csv sorted by day, the fixture format everything else
// consumes. Re-parsing a dump and dumping again is byte-identical.
inline void write_canonical_csv(const EventStream& stream, std::ostream& out,
                                bool header = true) {
  auto check_name = [](const std::string& name) -> const std::string& {
    if (name.find(',') != std::string::npos || name.find('\n') != std::string::npos)
      throw IngestError("id not representable in canonical csv: " + name);
    return name;
  };
  if (header) out << "user,product,category,rating,day\n";
  for (const auto& ev : stream.events) {
    out << check_name(stream.users.name(ev.user)) << ','
        << check_name(stream.products.name(ev.product)) << ','
        << check_name(stream.categories.name(ev.category)) << ','
        << rating_text(ev.rating_milli) << ',' << ev.day << '\n';
  }
}

inline std::string canonical_csv_string(const EventStream& stream, bool header = true) {
  std::ostringstream out;
  write_canonical_csv(stream, out, header);
  return out.str();
}

inline EventStream load_canonical_csv(const std::string& path,
                                      IngestStats* stats_out = nullptr) {
  IngestOptions opts;
  opts.format = InputFormat::csv;
  opts.csv_has_header = true;
  opts.error_policy = ErrorPolicy::abort;
  const std::string paths[] = {path};
  return build_event_stream(paths, opts, stats_out);
}

}  // namespace ratingtree
