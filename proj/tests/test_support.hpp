#pragma once

// Shared fixtures for the test suite. The D0 stream is the tiny four-review
// dataset every hand-computed expectation below is frozen against.

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include "ratingtree/ingest.hpp"
#include "ratingtree/synth.hpp"
#include "ratingtree/types.hpp"

namespace rtt {

inline constexpr std::string_view kD0Csv =
    "u1,p1,Books,5,100\n"
    "u1,p2,Books,4,105\n"
    "u2,p1,Books,2,106\n"
    "u3,p3,Electronics,4,107\n";

inline ratingtree::EventStream d0_stream() {
  return ratingtree::build_event_stream_from_text(kD0Csv, {});
}

inline std::int32_t uid(const ratingtree::EventStream& s, std::string_view name) {
  return *s.users.find(name);
}
inline std::int32_t pid(const ratingtree::EventStream& s, std::string_view name) {
  return *s.products.find(name);
}
inline std::int32_t cid(const ratingtree::EventStream& s, std::string_view name) {
  return *s.categories.find(name);
}

// Small, dense synthetic stream for property tests.
inline ratingtree::EventStream small_synth_stream(std::uint64_t seed, std::int64_t n_events = 2000) {
  ratingtree::SynthConfig config;
  config.n_users = 40;
  config.n_products = 30;
  config.n_categories = 4;
  config.n_events = n_events;
  config.start_day = 100;
  config.end_day = 700;
  config.cold_entry_day = 500;
  config.cold_start_fraction = 0.2;
  config.seed = seed;
  return ratingtree::generate_synthetic(config);
}

}  // namespace rtt
