#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "ratingtree/calendar.hpp"
#include "ratingtree/types.hpp"

namespace ratingtree {

// Deterministic RNG: the mt19937_64 sequence is pinned by the standard, and
// the transforms below avoid std::*_distribution, whose output is
// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [0, n)
  std::int64_t uniform_int(std::int64_t n) {
    auto v = static_cast<std::int64_t>(uniform() * static_cast<double>(n));
    return v >= n ? n - 1 : v;
  }

  // Box-Muller; uses two engine draws per call.
  double normal() {
    const double u1 = static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

// Controls the synthetic review stream. Each event's latent rating is
//   base_mean + user_bias_weight   * (user_effect    + user_trend    * (day - user_start))
//             + product_bias_weight * (product_effect + product_trend * (day - product_start))
//             + noise_std * N(0,1)
// rounded to the nearest star and clamped to [1, 5]. Entity effects are
// zero-mean and bounded so clamping stays rare at default noise.
struct SynthConfig {
  std::int32_t n_users = 200;
  std::int32_t n_products = 200;
  std::int32_t n_categories = 5;
  std::int64_t n_events = 10000;
  double user_bias_weight = 0.5;
  double product_bias_weight = 0.5;
  double trend_slope_min = -0.0005;  // per-day drift of an entity's mean
  double trend_slope_max = 0.0005;
  double noise_std = 0.7;
  double cold_start_fraction = 0.1;
  std::int32_t start_day = day_from_civil(2014, 1, 1);
  std::int32_t end_day = day_from_civil(2018, 10, 31);
  // Reserved cold entities first become active at or after this day.
  std::int32_t cold_entry_day = day_from_civil(2017, 1, 1);
  double base_mean = 3.0;
  double effect_scale = 1.25;    // effects drawn uniform in [-scale, +scale]
  double popularity_skew = 1.0;  // >1 concentrates events on low-id entities
  std::uint64_t seed = 42;
};

namespace detail {

struct SynthEntity {
  std::int32_t start_day = 0;
  double effect = 0.0;
  double trend = 0.0;
  std::int32_t category = 0;  // products only
};

struct EntityPool {
  std::vector<SynthEntity> entities;
  std::vector<std::int32_t> by_start;      // entity ids ordered by start day
  std::vector<std::int32_t> start_sorted;  // matching start days, ascending

  // Entities active on `day`, i.e. start <= day, form a prefix of by_start.
  std::int64_t eligible(std::int32_t day) const {
    return std::upper_bound(start_sorted.begin(), start_sorted.end(), day) -
           start_sorted.begin();
  }
};

inline EntityPool make_pool(std::int32_t n, std::int64_t n_cold, const SynthConfig& cfg,
                            bool with_category, Rng& rng) {
  EntityPool pool;
  pool.entities.resize(static_cast<std::size_t>(n));
  const std::int32_t warm_end =
      n_cold > 0 ? cfg.cold_entry_day - 1 : cfg.end_day;  // warm starts stay before the boundary
  for (std::int32_t i = 0; i < n; ++i) {
    SynthEntity& e = pool.entities[static_cast<std::size_t>(i)];
    const bool cold = i >= n - n_cold;
    if (i == 0 && !cold) {
      e.start_day = cfg.start_day;  // guarantees an eligible entity on every day
    } else if (cold) {
      e.start_day = static_cast<std::int32_t>(
          cfg.cold_entry_day + rng.uniform_int(cfg.end_day - cfg.cold_entry_day + 1));
    } else {
      e.start_day = static_cast<std::int32_t>(
          cfg.start_day + rng.uniform_int(warm_end - cfg.start_day + 1));
    }
    e.effect = rng.uniform(-cfg.effect_scale, cfg.effect_scale);
    e.trend = rng.uniform(cfg.trend_slope_min, cfg.trend_slope_max);
    if (with_category) e.category = static_cast<std::int32_t>(rng.uniform_int(cfg.n_categories));
  }
  pool.by_start.resize(static_cast<std::size_t>(n));
  for (std::int32_t i = 0; i < n; ++i) pool.by_start[static_cast<std::size_t>(i)] = i;
  std::stable_sort(pool.by_start.begin(), pool.by_start.end(),
                   [&](std::int32_t a, std::int32_t b) {
                     return pool.entities[static_cast<std::size_t>(a)].start_day <
                            pool.entities[static_cast<std::size_t>(b)].start_day;
                   });
  pool.start_sorted.reserve(pool.by_start.size());
  for (std::int32_t id : pool.by_start)
    pool.start_sorted.push_back(pool.entities[static_cast<std::size_t>(id)].start_day);
  return pool;
}

inline std::int32_t pick_entity(const EntityPool& pool, std::int32_t day, double skew,
                                Rng& rng) {
  const std::int64_t k = pool.eligible(day);
  double u = rng.uniform();
  if (skew != 1.0) u = std::pow(u, skew);
  auto idx = static_cast<std::int64_t>(u * static_cast<double>(k));
  if (idx >= k) idx = k - 1;
  return pool.by_start[static_cast<std::size_t>(idx)];
}

inline void validate(const SynthConfig& cfg) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("synth config: " + msg); };
  if (cfg.n_users < 1 || cfg.n_products < 1 || cfg.n_categories < 1)
    fail("entity counts must be positive");
  if (cfg.n_events < 1) fail("n_events must be >= 1");
  if (cfg.user_bias_weight < 0 || cfg.user_bias_weight > 1 || cfg.product_bias_weight < 0 ||
      cfg.product_bias_weight > 1)
    fail("bias weights must lie in [0,1]");
  if (cfg.cold_start_fraction < 0 || cfg.cold_start_fraction > 1)
    fail("cold_start_fraction must lie in [0,1]");
  if (cfg.noise_std < 0) fail("noise_std must be >= 0");
  if (cfg.effect_scale < 0) fail("effect_scale must be >= 0");
  if (cfg.trend_slope_min > cfg.trend_slope_max) fail("trend slope range is inverted");
  if (cfg.start_day < 0 || cfg.start_day > cfg.end_day) fail("day range is invalid");
  if (cfg.popularity_skew < 1.0) fail("popularity_skew must be >= 1");
  const auto cold_users = static_cast<std::int64_t>(std::llround(cfg.n_users * cfg.cold_start_fraction));
  const auto cold_products =
      static_cast<std::int64_t>(std::llround(cfg.n_products * cfg.cold_start_fraction));
  if (cold_users >= cfg.n_users || cold_products >= cfg.n_products)
    fail("cold_start_fraction leaves no warm entities to cover the training period");
  if (cfg.cold_start_fraction > 0 &&
      (cfg.cold_entry_day <= cfg.start_day || cfg.cold_entry_day > cfg.end_day))
    fail("cold_entry_day must fall inside (start_day, end_day]");
}

}  // namespace detail

// Deterministic per seed: same config, same stream, bit for bit.
inline EventStream generate_synthetic(const SynthConfig& cfg) {
  detail::validate(cfg);
  Rng rng(cfg.seed);

  const auto cold_users = static_cast<std::int64_t>(std::llround(cfg.n_users * cfg.cold_start_fraction));
  const auto cold_products =
      static_cast<std::int64_t>(std::llround(cfg.n_products * cfg.cold_start_fraction));
  detail::EntityPool users = detail::make_pool(cfg.n_users, cold_users, cfg, false, rng);
  detail::EntityPool products = detail::make_pool(cfg.n_products, cold_products, cfg, true, rng);

  EventStream stream;
  stream.events.reserve(static_cast<std::size_t>(cfg.n_events));
  const std::int64_t n_days = static_cast<std::int64_t>(cfg.end_day) - cfg.start_day + 1;
  for (std::int64_t i = 0; i < cfg.n_events; ++i) {
    const auto day = static_cast<std::int32_t>(cfg.start_day + rng.uniform_int(n_days));
    const std::int32_t u = detail::pick_entity(users, day, cfg.popularity_skew, rng);
    const std::int32_t p = detail::pick_entity(products, day, cfg.popularity_skew, rng);
    const auto& ue = users.entities[static_cast<std::size_t>(u)];
    const auto& pe = products.entities[static_cast<std::size_t>(p)];

    const double latent = cfg.base_mean +
                          cfg.user_bias_weight * (ue.effect + ue.trend * (day - ue.start_day)) +
                          cfg.product_bias_weight * (pe.effect + pe.trend * (day - pe.start_day)) +
                          cfg.noise_std * rng.normal();
    const auto star = static_cast<std::int32_t>(std::clamp<long>(std::lround(latent), 1, 5));

    RatingEvent ev;
    ev.user = stream.users.intern("u" + std::to_string(u));
    ev.product = stream.products.intern("p" + std::to_string(p));
    ev.category = stream.categories.intern("cat" + std::to_string(pe.category));
    ev.rating_milli = star * kRatingScale;
    ev.day = day;
    stream.events.push_back(ev);
  }
  stream.sort_by_day();
  return stream;
}

}  // namespace ratingtree
