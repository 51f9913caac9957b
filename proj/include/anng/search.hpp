#pragma once

// Greedy walks on the alpha-graph with slack, stall detection and random
// restarts.
//
// A tour starts at a uniformly random live vertex p and repeatedly moves to
// a bucket entry p' with <p', q> >= <p, q> + slack. A tour stalls when a full
// scan of the current bucket finds no such entry. In target mode (gamma*
// known) the query stops as soon as the current vertex reaches gamma*;
// otherwise every tour runs to a stall and the best vertex seen is returned.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "anng/error.hpp"
#include "anng/geometry.hpp"
#include "anng/graph.hpp"
#include "anng/random.hpp"
#include "anng/vector.hpp"

namespace anng {

enum class ImprovementRule {
  first,  // adopt the first improving entry, rescan from the new vertex
  best,   // scan the whole bucket, adopt the best improving entry
  sweep,  // keep scanning the original bucket, re-basing on every adoption
};

inline const char* to_string(ImprovementRule r) {
  switch (r) {
    case ImprovementRule::first: return "first";
    case ImprovementRule::best: return "best";
    case ImprovementRule::sweep: return "sweep";
  }
  return "?";
}

inline ImprovementRule parse_rule(const std::string& s) {
  if (s == "first") return ImprovementRule::first;
  if (s == "best") return ImprovementRule::best;
  if (s == "sweep") return ImprovementRule::sweep;
  throw validation_error("unknown improvement rule '" + s + "'");
}

struct QueryConfig {
  std::optional<double> gamma_star;  // absent: exact nearest-neighbour mode
  std::size_t max_restarts = 1;      // total number of tours
  std::optional<double> step_slack;  // default 1/d
  std::optional<std::size_t> max_steps_per_tour;  // default 2d
  std::uint64_t seed = 0;
  ImprovementRule rule = ImprovementRule::first;
  // In target mode, accept an entry reaching gamma* even if it is within the
  // slack of the current vertex.
  bool giant_leap = true;
  bool record_trajectory = false;
  double success_tolerance = 1e-6;

  double slack_for(std::size_t d) const { return step_slack.value_or(1.0 / static_cast<double>(d)); }
  std::size_t steps_for(std::size_t d) const { return max_steps_per_tour.value_or(2 * d); }

  void validate() const {
    detail::require(max_restarts >= 1, "max_restarts must be >= 1");
    detail::require(!step_slack || *step_slack > 0.0, "step_slack must be positive");
    detail::require(!max_steps_per_tour || *max_steps_per_tour >= 1, "max_steps_per_tour must be >= 1");
    detail::require(!gamma_star || (*gamma_star > -1.0 && *gamma_star <= 1.0), "gamma_star out of range");
    detail::require(success_tolerance >= 0.0, "success_tolerance must be nonnegative");
  }
};

struct TourRecord {
  index_t start = kNoIndex;
  index_t end = kNoIndex;
  std::size_t steps = 0;
  std::size_t comparisons = 0;
  bool success = false;
  bool hit_step_cap = false;
  std::vector<double> gammas;  // <p, q> at the start and after every step
};

struct WalkResult {
  index_t returned_index = kNoIndex;
  double returned_gamma = -1.0;
  bool success = false;
  std::size_t restarts_used = 0;  // tours - 1
  std::size_t total_steps = 0;
  std::size_t comparisons = 0;    // bucket entries scanned
  std::vector<double> trajectory_gammas;  // last tour, when recorded

  std::size_t tours() const noexcept { return restarts_used + 1; }
};

namespace detail {

template <class URBG>
index_t random_live_vertex(const AlphaGraph& g, URBG& rng) {
  const std::size_t slots = g.slots();
  std::uniform_int_distribution<std::size_t> pick(0, slots - 1);
  if (g.live_count() * 4 >= slots) {
    for (;;) {
      const auto i = static_cast<index_t>(pick(rng));
      if (g.is_live(i)) return i;
    }
  }
  // Mostly tombstones: pick the k-th live slot directly.
  std::size_t k = std::uniform_int_distribution<std::size_t>(0, g.live_count() - 1)(rng);
  for (std::size_t i = 0; i < slots; ++i)
    if (g.is_live(static_cast<index_t>(i)) && k-- == 0) return static_cast<index_t>(i);
  return kNoIndex;
}

inline void check_query(const AlphaGraph& g, std::span<const double> q, const QueryConfig& cfg) {
  require(g.live_count() > 0, "query on an empty graph");
  require(q.size() == g.dim(), "query dimension does not match graph");
  cfg.validate();
}

template <class URBG>
TourRecord run_tour(const AlphaGraph& g, std::span<const double> q, const QueryConfig& cfg, URBG& rng,
                    bool record) {
  const double slack = cfg.slack_for(g.dim());
  const std::size_t step_cap = cfg.steps_for(g.dim());
  const bool target = cfg.gamma_star.has_value();
  const double goal = target ? *cfg.gamma_star - cfg.success_tolerance : 0.0;
  const bool leap = target && cfg.giant_leap;

  TourRecord t;
  index_t p = random_live_vertex(g, rng);
  double gp = dot(g.point(p), q);
  t.start = p;
  if (record) t.gammas.push_back(gp);

  auto accept = [&](index_t next, double gnext) {
    p = next;
    gp = gnext;
    ++t.steps;
    if (record) t.gammas.push_back(gp);
  };

  for (;;) {
    if (target && gp >= goal) {
      t.success = true;
      break;
    }
    if (t.steps >= step_cap) {
      t.hit_step_cap = true;
      break;
    }
    bool moved = false;
    const auto bucket = g.bucket(p);
    switch (cfg.rule) {
      case ImprovementRule::first: {
        const double need = gp + slack;
        for (index_t j : bucket) {
          ++t.comparisons;
          const double gj = dot(g.point(j), q);
          if (gj >= need || (leap && gj >= goal)) {
            accept(j, gj);
            moved = true;
            break;
          }
        }
        break;
      }
      case ImprovementRule::best: {
        const double need = gp + slack;
        index_t best = kNoIndex;
        double gbest = -2.0;
        for (index_t j : bucket) {
          ++t.comparisons;
          const double gj = dot(g.point(j), q);
          if ((gj >= need || (leap && gj >= goal)) && gj > gbest) {
            best = j;
            gbest = gj;
          }
        }
        if (best != kNoIndex) {
          accept(best, gbest);
          moved = true;
        }
        break;
      }
      case ImprovementRule::sweep: {
        // The bucket span stays valid: the graph is not modified by queries.
        for (index_t j : bucket) {
          ++t.comparisons;
          const double gj = dot(g.point(j), q);
          if (gj >= gp + slack || (leap && gp < goal && gj >= goal)) {
            accept(j, gj);
            moved = true;
            if ((target && gp >= goal) || t.steps >= step_cap) break;
          }
        }
        break;
      }
    }
    if (!moved) break;
  }
  t.end = p;
  if (record && t.gammas.empty()) t.gammas.push_back(gp);
  return t;
}

template <class OnTour>
WalkResult run_query(const AlphaGraph& g, std::span<const double> q, const QueryConfig& cfg, OnTour&& on_tour) {
  check_query(g, q, cfg);
  Engine rng = make_engine(cfg.seed, kQueryStream);
  WalkResult r;
  for (std::size_t k = 0; k < cfg.max_restarts; ++k) {
    TourRecord t = run_tour(g, q, cfg, rng, cfg.record_trajectory);
    r.restarts_used = k;
    r.total_steps += t.steps;
    r.comparisons += t.comparisons;
    const double gend = dot(g.point(t.end), q);
    if (r.returned_index == kNoIndex || gend > r.returned_gamma) {
      r.returned_index = t.end;
      r.returned_gamma = gend;
    }
    if (cfg.record_trajectory) r.trajectory_gammas = t.gammas;
    const bool done = t.success;
    if (done) {
      r.returned_index = t.end;
      r.returned_gamma = gend;
      r.success = true;
    }
    on_tour(std::move(t));
    if (done) break;
  }
  return r;
}

}  // namespace detail

/// Greedy walk with restarts.
inline WalkResult query(const AlphaGraph& g, std::span<const double> q, const QueryConfig& cfg) {
  return detail::run_query(g, q, cfg, [](TourRecord&&) {});
}

inline WalkResult query(const AlphaGraph& g, const UnitVector& q, const QueryConfig& cfg) {
  return query(g, q.coords(), cfg);
}

/// Same walk as query(), returning the per-tour trajectories.
inline std::vector<TourRecord> tour_gamma_profile(const AlphaGraph& g, std::span<const double> q,
                                                  QueryConfig cfg) {
  cfg.record_trajectory = true;
  std::vector<TourRecord> tours;
  detail::run_query(g, q, cfg, [&](TourRecord&& t) { tours.push_back(std::move(t)); });
  return tours;
}

struct NearestNeighbor {
  index_t index = kNoIndex;
  double gamma = -2.0;
};

/// Exact maximum inner product over live vertices (lowest index on ties).
inline NearestNeighbor brute_force_nn(const AlphaGraph& g, std::span<const double> q) {
  NearestNeighbor best;
  for (std::size_t i = 0; i < g.slots(); ++i) {
    const auto v = static_cast<index_t>(i);
    if (!g.is_live(v)) continue;
    const double x = dot(g.point(v), q);
    if (x > best.gamma) best = {v, x};
  }
  return best;
}

struct RateInterval {
  double rate = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Wilson score interval at confidence level `level`.
inline RateInterval wilson_interval(std::size_t successes, std::size_t trials, double level = 0.95) {
  detail::require(successes <= trials, "more successes than trials");
  if (trials == 0) return {0.0, 0.0, 1.0};
  const double z = boost::math::quantile(boost::math::normal(), 0.5 + 0.5 * level);
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
  return {p, std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

struct PlantedQuery {
  UnitVector query;
  double gamma_star = 0.0;
};

struct SuccessEstimate {
  std::size_t queries = 0;
  std::size_t successes = 0;
  std::size_t tours = 0;
  RateInterval per_query;
  RateInterval per_tour;
  double mean_comparisons = 0.0;
};

/// Per-query and per-tour success rates over target-mode queries. Query k
/// uses seed derive_seed(cfg.seed, k) and its own gamma*.
inline SuccessEstimate estimate_success_rate(const AlphaGraph& g, std::span<const PlantedQuery> queries,
                                             const QueryConfig& cfg) {
  detail::require(!queries.empty(), "need at least one query");
  SuccessEstimate e;
  double comps = 0.0;
  for (std::size_t k = 0; k < queries.size(); ++k) {
    QueryConfig c = cfg;
    c.gamma_star = queries[k].gamma_star;
    c.seed = derive_seed(cfg.seed, k);
    const WalkResult r = query(g, queries[k].query, c);
    ++e.queries;
    e.successes += r.success ? 1 : 0;
    e.tours += r.tours();
    comps += static_cast<double>(r.comparisons);
  }
  e.per_query = wilson_interval(e.successes, e.queries);
  e.per_tour = wilson_interval(e.successes, e.tours);
  e.mean_comparisons = comps / static_cast<double>(e.queries);
  return e;
}

/// Leading-order per-tour success estimate W(alpha, gamma*, gamma_max) / C(gamma*)
/// at mu = mu_of(n, d), clamped to (0, 1].
inline double analytic_tour_success(std::size_t n, std::size_t d, double alpha, double gamma_star) {
  const double mu = mu_of(static_cast<double>(n), static_cast<int>(d));
  if (!(alpha < mu)) return 0.0;
  const double gm = gamma_max(mu, alpha);
  const int dd = static_cast<int>(d);
  try {
    const double wb = wedge_log_volume({alpha, gamma_star, gm, dd}).bits_per_dim;
    const double cb = cap_log_volume({gamma_star, dd}).bits_per_dim;
    return std::min(1.0, std::exp2(dd * (wb - cb)));
  } catch (const domain_error&) {
    return 0.0;
  }
}

/// ceil(4 / r) tours for analytic tour success r, capped at `cap`.
inline std::size_t default_max_restarts(std::size_t n, std::size_t d, double alpha, double gamma_star,
                                        std::size_t cap = 1'000'000) {
  const double r = analytic_tour_success(n, d, alpha, gamma_star);
  if (r <= 0.0) return cap;
  const double k = std::ceil(4.0 / r);
  return k >= static_cast<double>(cap) ? cap : std::max<std::size_t>(1, static_cast<std::size_t>(k));
}

}  // namespace anng
