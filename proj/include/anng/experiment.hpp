#pragma once

// Experiment orchestration: parameter grids, per-trial seeds, worker
// threads, JSON-lines trial records and CSV summaries.
//
// Trial k of the whole grid (counting cell by cell) uses seed
// master ^ k. Work is split into units (one graph each) that run on any
// worker; results are merged in unit order, so summaries do not depend on
// the thread count. Wall-clock time appears only in the JSON-lines records.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "anng/error.hpp"
#include "anng/geometry.hpp"
#include "anng/graph.hpp"
#include "anng/instance.hpp"
#include "anng/random.hpp"
#include "anng/search.hpp"
#include "anng/tradeoffs.hpp"
#include "anng/vector.hpp"

namespace anng {

// ------------------------------------------------------------ fitting ----

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double ci_lo = 0.0;  // 95% confidence interval on the slope
  double ci_hi = 0.0;
  std::size_t points = 0;
};

/// OLS of log2(measured) on log2(n).
inline FitResult fit_exponent(const std::vector<std::pair<double, double>>& points) {
  detail::require(points.size() >= 3, "exponent fit needs at least 3 points");
  std::vector<double> x, y;
  for (auto [n, m] : points) {
    detail::require(n > 0.0 && m > 0.0, "exponent fit needs positive n and measurements");
    x.push_back(std::log2(n));
    y.push_back(std::log2(m));
  }
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j)
      detail::require(x[i] != x[j], "exponent fit needs distinct n values");
  const double k = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= k;
  my /= k;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  FitResult f;
  f.points = x.size();
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    sse += r * r;
  }
  const double dof = k - 2.0;
  f.slope_se = std::sqrt(sse / dof / sxx);
  const double t = boost::math::quantile(boost::math::students_t(dof), 0.975);
  f.ci_lo = f.slope - t * f.slope_se;
  f.ci_hi = f.slope + t * f.slope_se;
  return f;
}

// --------------------------------------------------------------- spec ----

enum class ExperimentKind {
  success_sweep,
  exponent_fit,
  gamma_profile,
  bucket_stats,
  sieve_curve,
  tradeoff_table,
  adversarial_demo,
};

inline const char* to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::success_sweep: return "success_sweep";
    case ExperimentKind::exponent_fit: return "exponent_fit";
    case ExperimentKind::gamma_profile: return "gamma_profile";
    case ExperimentKind::bucket_stats: return "bucket_stats";
    case ExperimentKind::sieve_curve: return "sieve_curve";
    case ExperimentKind::tradeoff_table: return "tradeoff_table";
    case ExperimentKind::adversarial_demo: return "adversarial_demo";
  }
  return "?";
}

inline ExperimentKind parse_kind(const std::string& s) {
  for (auto k : {ExperimentKind::success_sweep, ExperimentKind::exponent_fit, ExperimentKind::gamma_profile,
                 ExperimentKind::bucket_stats, ExperimentKind::sieve_curve, ExperimentKind::tradeoff_table,
                 ExperimentKind::adversarial_demo})
    if (s == to_string(k)) return k;
  throw validation_error("unknown experiment kind '" + s + "'");
}

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::success_sweep;
  std::vector<std::size_t> n_values;
  std::size_t dim = 48;
  std::optional<double> c;
  std::optional<double> gamma_star;
  std::vector<double> kappas;  // alpha = kappa * mu_of(n, d)
  std::vector<double> alphas;  // absolute alpha; used when kappas is empty
  std::vector<std::size_t> restarts{0};  // 0: default_max_restarts
  std::size_t restart_cap = 100'000;
  std::size_t trials = 200;
  // Trials sharing one base graph; each trial replaces a random slot by its
  // planted point and restores it afterwards. 1: a fresh instance per trial.
  std::size_t trials_per_graph = 1;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  ImprovementRule rule = ImprovementRule::first;
  bool giant_leap = true;
  double adversarial_eps = kDefaultAdversarialEps;
  double sieve_step = 1e-4;
  std::vector<double> c_grid;      // tradeoff_table
  std::vector<double> rho_s_grid;  // tradeoff_table
  std::filesystem::path output;    // prefix for <out>.jsonl, <out>_summary.csv, <out>_fit.csv

  bool analytic() const { return kind == ExperimentKind::sieve_curve || kind == ExperimentKind::tradeoff_table; }
  bool needs_target() const {
    return kind == ExperimentKind::success_sweep || kind == ExperimentKind::exponent_fit;
  }

  double resolved_gamma_star() const {
    detail::require(c.has_value() != gamma_star.has_value(), "give exactly one of c and gamma_star");
    const double g = c ? gamma_star_of_c(*c) : *gamma_star;
    detail::require(g > 0.0 && g < 1.0, "gamma_star must lie in (0, 1)");
    return g;
  }

  void validate() const {
    if (kind == ExperimentKind::tradeoff_table) {
      detail::require(!c_grid.empty() && !rho_s_grid.empty(), "tradeoff_table needs c and rho_s grids");
      return;
    }
    if (kind == ExperimentKind::sieve_curve) {
      detail::require(sieve_step > 0.0 && sieve_step < 0.5, "sieve step must lie in (0, 0.5)");
      return;
    }
    detail::require(!n_values.empty(), "grid needs at least one n");
    for (auto n : n_values) detail::require(n >= 2, "every n must be >= 2");
    detail::require(dim >= 2, "d must be >= 2");
    detail::require(trials >= 1, "trials must be >= 1");
    detail::require(trials_per_graph >= 1, "trials_per_graph must be >= 1");
    detail::require(!kappas.empty() || !alphas.empty(), "grid needs kappa or alpha values");
    for (double k : kappas) detail::require(k > 0.0 && std::isfinite(k), "kappa must be positive");
    for (double a : alphas) detail::require(a > 0.0 && a < 1.0, "alpha must lie in (0, 1)");
    detail::require(!restarts.empty(), "grid needs at least one restart budget");
    if (needs_target()) (void)resolved_gamma_star();
    if (kind == ExperimentKind::adversarial_demo) detail::require(adversarial_eps > 0.0, "eps must be positive");
    if (kind == ExperimentKind::exponent_fit) detail::require(n_values.size() >= 3, "exponent_fit needs >= 3 n values");
  }
};

// ------------------------------------------------------------ records ----

struct TrialRecord {
  std::size_t cell = 0;
  std::size_t trial = 0;  // within the cell
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::size_t d = 0;
  double alpha = 0.0;
  double kappa = 0.0;  // alpha / mu
  std::optional<double> gamma_star;
  std::size_t max_restarts = 0;

  // Walk outcome (absent for bucket_stats).
  std::optional<WalkResult> walk;
  std::optional<std::size_t> planted_index;
  std::optional<bool> recovered;  // returned the planted point
  std::optional<std::size_t> nn_index;  // brute force
  std::optional<double> nn_gamma;
  std::optional<bool> verified;  // brute force confirms the reported success

  // gamma_profile
  std::optional<double> final_gamma;
  std::optional<bool> stalled;
  std::optional<double> gamma_max;

  // bucket_stats
  std::optional<GraphStats> graph;

  std::int64_t wall_ns = 0;
};

inline nlohmann::json to_json(const TrialRecord& r, ExperimentKind kind) {
  nlohmann::json j;
  j["kind"] = to_string(kind);
  j["cell"] = r.cell;
  j["trial"] = r.trial;
  j["seed"] = r.seed;
  j["n"] = r.n;
  j["d"] = r.d;
  j["alpha"] = r.alpha;
  j["kappa"] = r.kappa;
  if (r.gamma_star) j["gamma_star"] = *r.gamma_star;
  j["max_restarts"] = r.max_restarts;
  if (r.walk) {
    const auto& w = *r.walk;
    j["returned_index"] = w.returned_index;
    j["returned_gamma"] = w.returned_gamma;
    j["success"] = w.success;
    j["restarts_used"] = w.restarts_used;
    j["tours"] = w.tours();
    j["total_steps"] = w.total_steps;
    j["comparisons"] = w.comparisons;
    if (!w.trajectory_gammas.empty()) j["trajectory_gammas"] = w.trajectory_gammas;
  }
  if (r.planted_index) j["planted_index"] = *r.planted_index;
  if (r.recovered) j["recovered"] = *r.recovered;
  if (r.nn_index) j["nn_index"] = *r.nn_index;
  if (r.nn_gamma) j["nn_gamma"] = *r.nn_gamma;
  if (r.verified) j["verified"] = *r.verified;
  if (r.final_gamma) j["final_gamma"] = *r.final_gamma;
  if (r.stalled) j["stalled"] = *r.stalled;
  if (r.gamma_max) j["gamma_max"] = *r.gamma_max;
  if (r.graph) {
    j["edge_count"] = r.graph->edge_count;
    j["bucket_min"] = r.graph->bucket_min;
    j["bucket_mean"] = r.graph->bucket_mean;
    j["bucket_max"] = r.graph->bucket_max;
    j["expected_bucket"] = r.graph->expected_bucket;
  }
  j["wall_ns"] = r.wall_ns;
  return j;
}

// ------------------------------------------------------------- tables ----

struct Column {
  const char* name;
  const char* doc;
};

struct Table {
  std::vector<Column> columns;
  std::vector<std::vector<std::string>> rows;

  std::string to_csv() const {
    std::string out;
    for (std::size_t k = 0; k < columns.size(); ++k) out += (k ? "," : "") + std::string(columns[k].name);
    out += '\n';
    for (const auto& r : rows) {
      for (std::size_t k = 0; k < r.size(); ++k) out += (k ? "," : "") + r[k];
      out += '\n';
    }
    return out;
  }

  std::size_t col(const std::string& name) const {
    for (std::size_t k = 0; k < columns.size(); ++k)
      if (name == columns[k].name) return k;
    throw validation_error("no column " + name);
  }

  double value(std::size_t row, const std::string& name) const { return std::stod(rows.at(row).at(col(name))); }
};

inline std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

inline std::string fmt(std::size_t x) { return std::to_string(x); }

inline std::vector<Column> summary_columns(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::success_sweep:
    case ExperimentKind::exponent_fit:
      return {{"n", "dataset size"},
              {"d", "dimension"},
              {"alpha", "graph threshold"},
              {"kappa", "alpha / mu_of(n, d)"},
              {"gamma_star", "target inner product"},
              {"max_restarts", "tour budget per query"},
              {"trials", "queries in the cell"},
              {"successes", "queries reaching gamma*"},
              {"success_rate", "successes / trials"},
              {"success_lo", "95% Wilson lower bound, per query"},
              {"success_hi", "95% Wilson upper bound, per query"},
              {"tours", "tours over all queries"},
              {"tour_rate", "successes / tours"},
              {"tour_lo", "95% Wilson lower bound, per tour"},
              {"tour_hi", "95% Wilson upper bound, per tour"},
              {"mean_comparisons", "bucket entries scanned per query"},
              {"mean_steps", "accepted steps per query"},
              {"recovered_rate", "fraction returning the planted point"},
              {"verified_rate", "fraction whose success brute force confirms"}};
    case ExperimentKind::gamma_profile:
      return {{"n", "dataset size"},
              {"d", "dimension"},
              {"alpha", "graph threshold"},
              {"kappa", "alpha / mu_of(n, d)"},
              {"mu", "mu_of(n, d)"},
              {"gamma_max", "predicted stall level"},
              {"tours", "tours run"},
              {"stalled", "tours ending without an improving neighbour"},
              {"median_final_gamma", "median final <p,q> of stalled tours"},
              {"mean_final_gamma", "mean final <p,q> of stalled tours"},
              {"mean_steps", "steps per tour"},
              {"max_steps", "longest tour"}};
    case ExperimentKind::bucket_stats:
      return {{"n", "dataset size"},
              {"d", "dimension"},
              {"alpha", "graph threshold"},
              {"kappa", "alpha / mu_of(n, d)"},
              {"trials", "graphs built"},
              {"mean_edges", "mean edge count"},
              {"expected_edges", "n(n-1)/2 times the exact cap volume"},
              {"edge_ratio", "mean_edges / expected_edges"},
              {"mean_bucket", "mean bucket size"},
              {"expected_bucket", "(n-1) times the exact cap volume"},
              {"mean_max_over_mean", "mean of bucket_max / bucket_mean"},
              {"frac_max_le_3mean", "fraction of graphs with bucket_max <= 3 bucket_mean"}};
    case ExperimentKind::adversarial_demo:
      return {{"n", "dataset size"},
              {"d", "dimension"},
              {"alpha", "graph threshold"},
              {"max_restarts", "tour budget per query"},
              {"trials", "instances"},
              {"failures", "queries not reaching the planted inner product"},
              {"failure_rate", "failures / trials"},
              {"failure_lo", "95% Wilson lower bound"},
              {"failure_hi", "95% Wilson upper bound"}};
    case ExperimentKind::sieve_curve:
      return {{"alpha", "graph threshold"},
              {"gamma_max", "stall level sqrt((1-4a^2)/(5-8a))"},
              {"time_exp", "log2(time)/d for n queries"},
              {"space_exp", "log2(space)/d"}};
    case ExperimentKind::tradeoff_table:
      return {{"c", "approximation factor"},
              {"rho_s", "extra-space exponent"},
              {"rho_q_graph", "graph query exponent (0 if clamped)"},
              {"rho_q_hash", "hash query exponent (0 if clamped)"}};
  }
  return {};
}

inline std::vector<Column> fit_columns() {
  return {{"kappa", "alpha / mu_of(n, d)"},
          {"gamma_star", "target inner product"},
          {"d", "dimension"},
          {"points", "n values in the fit"},
          {"slope", "OLS slope of log2(mean_comparisons) on log2(n)"},
          {"intercept", "OLS intercept"},
          {"ci_lo", "95% lower bound on the slope"},
          {"ci_hi", "95% upper bound on the slope"},
          {"predicted", "analytic time exponent"},
          {"diff", "slope - predicted"}};
}

struct FitRow {
  double kappa = 0.0;
  double gamma_star = 0.0;
  FitResult fit;
  double predicted = 0.0;
};

struct ExperimentResult {
  std::vector<TrialRecord> records;
  Table summary;
  std::optional<Table> fit_table;
  std::vector<FitRow> fits;
};

// ----------------------------------------------------------- planning ----

namespace detail {

struct Cell {
  std::size_t index = 0;
  std::size_t n = 0;
  double alpha = 0.0;
  double kappa = 0.0;
  std::size_t restarts = 0;  // resolved
  std::size_t first_ordinal = 0;
};

struct Unit {
  std::size_t cell = 0;
  std::size_t trial_begin = 0;
  std::size_t trial_end = 0;
};

inline std::vector<Cell> plan_cells(const ExperimentSpec& s) {
  std::vector<Cell> cells;
  const bool target = s.needs_target();
  const double gs = target ? s.resolved_gamma_star() : 0.0;
  const bool by_kappa = !s.kappas.empty();
  const auto& params = by_kappa ? s.kappas : s.alphas;
  for (auto n : s.n_values) {
    const double mu = mu_of(static_cast<double>(n), static_cast<int>(s.dim));
    for (double v : params) {
      const double alpha = by_kappa ? v * mu : v;
      require(alpha > 0.0 && alpha < 1.0, "resolved alpha must lie in (0, 1)");
      for (auto r : s.restarts) {
        Cell c;
        c.index = cells.size();
        c.n = n;
        c.alpha = alpha;
        c.kappa = mu > 0.0 ? alpha / mu : 0.0;
        c.restarts = r;
        if (r == 0) {
          c.restarts = target ? default_max_restarts(n, s.dim, alpha, gs, s.restart_cap) : 1;
        }
        c.first_ordinal = c.index * s.trials;
        cells.push_back(c);
      }
    }
  }
  return cells;
}

inline std::vector<Unit> plan_units(const ExperimentSpec& s, const std::vector<Cell>& cells) {
  std::vector<Unit> units;
  const std::size_t per = s.kind == ExperimentKind::adversarial_demo || s.kind == ExperimentKind::bucket_stats
                              ? 1
                              : s.trials_per_graph;
  for (const auto& c : cells)
    for (std::size_t t = 0; t < s.trials; t += per) units.push_back({c.index, t, std::min(s.trials, t + per)});
  return units;
}

inline std::int64_t elapsed_ns(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0).count();
}

inline TrialRecord base_record(const ExperimentSpec& s, const Cell& c, std::size_t trial) {
  TrialRecord r;
  r.cell = c.index;
  r.trial = trial;
  r.seed = derive_seed(s.seed, c.first_ordinal + trial);
  r.n = c.n;
  r.d = s.dim;
  r.alpha = c.alpha;
  r.kappa = c.kappa;
  r.max_restarts = c.restarts;
  return r;
}

inline QueryConfig trial_config(const ExperimentSpec& s, const Cell& c, std::uint64_t seed) {
  QueryConfig cfg;
  cfg.max_restarts = c.restarts;
  cfg.seed = seed;
  cfg.rule = s.rule;
  cfg.giant_leap = s.giant_leap;
  return cfg;
}

inline void finish_walk(TrialRecord& r, const AlphaGraph& g, const UnitVector& q, const QueryConfig& cfg,
                        std::size_t planted) {
  r.walk = query(g, q, cfg);
  r.planted_index = planted;
  r.recovered = r.walk->returned_index == planted;
  const NearestNeighbor nn = brute_force_nn(g, q.coords());
  r.nn_index = nn.index;
  r.nn_gamma = nn.gamma;
  if (r.walk->success) {
    const double got = dot(g.point(r.walk->returned_index), q.coords());
    r.verified = r.walk->returned_index == nn.index || got >= *cfg.gamma_star - cfg.success_tolerance;
  } else {
    r.verified = false;
  }
}

inline std::vector<TrialRecord> run_target_unit(const ExperimentSpec& s, const Cell& c, const Unit& u,
                                                unsigned build_threads) {
  std::vector<TrialRecord> out;
  const double gs = s.resolved_gamma_star();
  if (s.trials_per_graph == 1) {
    for (std::size_t t = u.trial_begin; t < u.trial_end; ++t) {
      const auto t0 = std::chrono::steady_clock::now();
      TrialRecord r = base_record(s, c, t);
      r.gamma_star = gs;
      InstanceSpec is{c.n, s.dim, std::nullopt, gs, r.seed};
      const Dataset ds = gen_planted(is);
      const AlphaGraph g = AlphaGraph::build(ds, c.alpha, build_threads);
      QueryConfig cfg = trial_config(s, c, r.seed);
      cfg.gamma_star = gs;
      finish_walk(r, g, ds.planted()->query, cfg, ds.planted()->planted_index);
      r.wall_ns = elapsed_ns(t0);
      out.push_back(std::move(r));
    }
    return out;
  }
  // Shared base graph: n uniform points, one slot swapped per trial.
  const std::uint64_t group_seed = derive_seed(s.seed, c.first_ordinal + u.trial_begin);
  AlphaGraph g = AlphaGraph::build(gen_uniform(c.n, s.dim, group_seed), c.alpha, build_threads);
  for (std::size_t t = u.trial_begin; t < u.trial_end; ++t) {
    const auto t0 = std::chrono::steady_clock::now();
    TrialRecord r = base_record(s, c, t);
    r.gamma_star = gs;
    Engine rng = make_engine(r.seed, kInstanceStream);
    const UnitVector q = sample_sphere(s.dim, rng);
    const auto slot = static_cast<index_t>(std::uniform_int_distribution<std::size_t>(0, c.n - 1)(rng));
    const UnitVector planted = plant_near(q, gs, rng);
    const auto old_span = g.point(slot);
    const std::vector<double> old(old_span.begin(), old_span.end());
    g.remove(slot);
    g.insert_at(slot, planted.coords());
    QueryConfig cfg = trial_config(s, c, r.seed);
    cfg.gamma_star = gs;
    finish_walk(r, g, q, cfg, slot);
    g.remove(slot);
    g.insert_at(slot, old);
    r.wall_ns = elapsed_ns(t0);
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<TrialRecord> run_profile_unit(const ExperimentSpec& s, const Cell& c, const Unit& u,
                                                 unsigned build_threads) {
  std::vector<TrialRecord> out;
  const std::uint64_t group_seed = derive_seed(s.seed, c.first_ordinal + u.trial_begin);
  const AlphaGraph g = AlphaGraph::build(gen_uniform(c.n, s.dim, group_seed), c.alpha, build_threads);
  const double mu = mu_of(static_cast<double>(c.n), static_cast<int>(s.dim));
  const std::optional<double> gm = c.alpha < mu ? std::optional(gamma_max(mu, c.alpha)) : std::nullopt;
  for (std::size_t t = u.trial_begin; t < u.trial_end; ++t) {
    const auto t0 = std::chrono::steady_clock::now();
    TrialRecord r = base_record(s, c, t);
    Engine rng = make_engine(r.seed, kInstanceStream);
    const UnitVector q = sample_sphere(s.dim, rng);
    QueryConfig cfg = trial_config(s, c, r.seed);
    cfg.max_restarts = 1;
    const auto tours = tour_gamma_profile(g, q.coords(), cfg);
    const TourRecord& tr = tours.front();
    WalkResult w;
    w.returned_index = tr.end;
    w.returned_gamma = tr.gammas.back();
    w.total_steps = tr.steps;
    w.comparisons = tr.comparisons;
    w.trajectory_gammas = tr.gammas;
    r.walk = std::move(w);
    r.final_gamma = tr.gammas.back();
    r.stalled = !tr.hit_step_cap;
    r.gamma_max = gm;
    r.wall_ns = elapsed_ns(t0);
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<TrialRecord> run_bucket_unit(const ExperimentSpec& s, const Cell& c, const Unit& u,
                                                unsigned build_threads) {
  std::vector<TrialRecord> out;
  for (std::size_t t = u.trial_begin; t < u.trial_end; ++t) {
    const auto t0 = std::chrono::steady_clock::now();
    TrialRecord r = base_record(s, c, t);
    r.graph = AlphaGraph::build(gen_uniform(c.n, s.dim, r.seed), c.alpha, build_threads).stats();
    r.wall_ns = elapsed_ns(t0);
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<TrialRecord> run_adversarial_unit(const ExperimentSpec& s, const Cell& c, const Unit& u,
                                                     unsigned build_threads) {
  std::vector<TrialRecord> out;
  for (std::size_t t = u.trial_begin; t < u.trial_end; ++t) {
    const auto t0 = std::chrono::steady_clock::now();
    TrialRecord r = base_record(s, c, t);
    const Dataset ds = gen_adversarial(c.n, s.dim, s.adversarial_eps, r.seed);
    const AlphaGraph g = AlphaGraph::build(ds, c.alpha, build_threads);
    QueryConfig cfg = trial_config(s, c, r.seed);
    cfg.gamma_star = ds.planted()->gamma_star;
    r.gamma_star = cfg.gamma_star;
    finish_walk(r, g, ds.planted()->query, cfg, ds.planted()->planted_index);
    r.wall_ns = elapsed_ns(t0);
    out.push_back(std::move(r));
  }
  return out;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

inline Table summarize(const ExperimentSpec& s, const std::vector<Cell>& cells,
                       const std::vector<TrialRecord>& records) {
  Table tab{summary_columns(s.kind), {}};
  for (const auto& c : cells) {
    std::vector<const TrialRecord*> rs;
    for (const auto& r : records)
      if (r.cell == c.index) rs.push_back(&r);
    const double k = static_cast<double>(rs.size());
    std::vector<std::string> row;
    switch (s.kind) {
      case ExperimentKind::success_sweep:
      case ExperimentKind::exponent_fit: {
        std::size_t succ = 0, tours = 0, rec = 0, ver = 0;
        double comps = 0, steps = 0;
        for (auto* r : rs) {
          succ += r->walk->success;
          tours += r->walk->tours();
          comps += static_cast<double>(r->walk->comparisons);
          steps += static_cast<double>(r->walk->total_steps);
          rec += *r->recovered;
          ver += *r->verified;
        }
        const auto pq = wilson_interval(succ, rs.size());
        const auto pt = wilson_interval(succ, tours);
        row = {fmt(c.n), fmt(s.dim), fmt(c.alpha), fmt(c.kappa), fmt(s.resolved_gamma_star()), fmt(c.restarts),
               fmt(rs.size()), fmt(succ), fmt(pq.rate), fmt(pq.lo), fmt(pq.hi), fmt(tours), fmt(pt.rate),
               fmt(pt.lo), fmt(pt.hi), fmt(comps / k), fmt(steps / k), fmt(rec / k), fmt(ver / k)};
        break;
      }
      case ExperimentKind::gamma_profile: {
        std::vector<double> finals;
        double steps = 0;
        std::size_t max_steps = 0;
        for (auto* r : rs) {
          if (*r->stalled) finals.push_back(*r->final_gamma);
          steps += static_cast<double>(r->walk->total_steps);
          max_steps = std::max(max_steps, r->walk->total_steps);
        }
        double mean = 0;
        for (double f : finals) mean += f;
        mean = finals.empty() ? std::nan("") : mean / static_cast<double>(finals.size());
        const double mu = mu_of(static_cast<double>(c.n), static_cast<int>(s.dim));
        const double gm = rs.empty() || !rs.front()->gamma_max ? std::nan("") : *rs.front()->gamma_max;
        row = {fmt(c.n), fmt(s.dim), fmt(c.alpha), fmt(c.kappa), fmt(mu), fmt(gm), fmt(rs.size()),
               fmt(finals.size()), fmt(median(finals)), fmt(mean), fmt(steps / k), fmt(max_steps)};
        break;
      }
      case ExperimentKind::bucket_stats: {
        double edges = 0, bucket = 0, ratio = 0;
        std::size_t le3 = 0;
        for (auto* r : rs) {
          edges += static_cast<double>(r->graph->edge_count);
          bucket += r->graph->bucket_mean;
          const double q = r->graph->bucket_mean > 0 ? r->graph->bucket_max / r->graph->bucket_mean : 0.0;
          ratio += q;
          le3 += q <= 3.0;
        }
        const double cap = cap_volume_exact({c.alpha, static_cast<int>(s.dim)});
        const double nn = static_cast<double>(c.n);
        const double expected = nn * (nn - 1) / 2 * cap;
        row = {fmt(c.n), fmt(s.dim), fmt(c.alpha), fmt(c.kappa), fmt(rs.size()), fmt(edges / k), fmt(expected),
               fmt(edges / k / expected), fmt(bucket / k), fmt((nn - 1) * cap), fmt(ratio / k),
               fmt(static_cast<double>(le3) / k)};
        break;
      }
      case ExperimentKind::adversarial_demo: {
        std::size_t fail = 0;
        for (auto* r : rs) fail += !r->walk->success;
        const auto w = wilson_interval(fail, rs.size());
        row = {fmt(c.n), fmt(s.dim), fmt(c.alpha), fmt(c.restarts), fmt(rs.size()), fmt(fail), fmt(w.rate),
               fmt(w.lo), fmt(w.hi)};
        break;
      }
      default:
        break;
    }
    tab.rows.push_back(std::move(row));
  }
  return tab;
}

inline double predicted_time_exp(double kappa, double gamma_star) {
  if (kappa > one_iter_threshold(gamma_star) && kappa <= 1.0)
    return sparse_many_iter_exponents(kappa, gamma_star).time_exp;
  return sparse_one_iter_exponents(gamma_star).time_exp;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::trunc);
  if (!os) throw io_error("cannot open " + p.string() + " for writing");
  os << text;
  if (!os) throw io_error("write failed: " + p.string());
}

inline std::filesystem::path with_suffix(const std::filesystem::path& prefix, const std::string& suffix) {
  return prefix.string() + suffix;
}

}  // namespace detail

inline Table sieve_table(double step, WedgeForm form = WedgeForm::interior) {
  const SievingCurve curve = sieving_curve(sieve_grid(step), form);
  Table t{summary_columns(ExperimentKind::sieve_curve), {}};
  for (const auto& r : curve.rows) t.rows.push_back({fmt(r.alpha), fmt(r.gamma_max), fmt(r.time_exp), fmt(r.space_exp)});
  return t;
}

inline Table tradeoff_table(const std::vector<double>& c_grid, const std::vector<double>& rho_s_grid) {
  Table t{summary_columns(ExperimentKind::tradeoff_table), {}};
  for (double c : c_grid)
    for (double rs : rho_s_grid)
      t.rows.push_back({fmt(c), fmt(rs), fmt(sparse_graph_rho_q(c, rs).value), fmt(hash_rho_q(c, rs).value)});
  return t;
}

/// Runs the experiment; writes files when spec.output is set.
inline ExperimentResult run_experiment(const ExperimentSpec& s) {
  s.validate();
  ExperimentResult res;
  if (s.kind == ExperimentKind::sieve_curve) {
    res.summary = sieve_table(s.sieve_step);
  } else if (s.kind == ExperimentKind::tradeoff_table) {
    res.summary = tradeoff_table(s.c_grid, s.rho_s_grid);
  } else {
    const auto cells = detail::plan_cells(s);
    const auto units = detail::plan_units(s, cells);
    std::vector<std::vector<TrialRecord>> per_unit(units.size());
    const unsigned workers = std::max(1u, std::min<unsigned>(s.threads, static_cast<unsigned>(units.size())));
    const unsigned build_threads = std::max(1u, s.threads / workers);
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    auto work = [&](unsigned w) {
      try {
        for (std::size_t k; (k = next.fetch_add(1)) < units.size();) {
          const auto& u = units[k];
          const auto& c = cells[u.cell];
          switch (s.kind) {
            case ExperimentKind::success_sweep:
            case ExperimentKind::exponent_fit: per_unit[k] = detail::run_target_unit(s, c, u, build_threads); break;
            case ExperimentKind::gamma_profile: per_unit[k] = detail::run_profile_unit(s, c, u, build_threads); break;
            case ExperimentKind::bucket_stats: per_unit[k] = detail::run_bucket_unit(s, c, u, build_threads); break;
            case ExperimentKind::adversarial_demo:
              per_unit[k] = detail::run_adversarial_unit(s, c, u, build_threads);
              break;
            default: break;
          }
        }
      } catch (...) {
        errors[w] = std::current_exception();
        next.store(units.size());
      }
    };
    if (workers == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
      for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
    for (auto& v : per_unit)
      for (auto& r : v) res.records.push_back(std::move(r));
    res.summary = detail::summarize(s, cells, res.records);

    if (s.kind == ExperimentKind::exponent_fit) {
      const double gs = s.resolved_gamma_star();
      Table ft{fit_columns(), {}};
      const auto& params = s.kappas.empty() ? s.alphas : s.kappas;
      for (std::size_t pi = 0; pi < params.size(); ++pi) {
        for (std::size_t ri = 0; ri < s.restarts.size(); ++ri) {
          std::vector<std::pair<double, double>> pts;
          double kappa = 0;
          for (std::size_t ni = 0; ni < s.n_values.size(); ++ni) {
            const std::size_t cell = (ni * params.size() + pi) * s.restarts.size() + ri;
            pts.emplace_back(static_cast<double>(cells[cell].n),
                             res.summary.value(cell, "mean_comparisons"));
            kappa = cells[cell].kappa;
          }
          FitRow fr{s.kappas.empty() ? kappa : s.kappas[pi], gs, fit_exponent(pts), 0.0};
          fr.predicted = detail::predicted_time_exp(fr.kappa, gs);
          ft.rows.push_back({fmt(fr.kappa), fmt(gs), fmt(s.dim), fmt(fr.fit.points), fmt(fr.fit.slope),
                             fmt(fr.fit.intercept), fmt(fr.fit.ci_lo), fmt(fr.fit.ci_hi), fmt(fr.predicted),
                             fmt(fr.fit.slope - fr.predicted)});
          res.fits.push_back(fr);
        }
      }
      res.fit_table = std::move(ft);
    }
  }

  if (!s.output.empty()) {
    if (!res.records.empty()) {
      std::string jl;
      for (const auto& r : res.records) jl += to_json(r, s.kind).dump() + '\n';
      detail::write_text(detail::with_suffix(s.output, ".jsonl"), jl);
    }
    detail::write_text(detail::with_suffix(s.output, "_summary.csv"), res.summary.to_csv());
    if (res.fit_table) detail::write_text(detail::with_suffix(s.output, "_fit.csv"), res.fit_table->to_csv());
  }
  return res;
}

}  // namespace anng
