// anng: command-line front end for dataset generation, graph building,
// queries, benchmarks and the analytic exponent tables.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "anng/anng.hpp"

namespace {

using namespace anng;

struct Common {
  std::uint64_t seed = 1;
  std::string out;
  unsigned threads = 1;
};

void add_common(CLI::App* app, Common& c, const std::string& out_help) {
  app->add_option("--seed", c.seed, "Master seed")->capture_default_str();
  app->add_option("--out", c.out, out_help);
  app->add_option("--threads", c.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
}

std::string columns_help(const std::vector<Column>& cols, const std::string& title) {
  std::string s = title + " columns:\n";
  for (const auto& c : cols) s += "  " + std::string(c.name) + ": " + c.doc + "\n";
  return s;
}

// Writes to --out when given, stdout otherwise.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::trunc);
      if (!file_) throw io_error("cannot open " + path + " for writing");
    }
  }
  std::ostream& os() { return file_.is_open() ? file_ : std::cout; }
  void close() {
    os().flush();
    if (!os()) throw io_error("write failed");
  }

 private:
  std::ofstream file_;
};

const std::vector<Column> kVolumeColumns = {
    {"kind", "cap or wedge"},
    {"alpha", "first cap height"},
    {"beta", "second cap height (wedge only)"},
    {"gamma", "inner product of the cap centres (wedge only)"},
    {"d", "dimension"},
    {"bits_per_dim", "leading-order log2(volume)/d"},
    {"exact", "exact finite-d cap volume (cap only)"},
    {"mc_estimate", "Monte-Carlo wedge volume (wedge with --samples)"},
    {"mc_stderr", "standard error of mc_estimate"},
    {"mc_bits_per_dim", "log2(mc_estimate)/d"}};

const std::vector<Column> kHashColumns = {{"c", "approximation factor"},
                                          {"rho_s", "extra-space exponent"},
                                          {"rho_q_hash", "hash query exponent (0 if clamped)"}};

const std::vector<Column> kQueryFields = {
    {"query", "query ordinal"},
    {"seed", "walk seed"},
    {"gamma_star", "target (null in exact mode)"},
    {"returned_index", "returned vertex"},
    {"returned_gamma", "<p, q> of the returned vertex"},
    {"success", "reached gamma* (exact mode: returned the brute-force nearest neighbour)"},
    {"restarts_used", "tours - 1"},
    {"tours", "tours run"},
    {"total_steps", "accepted steps over all tours"},
    {"comparisons", "bucket entries scanned"},
    {"trajectory_gammas", "per-step <p, q> of the last tour (with --trajectory)"}};

std::vector<double> rho_grid(double step) {
  std::vector<double> g;
  for (std::size_t k = 0;; ++k) {
    const double r = static_cast<double>(k) * step;
    if (r > 1.0 + 1e-12) break;
    g.push_back(std::min(r, 1.0));
  }
  return g;
}

std::string fmt_g(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

void print_argmin(const SievingCurve& c) {
  std::fprintf(stderr, "argmin alpha=%.6f gamma_max=%.6f time_exp=%.6f space_exp=%.6f\n", c.argmin.alpha,
               c.argmin.gamma_max, c.argmin.time_exp, c.argmin.space_exp);
}

int run(int argc, char** argv) {
  CLI::App app{"Near-neighbour graphs on the unit sphere: build, query, benchmark and exponent tables"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  // ---- gen
  Common gen_c;
  std::size_t gen_n = 0, gen_d = 0;
  std::optional<double> gen_cval, gen_gs;
  std::string gen_kind = "planted";
  double gen_eps = kDefaultAdversarialEps;
  auto* gen = app.add_subcommand("gen", "Generate a dataset file");
  add_common(gen, gen_c, "Dataset file to write (required)");
  gen->add_option("--n", gen_n, "Number of points")->required()->check(CLI::Range(std::size_t{2}, std::size_t{1} << 31));
  gen->add_option("--dim", gen_d, "Dimension")->required()->check(CLI::Range(2, 1 << 20));
  gen->add_option("--kind", gen_kind, "planted, uniform or adversarial")
      ->check(CLI::IsMember({"planted", "uniform", "adversarial"}))
      ->capture_default_str();
  auto* gen_c_opt = gen->add_option("--c", gen_cval, "Approximation factor (gamma* = 1 - 1/c^2)");
  gen->add_option("--gamma-star", gen_gs, "Planted inner product")->excludes(gen_c_opt);
  gen->add_option("--eps", gen_eps, "Adversarial angular perturbation")->capture_default_str();

  // ---- build
  Common build_c;
  std::optional<double> build_alpha, build_kappa;
  std::string build_in;
  auto* build = app.add_subcommand("build", "Build the alpha-graph of a dataset");
  add_common(build, build_c, "Graph file to write (required)");
  auto* ba = build->add_option("--alpha", build_alpha, "Edge threshold");
  build->add_option("--kappa", build_kappa, "alpha = kappa * mu_of(n, d)")->excludes(ba);
  build->add_option("--in", build_in, "Dataset file")->required();

  // ---- query
  Common query_c;
  std::string q_graph, q_dataset, q_rule = "first";
  std::optional<double> q_gs;
  bool q_exact = false, q_traj = false, q_no_leap = false;
  std::size_t q_restarts = 0, q_random = 0;
  auto* qry = app.add_subcommand("query", "Run greedy walks; one JSON line per query");
  add_common(qry, query_c, "JSON-lines output (default stdout)");
  qry->add_option("--graph", q_graph, "Graph file")->required();
  qry->add_option("--dataset", q_dataset, "Dataset file the graph was built from")->required();
  auto* qg = qry->add_option("--gamma-star", q_gs, "Target inner product (default: the planted gamma*)");
  qry->add_flag("--exact", q_exact, "Exact nearest-neighbour mode")->excludes(qg);
  qry->add_option("--restarts", q_restarts, "Tours per query (0: analytic default)")->capture_default_str();
  qry->add_option("--random-queries", q_random, "Also run this many uniform random queries")->capture_default_str();
  qry->add_option("--rule", q_rule, "first, best or sweep")->check(CLI::IsMember({"first", "best", "sweep"}));
  qry->add_flag("--trajectory", q_traj, "Record per-step <p, q>");
  qry->add_flag("--no-giant-leap", q_no_leap, "Require the full slack for the final step too");
  qry->footer(columns_help(kQueryFields, "JSON-lines"));

  // ---- bench
  Common bench_c;
  std::string b_kind = "success_sweep", b_rule = "first";
  std::vector<std::size_t> b_n, b_restarts{0};
  std::size_t b_dim = 48, b_trials = 200, b_per_graph = 1;
  std::optional<double> b_cval, b_gs;
  std::vector<double> b_kappa, b_alpha;
  double b_eps = kDefaultAdversarialEps;
  auto* bench = app.add_subcommand("bench", "Run an experiment grid");
  add_common(bench, bench_c, "Output prefix: <out>.jsonl, <out>_summary.csv, <out>_fit.csv (summary to stdout if absent)");
  bench->add_option("--kind", b_kind, "success_sweep, exponent_fit, gamma_profile, bucket_stats or adversarial_demo")
      ->check(CLI::IsMember({"success_sweep", "exponent_fit", "gamma_profile", "bucket_stats", "adversarial_demo"}))
      ->capture_default_str();
  bench->add_option("--n", b_n, "Dataset sizes")->required();
  bench->add_option("--dim", b_dim, "Dimension")->capture_default_str();
  auto* bc = bench->add_option("--c", b_cval, "Approximation factor");
  bench->add_option("--gamma-star", b_gs, "Target inner product")->excludes(bc);
  auto* bk = bench->add_option("--kappa", b_kappa, "alpha / mu_of(n, d) values");
  bench->add_option("--alpha", b_alpha, "Absolute alpha values")->excludes(bk);
  bench->add_option("--restarts", b_restarts, "Tour budgets (0: analytic default)")->capture_default_str();
  bench->add_option("--trials", b_trials, "Trials per cell")->capture_default_str();
  bench->add_option("--trials-per-graph", b_per_graph, "Trials sharing one base graph")->capture_default_str();
  bench->add_option("--rule", b_rule, "first, best or sweep")->check(CLI::IsMember({"first", "best", "sweep"}));
  bench->add_option("--eps", b_eps, "Adversarial perturbation")->capture_default_str();
  {
    std::string f;
    f += columns_help(summary_columns(ExperimentKind::success_sweep), "success_sweep / exponent_fit summary");
    f += columns_help(fit_columns(), "exponent_fit _fit.csv");
    f += columns_help(summary_columns(ExperimentKind::gamma_profile), "gamma_profile summary");
    f += columns_help(summary_columns(ExperimentKind::bucket_stats), "bucket_stats summary");
    f += columns_help(summary_columns(ExperimentKind::adversarial_demo), "adversarial_demo summary");
    bench->footer(f);
  }

  // ---- tradeoff
  Common trade_c;
  std::string t_mode = "sparse";
  std::vector<double> t_c{std::sqrt(2.0)};
  std::optional<double> t_lambda, t_gs;
  double t_step = 0.01, t_alpha_step = 1e-4;
  auto* trade = app.add_subcommand("tradeoff", "Analytic trade-off tables (CSV)");
  add_common(trade, trade_c, "CSV file (default stdout)");
  trade->add_option("--mode", t_mode, "sparse, hash or sieve")
      ->check(CLI::IsMember({"sparse", "hash", "sieve"}))
      ->capture_default_str();
  trade->add_option("--c", t_c, "Approximation factors (sparse, hash)");
  trade->add_option("--rho-s-step", t_step, "rho_s grid step over [0, 1] (sparse, hash)")->capture_default_str();
  trade->add_option("--lambda", t_lambda, "Density log2(n)/d (sieve; default (1/2)log2(4/3))");
  trade->add_option("--gamma-star", t_gs, "Target inner product (sieve; default 1/2)");
  trade->add_option("--alpha-step", t_alpha_step, "alpha grid step (sieve)")->capture_default_str();
  trade->footer(columns_help(summary_columns(ExperimentKind::tradeoff_table), "sparse mode") +
                columns_help(kHashColumns, "hash mode") +
                columns_help(summary_columns(ExperimentKind::sieve_curve), "sieve mode") +
                "sieve mode also prints the time argmin on stderr.\n");

  // ---- sieve-curve
  Common sieve_c;
  double s_step = 1e-4;
  std::string s_form = "interior";
  auto* sieve = app.add_subcommand("sieve-curve", "Lattice-sieving exponent curve (CSV)");
  add_common(sieve, sieve_c, "CSV file (default stdout)");
  sieve->add_option("--step", s_step, "alpha grid step inside (0, 0.5)")->capture_default_str();
  sieve->add_option("--wedge-form", s_form, "interior or piecewise")
      ->check(CLI::IsMember({"interior", "piecewise"}))
      ->capture_default_str();
  sieve->footer(columns_help(summary_columns(ExperimentKind::sieve_curve), "CSV") +
                "The time argmin is printed on stderr.\n");

  // ---- volume
  Common vol_c;
  std::optional<double> v_cap;
  std::vector<double> v_wedge;
  int v_dim = 0;
  std::uint64_t v_samples = 0;
  auto* vol = app.add_subcommand("volume", "Cap and wedge volumes (CSV)");
  add_common(vol, vol_c, "CSV file (default stdout)");
  auto* vc = vol->add_option("--cap", v_cap, "Cap height alpha");
  vol->add_option("--wedge", v_wedge, "Wedge parameters alpha beta gamma")->expected(3)->excludes(vc);
  vol->add_option("--dim", v_dim, "Dimension")->required()->check(CLI::Range(2, 1 << 24));
  vol->add_option("--samples", v_samples, "Monte-Carlo samples for a wedge")->capture_default_str();
  vol->footer(columns_help(kVolumeColumns, "CSV"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (gen->parsed()) {
    detail::require(!gen_c.out.empty(), "gen needs --out");
    Dataset ds;
    if (gen_kind == "planted") {
      ds = gen_planted({gen_n, gen_d, gen_cval, gen_gs, gen_c.seed});
    } else if (gen_kind == "uniform") {
      ds = gen_uniform(gen_n, gen_d, gen_c.seed);
    } else {
      ds = gen_adversarial(gen_n, gen_d, gen_eps, gen_c.seed);
    }
    save_dataset(gen_c.out, ds);
    return 0;
  }

  if (build->parsed()) {
    detail::require(!build_c.out.empty(), "build needs --out");
    detail::require(build_alpha || build_kappa, "build needs --alpha or --kappa");
    const Dataset ds = load_dataset(build_in);
    const double alpha = build_alpha ? *build_alpha
                                     : *build_kappa * mu_of(static_cast<double>(ds.size()), static_cast<int>(ds.dim()));
    save_graph(build_c.out, AlphaGraph::build(ds, alpha, build_c.threads));
    return 0;
  }

  if (qry->parsed()) {
    const Dataset ds = load_dataset(q_dataset);
    const AlphaGraph g = load_graph(q_graph, ds);
    struct Q {
      UnitVector q;
      std::optional<double> gs;
    };
    std::vector<Q> queries;
    if (ds.planted()) queries.push_back({ds.planted()->query, q_exact ? std::nullopt : std::optional(q_gs.value_or(ds.planted()->gamma_star))});
    Engine rng = make_engine(query_c.seed, kAuxStream);
    for (std::size_t k = 0; k < q_random; ++k) queries.push_back({sample_sphere(ds.dim(), rng), q_exact ? std::nullopt : q_gs});
    detail::require(!queries.empty(), "dataset has no planted query; pass --random-queries");
    for (const auto& q : queries)
      detail::require(q_exact || q.gs, "random queries need --gamma-star or --exact");
    Sink sink(query_c.out);
    for (std::size_t k = 0; k < queries.size(); ++k) {
      QueryConfig cfg;
      cfg.gamma_star = queries[k].gs;
      cfg.seed = derive_seed(query_c.seed, k);
      cfg.rule = parse_rule(q_rule);
      cfg.giant_leap = !q_no_leap;
      cfg.record_trajectory = q_traj;
      cfg.max_restarts = q_restarts;
      if (q_restarts == 0)
        cfg.max_restarts = cfg.gamma_star ? default_max_restarts(g.live_count(), g.dim(), g.alpha(), *cfg.gamma_star) : 1;
      WalkResult r = query(g, queries[k].q, cfg);
      if (!cfg.gamma_star) r.success = r.returned_index == brute_force_nn(g, queries[k].q.coords()).index;
      nlohmann::json j;
      j["query"] = k;
      j["seed"] = cfg.seed;
      j["gamma_star"] = cfg.gamma_star ? nlohmann::json(*cfg.gamma_star) : nlohmann::json(nullptr);
      j["returned_index"] = r.returned_index;
      j["returned_gamma"] = r.returned_gamma;
      j["success"] = r.success;
      j["restarts_used"] = r.restarts_used;
      j["tours"] = r.tours();
      j["total_steps"] = r.total_steps;
      j["comparisons"] = r.comparisons;
      if (q_traj) j["trajectory_gammas"] = r.trajectory_gammas;
      sink.os() << j.dump() << '\n';
    }
    sink.close();
    return 0;
  }

  if (bench->parsed()) {
    ExperimentSpec s;
    s.kind = parse_kind(b_kind);
    s.n_values = b_n;
    s.dim = b_dim;
    s.c = b_cval;
    s.gamma_star = b_gs;
    s.kappas = b_kappa;
    s.alphas = b_alpha;
    s.restarts = b_restarts;
    s.trials = b_trials;
    s.trials_per_graph = b_per_graph;
    s.seed = bench_c.seed;
    s.threads = bench_c.threads;
    s.rule = parse_rule(b_rule);
    s.adversarial_eps = b_eps;
    s.output = bench_c.out;
    const ExperimentResult r = run_experiment(s);
    if (bench_c.out.empty()) {
      std::cout << r.summary.to_csv();
      if (r.fit_table) std::cout << r.fit_table->to_csv();
    }
    return 0;
  }

  if (trade->parsed()) {
    Sink sink(trade_c.out);
    if (t_mode == "sieve") {
      const double lambda = t_lambda.value_or(sieve_lambda());
      const double gs = t_gs.value_or(kSieveGammaStar);
      const double mu = DenseParams{lambda, gs, 0.0}.mu();
      const SievingCurve c = dense_curve(lambda, gs, alpha_grid(t_alpha_step, mu));
      Table t{summary_columns(ExperimentKind::sieve_curve), {}};
      for (const auto& r : c.rows) t.rows.push_back({fmt(r.alpha), fmt(r.gamma_max), fmt(r.time_exp), fmt(r.space_exp)});
      sink.os() << t.to_csv();
      print_argmin(c);
    } else if (t_mode == "sparse") {
      sink.os() << tradeoff_table(t_c, rho_grid(t_step)).to_csv();
    } else {
      Table t{kHashColumns, {}};
      for (double c : t_c)
        for (double rs : rho_grid(t_step)) t.rows.push_back({fmt(c), fmt(rs), fmt(hash_rho_q(c, rs).value)});
      sink.os() << t.to_csv();
    }
    sink.close();
    return 0;
  }

  if (sieve->parsed()) {
    Sink sink(sieve_c.out);
    const WedgeForm form = s_form == "piecewise" ? WedgeForm::piecewise : WedgeForm::interior;
    const SievingCurve c = sieving_curve(sieve_grid(s_step), form);
    Table t{summary_columns(ExperimentKind::sieve_curve), {}};
    for (const auto& r : c.rows) t.rows.push_back({fmt(r.alpha), fmt(r.gamma_max), fmt(r.time_exp), fmt(r.space_exp)});
    sink.os() << t.to_csv();
    sink.close();
    print_argmin(c);
    return 0;
  }

  if (vol->parsed()) {
    detail::require(v_cap || v_wedge.size() == 3, "volume needs --cap or --wedge");
    Sink sink(vol_c.out);
    Table t{kVolumeColumns, {}};
    if (v_cap) {
      const CapParams p{*v_cap, v_dim};
      t.rows.push_back({"cap", fmt(*v_cap), "", "", fmt(std::size_t(v_dim)), fmt(cap_log_volume(p).bits_per_dim),
                        fmt_g(cap_volume_exact(p)), "", "", ""});
    } else {
      const WedgeParams p{v_wedge[0], v_wedge[1], v_wedge[2], v_dim};
      std::vector<std::string> row{"wedge", fmt(p.alpha), fmt(p.beta), fmt(p.gamma), fmt(std::size_t(v_dim)),
                                   fmt(wedge_log_volume(p).bits_per_dim), ""};
      if (v_samples > 0) {
        const McEstimate m = wedge_volume_mc(p, v_samples, vol_c.seed);
        row.push_back(fmt_g(m.estimate));
        row.push_back(fmt_g(m.std_error));
        row.push_back(m.hits ? fmt(std::log2(m.estimate) / v_dim) : "");
      } else {
        row.insert(row.end(), {"", "", ""});
      }
      t.rows.push_back(std::move(row));
    }
    sink.os() << t.to_csv();
    sink.close();
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const anng::validation_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const anng::domain_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
