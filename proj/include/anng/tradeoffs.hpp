#pragma once

// Time-space trade-off exponents.
//
// Sparse regime (n = 2^o(d)): base-n exponents, query time n^rho_q and
// space n^(1 + rho_s). Dense regime (n = 2^(lambda d)): base-2 exponents per
// dimension.

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "anng/error.hpp"
#include "anng/geometry.hpp"

namespace anng {

struct ClampedExponent {
  double value = 0.0;
  bool clamped = false;  // the raw frontier value was negative
};

struct TradeoffPoint {
  double rho_q = 0.0;
  double rho_s = 0.0;
  bool clamped = false;
};

namespace detail {

inline void check_c(double c) { require_domain(c > 1.0, "approximation factor c must exceed 1"); }

inline void check_gamma_star(double g) { require_domain(g > 0.0 && g < 1.0, "gamma* must lie in (0, 1)"); }

}  // namespace detail

/// Graph frontier: (2c^2-1) rho_q + 2c^2(c^2-1) sqrt(rho_s(1-rho_s)) = c^4.
inline ClampedExponent sparse_graph_rho_q(double c, double rho_s) {
  detail::check_c(c);
  detail::require_domain(rho_s >= 0.0 && rho_s <= 1.0, "rho_s must lie in [0, 1]");
  const double c2 = c * c;
  const double raw = (c2 * c2 - 2.0 * c2 * (c2 - 1.0) * std::sqrt(rho_s * (1.0 - rho_s))) / (2.0 * c2 - 1.0);
  if (raw < 0.0) return {0.0, true};
  return {raw, false};
}

/// rho_q = rho_s on the graph frontier.
inline double sparse_balanced_rho(double c) {
  detail::check_c(c);
  const double c2 = c * c;
  return c2 * c2 / (2.0 * c2 * c2 - 2.0 * c2 + 1.0);
}

/// Hash frontier: c^2 sqrt(rho_q) + (c^2-1) sqrt(rho_s) = sqrt(2c^2-1).
inline ClampedExponent hash_rho_q(double c, double rho_s) {
  detail::check_c(c);
  detail::require_domain(rho_s >= 0.0, "rho_s must be nonnegative");
  const double c2 = c * c;
  const double inner = (std::sqrt(2.0 * c2 - 1.0) - (c2 - 1.0) * std::sqrt(rho_s)) / c2;
  if (inner <= 0.0) return {0.0, inner < 0.0};
  return {inner * inner, false};
}

/// rho_q = rho_s on the hash frontier.
inline double hash_balanced_rho(double c) {
  detail::check_c(c);
  return 1.0 / (2.0 * c * c - 1.0);
}

struct SparseExponents {
  double time_exp = 0.0;
  double space_exp = 0.0;
  double insert_exp = 0.0;
  double delete_exp = 0.0;
};

/// kappa = alpha / mu below which a single tour already succeeds.
inline double one_iter_threshold(double gamma_star) {
  detail::check_gamma_star(gamma_star);
  return std::sqrt(gamma_star * gamma_star / (1.0 + gamma_star * gamma_star));
}

/// Exponents with alpha = kappa mu above the one-iteration threshold. kappa = 1
/// is accepted as the near-linear-space endpoint.
inline SparseExponents sparse_many_iter_exponents(double kappa, double gamma_star) {
  detail::check_gamma_star(gamma_star);
  detail::require_domain(kappa > one_iter_threshold(gamma_star) && kappa <= 1.0,
                         "kappa must lie above the one-iteration threshold and not exceed 1");
  const double k2 = kappa * kappa;
  const double g2 = gamma_star * gamma_star;
  SparseExponents e;
  e.time_exp = (1.0 - 2.0 * gamma_star * std::sqrt(k2 * (1.0 - k2))) / (1.0 - g2);
  e.space_exp = 2.0 - k2;
  e.insert_exp = 1.0;
  e.delete_exp = 1.0 - k2;
  return e;
}

inline SparseExponents sparse_one_iter_exponents(double gamma_star) {
  detail::check_gamma_star(gamma_star);
  const double g2 = gamma_star * gamma_star;
  return {1.0 / (1.0 + g2), (2.0 + g2) / (1.0 + g2), 1.0, 1.0 / (1.0 + g2)};
}

// ---------------------------------------------------------------- dense ----

enum class WedgeForm {
  interior,   // case-1 expression along the whole curve
  piecewise,  // full case split
};

struct DenseParams {
  double lambda = 0.0;  // log2(n) / d
  double gamma_star = 0.0;
  double alpha = 0.0;

  double mu() const { return std::sqrt(-std::expm1(-2.0 * lambda * std::log(2.0))); }
};

struct DenseExponents {
  double time_exp = 0.0;   // n queries
  double space_exp = 0.0;
  double query_exp = 0.0;  // one query
  double gamma_max = 0.0;
};

namespace detail {

// Wedge exponent with alpha allowed to be 0 (the cap around x is a hemisphere).
inline double dense_wedge_bits(double a, double b, double g, WedgeForm form) {
  if (form == WedgeForm::piecewise) {
    if (a == 0.0) return half_log2(1.0 - b * b);
    return wedge_log_volume({a, b, g, 0}).bits_per_dim;
  }
  const double numer = 1.0 - a * a - b * b - g * g + 2.0 * a * b * g;
  require_domain(numer > 0.0, "degenerate wedge: caps do not intersect at leading order");
  return half_log2(numer / (1.0 - g * g));
}

}  // namespace detail

inline DenseExponents dense_exponents(const DenseParams& p, WedgeForm form = WedgeForm::interior) {
  detail::require_domain(p.lambda > 0.0, "lambda must be positive");
  detail::check_gamma_star(p.gamma_star);
  const double mu = p.mu();
  detail::require_domain(p.alpha >= 0.0 && p.alpha < mu, "dense regime needs 0 <= alpha < mu");
  DenseExponents e;
  e.gamma_max = gamma_max(mu, p.alpha);
  const double cap_a = detail::half_log2(1.0 - p.alpha * p.alpha);
  const double cap_g = detail::half_log2(1.0 - p.gamma_star * p.gamma_star);
  const double wedge = detail::dense_wedge_bits(p.alpha, p.gamma_star, e.gamma_max, form);
  e.query_exp = p.lambda + cap_a + cap_g - wedge;
  e.time_exp = p.lambda + e.query_exp;
  e.space_exp = 2.0 * p.lambda + cap_a;
  return e;
}

/// Density of a sieve database: n = (4/3)^(d/2).
inline double sieve_lambda() { return 0.5 * std::log2(4.0 / 3.0); }

inline constexpr double kSieveGammaStar = 0.5;

struct SieveRow {
  double alpha = 0.0;
  double gamma_max = 0.0;
  double time_exp = 0.0;
  double space_exp = 0.0;
};

struct SievingCurve {
  std::vector<SieveRow> rows;
  SieveRow argmin;       // refined optimum
  SieveRow grid_argmin;  // best grid row
};

inline SieveRow dense_row(double lambda, double gamma_star, double alpha, WedgeForm form = WedgeForm::interior) {
  const DenseExponents e = dense_exponents({lambda, gamma_star, alpha}, form);
  return {alpha, e.gamma_max, e.time_exp, e.space_exp};
}

inline SieveRow sieve_row(double alpha, WedgeForm form = WedgeForm::interior) {
  return dense_row(sieve_lambda(), kSieveGammaStar, alpha, form);
}

/// step, 2 step, ... strictly below `upper`.
inline std::vector<double> alpha_grid(double step, double upper) {
  detail::require(step > 0.0 && step < upper, "grid step must lie in (0, upper)");
  std::vector<double> g;
  for (std::size_t k = 1;; ++k) {
    const double a = static_cast<double>(k) * step;
    if (a >= upper) break;
    g.push_back(a);
  }
  return g;
}

inline std::vector<double> sieve_grid(double step = 1e-4) { return alpha_grid(step, 0.5); }

/// Dense exponents along an alpha grid; the time argmin is refined by golden
/// section between the grid neighbours of the best cell, to 1e-6 in alpha.
inline SievingCurve dense_curve(double lambda, double gamma_star, const std::vector<double>& grid,
                                WedgeForm form = WedgeForm::interior) {
  detail::require(!grid.empty(), "alpha grid is empty");
  SievingCurve out;
  out.rows.reserve(grid.size());
  std::size_t best = 0;
  for (double a : grid) {
    out.rows.push_back(dense_row(lambda, gamma_star, a, form));
    if (out.rows.back().time_exp < out.rows[best].time_exp) best = out.rows.size() - 1;
  }
  out.grid_argmin = out.rows[best];
  double lo = best > 0 ? out.rows[best - 1].alpha : out.rows[best].alpha;
  double hi = best + 1 < out.rows.size() ? out.rows[best + 1].alpha : out.rows[best].alpha;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  auto time_at = [&](double a) { return dense_row(lambda, gamma_star, a, form).time_exp; };
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = time_at(x1), f2 = time_at(x2);
  while (hi - lo > 1e-7) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = time_at(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = time_at(x2);
    }
  }
  out.argmin = dense_row(lambda, gamma_star, 0.5 * (lo + hi), form);
  if (out.grid_argmin.time_exp < out.argmin.time_exp) out.argmin = out.grid_argmin;
  return out;
}

/// Sieve setting: lambda = (1/2) log2(4/3), gamma* = 1/2, grid inside (0, 0.5).
inline SievingCurve sieving_curve(const std::vector<double>& grid, WedgeForm form = WedgeForm::interior) {
  for (double a : grid) detail::require_domain(a >= 0.0 && a < 0.5, "sieve alpha must lie in [0, 0.5)");
  return dense_curve(sieve_lambda(), kSieveGammaStar, grid, form);
}

// ------------------------------------------------------- calibration ----

struct CalibrationCheck {
  double mu = 0.0;
  double alpha = 0.0;
  double ratio = 0.0;     // log C(alpha) / log C(mu), exact finite-d caps
  double kappa_sq = 0.0;
  double deviation = 0.0; // ratio - kappa^2
};

inline CalibrationCheck sparse_calibration_check_mu(double mu, int d, double kappa) {
  detail::require_domain(mu > 0.0 && mu < 1.0, "mu must lie in (0, 1)");
  detail::require_domain(kappa >= 0.0 && kappa <= 1.0, "kappa must lie in [0, 1]");
  CalibrationCheck r;
  r.mu = mu;
  r.alpha = kappa * mu;
  r.kappa_sq = kappa * kappa;
  r.ratio = std::log(cap_volume_exact({r.alpha, d})) / std::log(cap_volume_exact({mu, d}));
  r.deviation = r.ratio - r.kappa_sq;
  return r;
}

inline CalibrationCheck sparse_calibration_check(double n, int d, double kappa) {
  return sparse_calibration_check_mu(mu_of(n, d), d, kappa);
}

}  // namespace anng
