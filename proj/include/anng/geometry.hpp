#pragma once

// Spherical caps and wedges on S^(d-1).
//
// Log-volumes are leading-order exponents: log2 of the relative volume
// divided by d, with the d^Theta(1) prefactor discarded. The exact finite-d
// cap volume is a regularized incomplete beta function.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include <boost/math/special_functions/beta.hpp>

#include "anng/error.hpp"
#include "anng/random.hpp"

namespace anng {

struct CapParams {
  double alpha = 0.0;  // cosine threshold ("height")
  int dim = 2;
};

struct WedgeParams {
  double alpha = 0.0;  // height of the cap around x
  double beta = 0.0;   // height of the cap around y
  double gamma = 0.0;  // <x, y>
  int dim = 2;
};

struct LogVolume {
  double bits_per_dim = 0.0;
  int dim = 0;  // 0 denotes the d -> infinity limit

  double log2_volume() const noexcept { return bits_per_dim * dim; }
};

namespace detail {

inline std::string num(double x) { return std::to_string(x); }

inline void check_cap(const CapParams& p) {
  require_domain(p.alpha > -1.0 && p.alpha < 1.0, "cap height must lie in (-1, 1), got " + num(p.alpha));
}

inline void check_wedge(const WedgeParams& p) {
  for (double v : {p.alpha, p.beta, p.gamma})
    require_domain(v > 0.0 && v < 1.0, "wedge parameters must lie in (0, 1), got " + num(v));
}

inline double half_log2(double x) { return 0.5 * std::log2(x); }

}  // namespace detail

/// (1/2) log2(1 - alpha^2).
inline LogVolume cap_log_volume(const CapParams& p) {
  detail::check_cap(p);
  return {detail::half_log2(1.0 - p.alpha * p.alpha), p.dim};
}

/// Pr[X_1 > alpha] for X uniform on S^(d-1).
///
/// The first coordinate has density proportional to (1 - t^2)^((d-3)/2);
/// substituting x = 1 - t^2 turns the tail integral into
/// (1/2) I_{1-alpha^2}((d-1)/2, 1/2).
inline double cap_volume_exact(const CapParams& p) {
  detail::check_cap(p);
  detail::require(p.dim >= 2, "cap dimension must be >= 2");
  if (p.alpha == 0.0) return 0.5;
  const double a = std::abs(p.alpha);
  const double upper = 0.5 * boost::math::ibeta(0.5 * (p.dim - 1), 0.5, 1.0 - a * a);
  return p.alpha > 0.0 ? upper : 1.0 - upper;
}

/// Case-1 (interior) wedge exponent, without checking which case applies.
inline LogVolume wedge_interior_log_volume(const WedgeParams& p) {
  detail::check_wedge(p);
  const double a = p.alpha, b = p.beta, g = p.gamma;
  const double numer = 1.0 - a * a - b * b - g * g + 2.0 * a * b * g;
  detail::require_domain(numer > 0.0, "degenerate wedge: caps do not intersect at leading order");
  return {detail::half_log2(numer / (1.0 - g * g)), p.dim};
}

/// Leading-order exponent of W(alpha, beta, gamma) with the full case split.
inline LogVolume wedge_log_volume(const WedgeParams& p) {
  detail::check_wedge(p);
  const double a = p.alpha, b = p.beta, g = p.gamma;
  if (g <= std::min(a / b, b / a)) return wedge_interior_log_volume(p);
  if (b / a <= g) return {detail::half_log2(1.0 - a * a), p.dim};
  return {detail::half_log2(1.0 - b * b), p.dim};
}

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t hits = 0;
  std::uint64_t samples = 0;
};

/// Monte-Carlo estimate of Pr[X_1 > alpha, gamma X_1 + sqrt(1-gamma^2) X_2 > beta].
///
/// Only the first two coordinates of the uniform point matter. They are drawn
/// as g_1/r, g_2/r with r^2 = g_1^2 + g_2^2 + S, where S ~ chi^2(d-2) stands
/// in for the squared norm of the remaining d-2 normal coordinates.
inline McEstimate wedge_volume_mc(const WedgeParams& p, std::uint64_t samples, std::uint64_t seed) {
  detail::check_wedge(p);
  detail::require(samples >= 1, "need at least one sample");
  detail::require(p.dim >= 2, "wedge dimension must be >= 2");
  Engine rng = make_engine(seed, kAuxStream);
  std::normal_distribution<double> gauss;
  std::gamma_distribution<double> chi2(0.5 * std::max(p.dim - 2, 1), 2.0);
  const bool has_tail = p.dim > 2;
  const double s = std::sqrt(1.0 - p.gamma * p.gamma);
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < samples; ++i) {
    const double g1 = gauss(rng);
    const double g2 = gauss(rng);
    const double tail = has_tail ? chi2(rng) : 0.0;
    const double r = std::sqrt(g1 * g1 + g2 * g2 + tail);
    const double x1 = g1 / r;
    const double x2 = g2 / r;
    if (x1 > p.alpha && p.gamma * x1 + s * x2 > p.beta) ++hits;
  }
  const double n = static_cast<double>(samples);
  const double est = static_cast<double>(hits) / n;
  return {est, std::sqrt(est * (1.0 - est) / n), hits, samples};
}

/// mu = sqrt(1 - n^(-2/d)): leading-order top inner product of a random
/// query with n random points.
inline double mu_of(double n, int d) {
  detail::require(n >= 1.0, "mu_of needs n >= 1");
  detail::require(d >= 1, "mu_of needs d >= 1");
  return std::sqrt(-std::expm1(-2.0 * std::log(n) / d));
}

/// Inner-product level at which small greedy steps stall (leading term).
inline double gamma_max(double mu, double alpha) {
  detail::require_domain(mu > 0.0 && mu < 1.0, "gamma_max needs mu in (0, 1)");
  detail::require_domain(alpha >= 0.0 && alpha < mu, "gamma_max needs 0 <= alpha < mu");
  return std::sqrt((mu * mu - alpha * alpha) / (1.0 - 2.0 * alpha + mu * mu));
}

}  // namespace anng
