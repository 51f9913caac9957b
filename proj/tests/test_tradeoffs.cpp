#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "anng/geometry.hpp"
#include "anng/tradeoffs.hpp"
#include "oracles.hpp"

using namespace anng;

namespace {

// Left-hand side minus right-hand side of the graph frontier inequality.
double frontier_gap(double c, double rho_q, double rho_s) {
  const double c2 = c * c;
  return (2 * c2 - 1) * rho_q + 2 * c2 * (c2 - 1) * std::sqrt(rho_s * (1 - rho_s)) - c2 * c2;
}

double c_of_gamma(double g) { return 1.0 / std::sqrt(1.0 - g); }

const std::vector<double> kCs{1.01, 1.1, 1.3, std::sqrt(2.0), 1.7, 2.0, 3.0, 5.0, 10.0};

}  // namespace

TEST(SparseGraph, HalfSpaceValue) {
  for (double c : {1.1, std::sqrt(2.0), 2.0, 5.0}) {
    const auto r = sparse_graph_rho_q(c, 0.5);
    EXPECT_NEAR(r.value, c * c / (2 * c * c - 1), 1e-12);
    EXPECT_FALSE(r.clamped);
    EXPECT_GE(r.value, 0.5);
  }
  EXPECT_NEAR(sparse_graph_rho_q(2.0, 0.5).value, 4.0 / 7.0, 1e-12);
}

TEST(SparseGraph, LinearSpaceEndpoint) {
  for (double c : kCs) {
    const double v = sparse_graph_rho_q(c, 0.0).value;
    EXPECT_NEAR(v, std::pow(c, 4) / (2 * c * c - 1), 1e-12);
    EXPECT_GE(v, 1.0);
  }
}

TEST(SparseGraph, OnTheFrontier) {
  for (double c : kCs)
    for (double rs = 0.0; rs <= 1.0; rs += 0.05) {
      const auto r = sparse_graph_rho_q(c, rs);
      ASSERT_FALSE(r.clamped);
      EXPECT_NEAR(frontier_gap(c, r.value, rs), 0.0, 1e-12 * std::pow(c, 4));
    }
}

TEST(SparseGraph, DomainErrors) {
  EXPECT_THROW(sparse_graph_rho_q(1.0, 0.5), domain_error);
  EXPECT_THROW(sparse_graph_rho_q(2.0, 1.5), domain_error);
  EXPECT_THROW(sparse_balanced_rho(0.9), domain_error);
}

TEST(SparseBalanced, Values) {
  EXPECT_NEAR(sparse_balanced_rho(std::sqrt(2.0)), 0.8, 1e-12);
  EXPECT_NEAR(sparse_balanced_rho(1e4), 0.5, 1e-8);
  EXPECT_NEAR(sparse_balanced_rho(1.01), 1 - 4 * 0.01 * 0.01, 2e-4);
  for (double c : kCs) {
    const double r = sparse_balanced_rho(c);
    EXPECT_NEAR(frontier_gap(c, r, r), 0.0, 1e-12 * std::pow(c, 4)) << c;
  }
}

TEST(Hash, Values) {
  for (double c : kCs) {
    EXPECT_NEAR(hash_balanced_rho(c), 1 / (2 * c * c - 1), 1e-12);
    EXPECT_NEAR(hash_rho_q(c, hash_balanced_rho(c)).value, hash_balanced_rho(c), 1e-12);
    EXPECT_NEAR(hash_rho_q(c, 0.0).value, (2 * c * c - 1) / std::pow(c, 4), 1e-12);
  }
  EXPECT_NEAR(hash_balanced_rho(std::sqrt(2.0)), 1.0 / 3.0, 1e-12);
}

TEST(Hash, ClampsPastTheFrontier) {
  const auto r = hash_rho_q(2.0, 1.0);  // 3 * 1 > sqrt(7)
  EXPECT_TRUE(r.clamped);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_THROW(hash_rho_q(2.0, -0.1), domain_error);
}

TEST(Hash, AgreesWithGraphNearCOne) {
  const double c = 1.01, rs = 1e-4;
  const double g = sparse_graph_rho_q(c, rs).value, h = hash_rho_q(c, rs).value;
  EXPECT_NEAR(g, h, 5e-3);
  EXPECT_NEAR(g, 1 - 4 * (c - 1) * std::sqrt(rs), 5e-3);
}

TEST(Hash, NeverWorseThanGraph) {
  for (double c = 1.02; c <= 10.0; c += 0.02) {
    const double graph_half = sparse_graph_rho_q(c, 0.5).value;
    EXPECT_LE(hash_rho_q(c, 0.5).value, graph_half) << c;
    double best = 1e9;
    for (double rs = 0.0; rs <= 1.0; rs += 0.01) best = std::min(best, hash_rho_q(c, rs).value);
    EXPECT_LE(best, graph_half) << c;
  }
}

TEST(ManyIteration, Example) {
  const auto e = sparse_many_iter_exponents(0.8, 0.5);
  EXPECT_NEAR(e.time_exp, 0.52 / 0.75, 1e-12);
  EXPECT_NEAR(e.time_exp, 0.6933, 1e-4);
  EXPECT_NEAR(e.space_exp, 2 - 0.64, 1e-12);
  EXPECT_EQ(e.insert_exp, 1.0);
  EXPECT_NEAR(e.delete_exp, 0.36, 1e-12);
}

TEST(ManyIteration, KappaOneEndpoint) {
  for (double g : {0.1, 0.5, 0.9}) {
    const auto e = sparse_many_iter_exponents(1.0, g);
    EXPECT_NEAR(e.time_exp, 1 / (1 - g * g), 1e-12);
    EXPECT_NEAR(e.space_exp, 1.0, 1e-12);
  }
}

TEST(ManyIteration, SatisfiesFrontierWithEquality) {
  int points = 0;
  for (double g = 0.05; g < 0.99; g += 0.03) {
    const double c = c_of_gamma(g);
    const double thr = one_iter_threshold(g);
    for (double k = thr + 1e-3; k <= 1.0; k += 0.01) {
      const auto e = sparse_many_iter_exponents(k, g);
      EXPECT_NEAR(frontier_gap(c, e.time_exp, e.space_exp - 1), 0.0, 1e-12 * std::pow(c, 4)) << g << " " << k;
      EXPECT_NEAR(e.time_exp, sparse_graph_rho_q(c, 1 - k * k).value, 1e-12) << g << " " << k;
      ++points;
    }
  }
  EXPECT_GT(points, 500);
}

TEST(ManyIteration, RejectsKappaAtOrBelowThreshold) {
  EXPECT_THROW(sparse_many_iter_exponents(one_iter_threshold(0.5), 0.5), domain_error);
  EXPECT_THROW(sparse_many_iter_exponents(0.2, 0.5), domain_error);
  EXPECT_THROW(sparse_many_iter_exponents(1.01, 0.5), domain_error);
}

TEST(OneIteration, Values) {
  const auto e = sparse_one_iter_exponents(0.5);
  EXPECT_NEAR(e.time_exp, 0.8, 1e-12);
  EXPECT_NEAR(e.space_exp, 1.8, 1e-12);
  EXPECT_NEAR(e.delete_exp, 0.8, 1e-12);
  EXPECT_EQ(e.insert_exp, 1.0);
  const auto far = sparse_one_iter_exponents(1 - 1e-9);
  EXPECT_NEAR(far.time_exp, 0.5, 1e-8);
  EXPECT_NEAR(far.space_exp, 1.5, 1e-8);
  const double c = 1.01;
  EXPECT_NEAR(sparse_one_iter_exponents(1 - 1 / (c * c)).time_exp, 1 - 4 * (c - 1) * (c - 1), 3e-4);
}

TEST(OneIteration, ContinuousAtThreshold) {
  for (double g = 0.05; g < 0.99; g += 0.05) {
    const double thr = one_iter_threshold(g);
    const auto many = sparse_many_iter_exponents(thr + 1e-12, g);
    const auto one = sparse_one_iter_exponents(g);
    EXPECT_NEAR(many.time_exp, one.time_exp, 1e-9) << g;
    EXPECT_NEAR(many.space_exp, one.space_exp, 1e-9) << g;
  }
}

TEST(Dense, SieveOptimumValues) {
  const auto e = dense_exponents({sieve_lambda(), 0.5, 0.4101});
  EXPECT_NEAR(e.time_exp, 0.3274, 1e-3);
  EXPECT_NEAR(e.space_exp, 0.2822, 1e-3);
}

TEST(Dense, SieveEndpoints) {
  const auto low = dense_exponents({sieve_lambda(), 0.5, 0.0});
  EXPECT_NEAR(low.space_exp, std::log2(4.0 / 3.0), 1e-12);
  EXPECT_NEAR(low.space_exp, 0.4150, 1e-3);
  EXPECT_NEAR(low.query_exp, 0.5 * std::log2(16.0 / 11.0), 1e-12);
  EXPECT_NEAR(low.time_exp, 0.5 * std::log2(64.0 / 33.0), 1e-12);
  EXPECT_NEAR(low.time_exp, 0.4778, 1e-3);
  const auto near_low = dense_exponents({sieve_lambda(), 0.5, 1e-6});
  EXPECT_NEAR(near_low.time_exp, low.time_exp, 1e-5);

  const auto high = dense_exponents({sieve_lambda(), 0.5, 0.5 - 1e-7});
  EXPECT_NEAR(high.space_exp, 0.2075, 1e-3);
  EXPECT_NEAR(high.time_exp, 0.5000, 1e-3);
}

TEST(Dense, MuAndDomain) {
  EXPECT_NEAR((DenseParams{sieve_lambda(), 0.5, 0.1}).mu(), 0.5, 1e-15);
  EXPECT_THROW(dense_exponents({sieve_lambda(), 0.5, 0.5}), domain_error);
  EXPECT_THROW(dense_exponents({0.0, 0.5, 0.1}), domain_error);
  EXPECT_THROW(dense_exponents({sieve_lambda(), 1.0, 0.1}), domain_error);
}

TEST(Dense, WedgeCollapsesAtOneIterationBoundary) {
  // Fixed point alpha = gamma_max(mu, alpha) * gamma*: the wedge equals the
  // gamma* cap, so the query costs one bucket.
  int found = 0;
  for (double lambda : {0.1, sieve_lambda(), 0.35}) {
    for (double gs : {0.3, 0.5, 0.7}) {
      const double mu = DenseParams{lambda, gs, 0.0}.mu();
      double lo = 0.0, hi = mu * (1 - 1e-12);
      auto f = [&](double a) { return a - gamma_max(mu, a) * gs; };
      if (f(lo) * f(hi) > 0) continue;
      for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0 ? lo : hi) = mid;
      }
      const double a = 0.5 * (lo + hi);
      const auto e = dense_exponents({lambda, gs, a});
      EXPECT_NEAR(e.query_exp, lambda + 0.5 * std::log2(1 - a * a), 1e-9) << lambda << " " << gs;
      ++found;
    }
  }
  EXPECT_GE(found, 6);
}

TEST(Dense, PiecewiseMatchesInteriorInCaseOne) {
  for (int k = 1; k < 10; ++k) {
    const double a = 0.05 * k;
    const auto i = dense_exponents({sieve_lambda(), 0.5, a}, WedgeForm::interior);
    const auto p = dense_exponents({sieve_lambda(), 0.5, a}, WedgeForm::piecewise);
    const double g = i.gamma_max;
    if (g <= std::min(a / 0.5, 0.5 / a)) {
      EXPECT_NEAR(i.time_exp, p.time_exp, 1e-12) << a;
    }
  }
}

TEST(SievingCurve, ArgminAndColumns) {
  const auto curve = sieving_curve(sieve_grid(1e-4));
  EXPECT_EQ(curve.rows.size(), 4999u);
  EXPECT_NEAR(curve.argmin.alpha, 0.4101, 5e-4);
  EXPECT_NEAR(curve.grid_argmin.alpha, 0.4101, 5e-4);
  EXPECT_NEAR(curve.argmin.time_exp, 0.3274, 1e-3);
  EXPECT_NEAR(curve.argmin.space_exp, 0.2822, 1e-3);
  EXPECT_LE(curve.argmin.time_exp, curve.grid_argmin.time_exp);
  for (std::size_t k = 0; k < curve.rows.size(); ++k) {
    const auto& r = curve.rows[k];
    EXPECT_NEAR(r.gamma_max, std::sqrt((1 - 4 * r.alpha * r.alpha) / (5 - 8 * r.alpha)), 1e-12);
    if (k > 0) {
      EXPECT_LT(r.space_exp, curve.rows[k - 1].space_exp);
    }
    EXPECT_GE(r.time_exp, curve.argmin.time_exp - 1e-12);
  }
}

TEST(SievingCurve, RejectsGridOutsideRange) {
  EXPECT_THROW(sieving_curve({0.1, 0.5}), domain_error);
  EXPECT_THROW(alpha_grid(0.0, 0.5), validation_error);
}

TEST(Calibration, Examples) {
  EXPECT_NEAR(sparse_calibration_check_mu(0.3, 500, 1.0).ratio, 1.0, 1e-15);
  // At d = 1e4 the polynomial factors still move the ratio by about 0.03.
  const auto c = sparse_calibration_check_mu(0.1, 10'000, 0.5);
  EXPECT_NEAR(c.ratio, std::log(oracle::cap_quadrature(0.05, 10'000)) / std::log(oracle::cap_quadrature(0.1, 10'000)), 1e-6);
  EXPECT_NEAR(c.ratio, 0.2820, 1e-3);
  EXPECT_NEAR(sparse_calibration_check_mu(0.1, 100'000, 0.5).ratio, 0.25, 0.02);
  EXPECT_NEAR(c.deviation, c.ratio - 0.25, 1e-15);
  EXPECT_LT(sparse_calibration_check_mu(0.3, 1000, 0.01).ratio, 0.05);
  const auto via_n = sparse_calibration_check(4096, 128, 0.7);
  EXPECT_NEAR(via_n.mu, mu_of(4096, 128), 1e-15);
  EXPECT_NEAR(via_n.alpha, 0.7 * via_n.mu, 1e-15);
}
