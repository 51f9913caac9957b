#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "anng/geometry.hpp"
#include "anng/instance.hpp"
#include "anng/random.hpp"
#include "anng/vector.hpp"
#include "oracles.hpp"

using namespace anng;

TEST(UnitVector, RejectsNonUnit) {
  EXPECT_THROW(UnitVector({1.0, 1.0}), validation_error);
  EXPECT_NO_THROW(UnitVector({0.6, 0.8}));
  EXPECT_NEAR(dot(UnitVector::normalized({3.0, 4.0}).coords(), std::vector<double>{0.6, 0.8}), 1.0, 1e-15);
}

TEST(SampleSphere, CircleIsUniform) {
  Engine rng = make_engine(2024);
  const int bins = 16;
  const int draws = 100'000;
  std::vector<int> counts(bins, 0);
  for (int i = 0; i < draws; ++i) {
    const UnitVector v = sample_sphere(2, rng);
    const double theta = std::atan2(v[1], v[0]) + M_PI;
    counts[std::min(bins - 1, static_cast<int>(theta / (2 * M_PI) * bins))]++;
  }
  const double expected = static_cast<double>(draws) / bins;
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
  EXPECT_LT(chi2, 30.578);  // 99th percentile of chi^2 with 15 degrees of freedom
}

TEST(SampleSphere, UnitNormAndDeterministic) {
  Engine a = make_engine(5), b = make_engine(5);
  for (std::size_t d : {2u, 3u, 17u, 300u}) {
    const UnitVector x = sample_sphere(d, a);
    const UnitVector y = sample_sphere(d, b);
    EXPECT_NEAR(norm(x.coords()), 1.0, 1e-9);
    EXPECT_EQ(x, y);
  }
}

TEST(SampleOrthogonal, IsOrthogonalAndUnit) {
  Engine rng = make_engine(9);
  for (int k = 0; k < 100; ++k) {
    const UnitVector q = sample_sphere(40, rng);
    const UnitVector u = sample_orthogonal(q, rng);
    EXPECT_NEAR(dot(q, u), 0.0, 1e-12);
    EXPECT_NEAR(norm(u.coords()), 1.0, 1e-12);
  }
}

TEST(InstanceSpec, Validation) {
  EXPECT_THROW((InstanceSpec{1, 8, std::nullopt, 0.5, 0}).validate(), validation_error);
  EXPECT_THROW((InstanceSpec{10, 8, std::nullopt, std::nullopt, 0}).validate(), validation_error);
  EXPECT_THROW((InstanceSpec{10, 8, 2.0, 0.5, 0}).validate(), validation_error);
  EXPECT_THROW((InstanceSpec{10, 8, 1.0, std::nullopt, 0}).validate(), validation_error);
  EXPECT_THROW((InstanceSpec{10, 8, std::nullopt, 1.0, 0}).validate(), validation_error);
  EXPECT_NO_THROW((InstanceSpec{10, 8, 1.5, std::nullopt, 0}).validate());
}

TEST(GenPlanted, GammaStarFromC) {
  EXPECT_NEAR(gamma_star_of_c(std::sqrt(2.0)), 0.5, 1e-15);
  const Dataset ds = gen_planted({64, 16, std::sqrt(2.0), std::nullopt, 3});
  EXPECT_NEAR(ds.planted()->gamma_star, 0.5, 1e-15);
}

TEST(GenPlanted, PlantedInnerProductAndNorms) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const double gs = 0.1 + 0.015 * seed;
    const Dataset ds = gen_planted({100, 24, std::nullopt, gs, seed});
    ASSERT_EQ(ds.size(), 100u);
    const auto& p = *ds.planted();
    EXPECT_NEAR(oracle::dot(ds.point(p.planted_index), p.query.coords()), gs, 1e-12);
    for (std::size_t i = 0; i < ds.size(); ++i) EXPECT_NEAR(norm(ds.point(i)), 1.0, 1e-9);
    EXPECT_NEAR(norm(p.query.coords()), 1.0, 1e-9);
  }
}

TEST(GenPlanted, PlantedSlotIsSpreadOut) {
  const std::size_t n = 8;
  std::vector<int> counts(n, 0);
  for (std::uint64_t seed = 0; seed < 4000; ++seed) counts[gen_planted({n, 3, std::nullopt, 0.5, seed}).planted()->planted_index]++;
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - 500.0) * (c - 500.0) / 500.0;
  EXPECT_LT(chi2, 18.475);  // 99th percentile, 7 degrees of freedom
}

TEST(GenPlanted, RegenerationIsBitIdentical) {
  const InstanceSpec spec{300, 20, 1.3, std::nullopt, 77};
  EXPECT_EQ(gen_planted(spec), gen_planted(spec));
  InstanceSpec other = spec;
  other.seed = 78;
  EXPECT_NE(gen_planted(spec), gen_planted(other));
}

TEST(GenPlanted, PairwiseInnerProductsCentred) {
  const std::size_t n = 300, d = 16;
  const Dataset ds = gen_planted({n, d, std::nullopt, 0.5, 5});
  const std::size_t skip = ds.planted()->planted_index;
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (i == skip || j == skip) continue;
      sum += oracle::dot(ds.point(i), ds.point(j));
      ++pairs;
    }
  EXPECT_LT(std::abs(sum / pairs), 3.0 / std::sqrt(static_cast<double>(pairs) * d));
}

TEST(GenPlanted, NearestNonPlantedConcentratesNearMu) {
  const std::size_t n = 4096, d = 128;
  std::vector<double> best;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Dataset ds = gen_planted({n, d, std::nullopt, 0.5, seed});
    const auto& p = *ds.planted();
    double b = -1.0;
    for (std::size_t i = 0; i < n; ++i)
      if (i != p.planted_index) b = std::max(b, oracle::dot(ds.point(i), p.query.coords()));
    best.push_back(b);
  }
  std::nth_element(best.begin(), best.begin() + 50, best.end());
  EXPECT_NEAR(best[50], mu_of(n, d), 0.05);
  EXPECT_NEAR(mu_of(n, d), 0.3491, 1e-4);
}

TEST(GenUniform, SizeAndDeterminism) {
  const Dataset a = gen_uniform(50, 9, 1);
  EXPECT_EQ(a.size(), 50u);
  EXPECT_FALSE(a.planted().has_value());
  EXPECT_EQ(a, gen_uniform(50, 9, 1));
}

TEST(GenAdversarial, Geometry) {
  const double eps = kDefaultAdversarialEps;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Dataset ds = gen_adversarial(200, 16, eps, seed);
    const auto& p = *ds.planted();
    // Both ends of every pair are within eps of their centre, so the angle
    // between them is below 2 eps (or above pi - 2 eps).
    EXPECT_GE(dot(ds.point(p.planted_index), p.query.coords()), std::cos(2 * eps));
    EXPECT_NEAR(p.gamma_star, dot(ds.point(p.planted_index), p.query.coords()), 1e-15);
    for (std::size_t i = 0; i < ds.size(); ++i) {
      EXPECT_NEAR(norm(ds.point(i)), 1.0, 1e-9);
      if (i != p.planted_index) {
        EXPECT_LE(dot(ds.point(i), p.query.coords()), -std::cos(2 * eps));
      }
    }
  }
}

TEST(GenAdversarial, RejectsBadInput) {
  EXPECT_THROW(gen_adversarial(2, 8, 1e-3, 0), validation_error);
  EXPECT_THROW(gen_adversarial(10, 8, 0.0, 0), validation_error);
}

TEST(Dataset, PlantedMetadataIsChecked) {
  Dataset ds = gen_uniform(10, 4, 3);
  const UnitVector q({1.0, 0.0, 0.0, 0.0});
  const double actual = dot(ds.point(2), q.coords());
  EXPECT_THROW(ds.set_planted({q, 2, actual + 0.01}), validation_error);
  EXPECT_THROW(ds.set_planted({q, 10, actual}), validation_error);
  EXPECT_NO_THROW(ds.set_planted({q, 2, actual}));
}
