#pragma once

// Random planted instances and the adversarial worst-case instance.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "anng/error.hpp"
#include "anng/random.hpp"
#include "anng/vector.hpp"

namespace anng {

struct PlantedInfo {
  UnitVector query;
  std::size_t planted_index = 0;
  double gamma_star = 0.0;

  friend bool operator==(const PlantedInfo&, const PlantedInfo&) = default;
};

/// n unit vectors of dimension d stored row-major, plus optional planted
/// query metadata.
class Dataset {
 public:
  Dataset() = default;

  explicit Dataset(std::size_t dim) : dim_(dim) {
    detail::require(dim >= 2, "dataset dimension must be >= 2");
  }

  Dataset(std::size_t dim, std::vector<double> coords, std::optional<PlantedInfo> planted = std::nullopt,
          double tolerance = kUnitTolerance)
      : dim_(dim), coords_(std::move(coords)) {
    detail::require(dim >= 2, "dataset dimension must be >= 2");
    detail::require(coords_.size() % dim == 0, "coordinate count is not a multiple of the dimension");
    for (std::size_t i = 0; i < size(); ++i)
      detail::require(std::abs(norm(point(i)) - 1.0) <= tolerance,
                      "point " + std::to_string(i) + " is not unit norm");
    if (planted) set_planted(std::move(*planted), tolerance);
  }

  std::size_t size() const noexcept { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return coords_.empty(); }

  std::span<const double> point(std::size_t i) const noexcept {
    return std::span<const double>(coords_).subspan(i * dim_, dim_);
  }
  std::span<const double> coords() const noexcept { return coords_; }

  void push_back(const UnitVector& p) {
    detail::require(p.dim() == dim_, "point dimension does not match dataset");
    coords_.insert(coords_.end(), p.coords().begin(), p.coords().end());
  }

  const std::optional<PlantedInfo>& planted() const noexcept { return planted_; }

  void set_planted(PlantedInfo info, double tolerance = kStoredUnitTolerance) {
    detail::require(info.query.dim() == dim_, "query dimension does not match dataset");
    detail::require(info.planted_index < size(), "planted index out of range");
    detail::require(std::abs(dot(point(info.planted_index), info.query.coords()) - info.gamma_star) <=
                        std::max(tolerance, 1e-6),
                    "planted point does not have the recorded inner product with the query");
    planted_ = std::move(info);
  }

  void clear_planted() noexcept { planted_.reset(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
  std::optional<PlantedInfo> planted_;
};

/// gamma_star = 1 - 1/c^2 for the canonical (c, r)-ANN instance.
inline double gamma_star_of_c(double c) {
  detail::require(c > 1.0, "approximation factor c must exceed 1");
  return 1.0 - 1.0 / (c * c);
}

struct InstanceSpec {
  std::size_t n = 2;
  std::size_t dim = 2;
  std::optional<double> c;
  std::optional<double> gamma_star;
  std::uint64_t seed = 0;

  double resolved_gamma_star() const {
    detail::require(c.has_value() != gamma_star.has_value(), "give exactly one of c and gamma_star");
    const double g = c ? gamma_star_of_c(*c) : *gamma_star;
    detail::require(g > 0.0 && g < 1.0, "gamma_star must lie in (0, 1)");
    return g;
  }

  void validate() const {
    detail::require(n >= 2, "instance needs n >= 2");
    detail::require(dim >= 2, "instance needs d >= 2");
    (void)resolved_gamma_star();
  }
};

/// n i.i.d. uniform points (no planted metadata).
inline Dataset gen_uniform(std::size_t n, std::size_t dim, std::uint64_t seed) {
  Dataset ds(dim);
  Engine rng = make_engine(seed, kInstanceStream);
  for (std::size_t i = 0; i < n; ++i) ds.push_back(sample_sphere(dim, rng));
  return ds;
}

/// p* = gamma* q + sqrt(1 - gamma*^2) u with u uniform on the subsphere
/// orthogonal to q.
template <class URBG>
UnitVector plant_near(const UnitVector& query, double gamma_star, URBG& rng) {
  return rotate_towards(query, sample_orthogonal(query, rng), gamma_star);
}

/// n - 1 uniform points plus one planted neighbour at a uniformly random
/// position; the dataset has exactly n points.
inline Dataset gen_planted(const InstanceSpec& spec) {
  spec.validate();
  const double gs = spec.resolved_gamma_star();
  Engine rng = make_engine(spec.seed, kInstanceStream);
  UnitVector q = sample_sphere(spec.dim, rng);
  const std::size_t slot = std::uniform_int_distribution<std::size_t>(0, spec.n - 1)(rng);
  Dataset ds(spec.dim);
  for (std::size_t i = 0; i < spec.n; ++i)
    ds.push_back(i == slot ? plant_near(q, gs, rng) : sample_sphere(spec.dim, rng));
  ds.set_planted({std::move(q), slot, gs}, kUnitTolerance);
  return ds;
}

inline constexpr double kDefaultAdversarialEps = 1e-3;

/// Query and planted point near +e1, all other points near -e1, each
/// perturbed by an independent angle in [0, eps).
inline Dataset gen_adversarial(std::size_t n, std::size_t dim, double eps, std::uint64_t seed) {
  detail::require(n >= 3, "adversarial instance needs n >= 3");
  detail::require(dim >= 2, "adversarial instance needs d >= 2");
  detail::require(eps > 0.0 && eps < 0.5, "eps must be a small positive angle");
  Engine rng = make_engine(seed, kInstanceStream);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  std::vector<double> e1(dim, 0.0);
  e1[0] = 1.0;
  const UnitVector plus(e1);
  e1[0] = -1.0;
  const UnitVector minus(e1);

  auto perturb = [&](const UnitVector& centre) {
    const double theta = eps * unif(rng);
    return rotate_towards(centre, sample_orthogonal(centre, rng), std::cos(theta));
  };

  UnitVector q = perturb(plus);
  const std::size_t slot = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  Dataset ds(dim);
  for (std::size_t i = 0; i < n; ++i) ds.push_back(i == slot ? perturb(plus) : perturb(minus));
  const double gs = dot(ds.point(slot), q.coords());
  ds.set_planted({std::move(q), slot, gs}, kUnitTolerance);
  return ds;
}

}  // namespace anng
