#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "anng/error.hpp"
#include "anng/random.hpp"

namespace anng {

/// Inner product with a fixed summation order (four interleaved partial
/// sums), so every caller sees bit-identical values for the same pair.
inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
  const std::size_t d = a.size();
  const double* x = a.data();
  const double* y = b.data();
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= d; i += 4) {
    s0 += x[i] * y[i];
    s1 += x[i + 1] * y[i + 1];
    s2 += x[i + 2] * y[i + 2];
    s3 += x[i + 3] * y[i + 3];
  }
  for (; i < d; ++i) s0 += x[i] * y[i];
  return (s0 + s1) + (s2 + s3);
}

inline double norm(std::span<const double> a) noexcept { return std::sqrt(dot(a, a)); }

inline constexpr double kUnitTolerance = 1e-9;
// Tolerance for vectors that went through 32-bit float storage.
inline constexpr double kStoredUnitTolerance = 1e-6;

/// A point on the unit sphere S^(d-1).
class UnitVector {
 public:
  UnitVector() = default;

  /// Takes coordinates that are already unit norm (within `tolerance`).
  explicit UnitVector(std::vector<double> coords, double tolerance = kUnitTolerance)
      : coords_(std::move(coords)) {
    detail::require(coords_.size() >= 2, "unit vector needs dimension >= 2");
    const double n = norm(coords_);
    detail::require(std::abs(n - 1.0) <= tolerance,
                    "vector norm " + std::to_string(n) + " is not 1");
  }

  static UnitVector normalized(std::vector<double> coords) {
    const double n = norm(coords);
    detail::require(n > 0.0 && std::isfinite(n), "cannot normalize a zero vector");
    for (double& c : coords) c /= n;
    return UnitVector(std::move(coords));
  }

  std::size_t dim() const noexcept { return coords_.size(); }
  std::span<const double> coords() const noexcept { return coords_; }
  double operator[](std::size_t i) const noexcept { return coords_[i]; }

  friend bool operator==(const UnitVector&, const UnitVector&) = default;

 private:
  std::vector<double> coords_;
};

inline double dot(const UnitVector& a, const UnitVector& b) noexcept {
  return dot(a.coords(), b.coords());
}

/// Uniform point on S^(d-1): i.i.d. standard normal coordinates, normalized.
template <class URBG>
UnitVector sample_sphere(std::size_t d, URBG& rng) {
  detail::require(d >= 2, "sphere dimension must be >= 2");
  std::normal_distribution<double> gauss;
  std::vector<double> c(d);
  for (;;) {
    for (double& x : c) x = gauss(rng);
    const double n = norm(c);
    if (n > 1e-300) {
      for (double& x : c) x /= n;
      return UnitVector(std::move(c));
    }
  }
}

/// Uniform unit vector orthogonal to `axis` (uniform on the great subsphere).
template <class URBG>
UnitVector sample_orthogonal(const UnitVector& axis, URBG& rng) {
  std::normal_distribution<double> gauss;
  const std::size_t d = axis.dim();
  std::vector<double> c(d);
  for (;;) {
    for (double& x : c) x = gauss(rng);
    const double proj = dot(std::span<const double>(c), axis.coords());
    for (std::size_t i = 0; i < d; ++i) c[i] -= proj * axis[i];
    // Second pass removes the rounding residue of the first projection.
    const double proj2 = dot(std::span<const double>(c), axis.coords());
    for (std::size_t i = 0; i < d; ++i) c[i] -= proj2 * axis[i];
    const double n = norm(c);
    if (n > 1e-12) {
      for (double& x : c) x /= n;
      return UnitVector(std::move(c));
    }
  }
}

/// cos(theta) * a + sin(theta) * b for orthonormal a, b, renormalized.
inline UnitVector rotate_towards(const UnitVector& a, const UnitVector& b, double cos_theta) {
  const double s = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
  std::vector<double> c(a.dim());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = cos_theta * a[i] + s * b[i];
  return UnitVector::normalized(std::move(c));
}

}  // namespace anng
