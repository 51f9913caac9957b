#pragma once

// The alpha-near-neighbour graph: an undirected graph on the data set with
// an edge {i, j} whenever <p_i, p_j> >= alpha.
//
// Each edge is stored in both endpoint buckets; buckets are sorted and
// duplicate-free. Deleted vertices keep their index (tombstones) until
// compact() is called.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "anng/error.hpp"
#include "anng/geometry.hpp"
#include "anng/instance.hpp"
#include "anng/vector.hpp"

namespace anng {

using index_t = std::uint32_t;
inline constexpr index_t kNoIndex = std::numeric_limits<index_t>::max();

struct GraphStats {
  std::size_t live_vertices = 0;
  std::size_t edge_count = 0;
  double bucket_min = 0.0;
  double bucket_mean = 0.0;
  double bucket_max = 0.0;
  double expected_bucket = 0.0;  // (live - 1) * C(alpha) with the exact finite-d cap
};

class AlphaGraph {
 public:
  AlphaGraph(double alpha, std::size_t dim) : alpha_(alpha), dim_(dim) {
    detail::require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
    detail::require(dim >= 2, "graph dimension must be >= 2");
  }

  /// O(n^2 d) pair scan. `threads` > 1 splits row tiles across workers; the
  /// result does not depend on the thread count.
  static AlphaGraph build(const Dataset& data, double alpha, unsigned threads = 1) {
    detail::require(data.size() >= 1, "cannot build a graph on an empty dataset");
    AlphaGraph g(alpha, data.dim());
    const std::size_t n = data.size();
    detail::require(n < kNoIndex, "dataset too large for 32-bit indices");
    g.coords_.assign(data.coords().begin(), data.coords().end());
    g.buckets_.assign(n, {});
    g.live_.assign(n, 1);
    g.live_count_ = n;
    g.scan_pairs(std::max(1u, threads));
    return g;
  }

  /// Adds a point and links it to every live vertex within alpha. Returns
  /// the new index.
  index_t insert(std::span<const double> p) {
    check_point(p);
    detail::require(slots() + 1 < kNoIndex, "graph is full");
    const auto idx = static_cast<index_t>(slots());
    coords_.insert(coords_.end(), p.begin(), p.end());
    buckets_.emplace_back();
    live_.push_back(0);
    link(idx);
    return idx;
  }

  index_t insert(const UnitVector& p) { return insert(p.coords()); }

  /// Re-occupies a tombstoned slot with new coordinates, keeping the index.
  void insert_at(index_t i, std::span<const double> p) {
    check_point(p);
    detail::require(i < slots() && !live_[i], "insert_at needs a tombstoned index");
    std::copy(p.begin(), p.end(), coords_.begin() + static_cast<std::ptrdiff_t>(std::size_t{i} * dim_));
    link(i);
  }

  /// Unlinks vertex i from all neighbour buckets (binary search in each) and
  /// empties its bucket. The slot becomes a tombstone.
  void remove(index_t i) {
    detail::require(is_live(i), "remove: index " + std::to_string(i) + " is not a live vertex");
    for (index_t j : buckets_[i]) {
      auto& nb = buckets_[j];
      auto it = std::lower_bound(nb.begin(), nb.end(), i);
      nb.erase(it);
    }
    buckets_[i].clear();
    buckets_[i].shrink_to_fit();
    live_[i] = 0;
    --live_count_;
  }

  /// Drops tombstones and renumbers the remaining vertices in order.
  /// Returns old index -> new index (kNoIndex for dropped slots).
  std::vector<index_t> compact() {
    std::vector<index_t> remap(slots(), kNoIndex);
    index_t next = 0;
    for (std::size_t i = 0; i < slots(); ++i)
      if (live_[i]) remap[i] = next++;
    std::vector<double> coords;
    coords.reserve(std::size_t{next} * dim_);
    std::vector<std::vector<index_t>> buckets;
    buckets.reserve(next);
    for (std::size_t i = 0; i < slots(); ++i) {
      if (!live_[i]) continue;
      auto p = point(static_cast<index_t>(i));
      coords.insert(coords.end(), p.begin(), p.end());
      auto& b = buckets.emplace_back(std::move(buckets_[i]));
      for (index_t& j : b) j = remap[j];  // monotone, so order is kept
    }
    coords_ = std::move(coords);
    buckets_ = std::move(buckets);
    live_.assign(next, 1);
    live_count_ = next;
    return remap;
  }

  double alpha() const noexcept { return alpha_; }
  std::size_t dim() const noexcept { return dim_; }
  /// Number of index slots, including tombstones.
  std::size_t slots() const noexcept { return buckets_.size(); }
  std::size_t live_count() const noexcept { return live_count_; }
  bool is_live(index_t i) const noexcept { return i < slots() && live_[i] != 0; }

  std::span<const index_t> bucket(index_t i) const noexcept { return buckets_[i]; }
  std::span<const double> point(index_t i) const noexcept {
    return std::span<const double>(coords_).subspan(std::size_t{i} * dim_, dim_);
  }

  GraphStats stats() const {
    GraphStats s;
    s.live_vertices = live_count_;
    if (live_count_ == 0) return s;
    std::size_t total = 0;
    std::size_t lo = std::numeric_limits<std::size_t>::max(), hi = 0;
    for (std::size_t i = 0; i < slots(); ++i) {
      if (!live_[i]) continue;
      const std::size_t b = buckets_[i].size();
      total += b;
      lo = std::min(lo, b);
      hi = std::max(hi, b);
    }
    s.edge_count = total / 2;
    s.bucket_min = static_cast<double>(lo);
    s.bucket_max = static_cast<double>(hi);
    s.bucket_mean = static_cast<double>(total) / static_cast<double>(live_count_);
    s.expected_bucket = static_cast<double>(live_count_ - 1) *
                        cap_volume_exact({alpha_, static_cast<int>(dim_)});
    return s;
  }

  /// Rebuilds a graph from stored buckets (deserialization). `live` marks
  /// tombstones. Buckets are validated for range, order and symmetry.
  static AlphaGraph from_parts(double alpha, std::size_t dim, std::vector<double> coords,
                               std::vector<std::vector<index_t>> buckets, std::vector<std::uint8_t> live) {
    AlphaGraph g(alpha, dim);
    const std::size_t n = buckets.size();
    detail::require(coords.size() == n * dim, "coordinate block does not match vertex count");
    detail::require(live.size() == n, "liveness mask does not match vertex count");
    g.coords_ = std::move(coords);
    g.buckets_ = std::move(buckets);
    g.live_ = std::move(live);
    g.live_count_ = static_cast<std::size_t>(std::count(g.live_.begin(), g.live_.end(), std::uint8_t{1}));
    for (std::size_t i = 0; i < n; ++i) {
      const auto& b = g.buckets_[i];
      detail::require(g.live_[i] || b.empty(), "tombstoned vertex has neighbours");
      for (std::size_t k = 0; k < b.size(); ++k) {
        detail::require(b[k] < n && b[k] != i && g.live_[b[k]], "bucket entry out of range");
        detail::require(k == 0 || b[k - 1] < b[k], "bucket is not strictly sorted");
        const auto& back = g.buckets_[b[k]];
        detail::require(std::binary_search(back.begin(), back.end(), static_cast<index_t>(i)),
                        "bucket lists are not symmetric");
      }
    }
    return g;
  }

  friend bool operator==(const AlphaGraph& a, const AlphaGraph& b) {
    return a.alpha_ == b.alpha_ && a.dim_ == b.dim_ && a.coords_ == b.coords_ && a.live_ == b.live_ &&
           a.buckets_ == b.buckets_;
  }

 private:
  void check_point(std::span<const double> p) const {
    detail::require(p.size() == dim_, "point dimension does not match graph");
    detail::require(std::abs(norm(p) - 1.0) <= kStoredUnitTolerance, "point is not unit norm");
  }

  // Links slot i (coordinates already in place, currently not live) with
  // every live vertex.
  void link(index_t i) {
    auto p = point(i);
    auto& own = buckets_[i];
    own.clear();
    for (std::size_t j = 0; j < slots(); ++j) {
      if (j == i || !live_[j]) continue;
      const auto jj = static_cast<index_t>(j);
      if (dot(p, point(jj)) >= alpha_) {
        own.push_back(jj);
        auto& nb = buckets_[j];
        nb.insert(std::upper_bound(nb.begin(), nb.end(), i), i);
      }
    }
    live_[i] = 1;
    ++live_count_;
  }

  static constexpr std::size_t kTile = 64;

  // Pairs (i, j), i < j, for rows i in [row_begin, row_end), in the order
  // (column j ascending, row i ascending).
  void scan_tile(std::size_t row_begin, std::size_t row_end, std::vector<std::pair<index_t, index_t>>& out) const {
    const std::size_t n = slots();
    for (std::size_t j = row_begin + 1; j < n; ++j) {
      auto pj = point(static_cast<index_t>(j));
      const std::size_t stop = std::min(row_end, j);
      for (std::size_t i = row_begin; i < stop; ++i)
        if (dot(point(static_cast<index_t>(i)), pj) >= alpha_)
          out.emplace_back(static_cast<index_t>(i), static_cast<index_t>(j));
    }
  }

  void scan_pairs(unsigned threads) {
    const std::size_t n = slots();
    const std::size_t tiles = (n + kTile - 1) / kTile;
    auto emit = [this](const std::vector<std::pair<index_t, index_t>>& pairs) {
      for (auto [i, j] : pairs) {
        buckets_[i].push_back(j);
        buckets_[j].push_back(i);
      }
    };
    if (threads <= 1 || tiles <= 1) {
      std::vector<std::pair<index_t, index_t>> pairs;
      for (std::size_t t = 0; t < tiles; ++t) {
        pairs.clear();
        scan_tile(t * kTile, std::min(n, (t + 1) * kTile), pairs);
        emit(pairs);
      }
    } else {
      // Workers fill per-tile lists; merging in tile order reproduces the
      // sequential push order exactly.
      std::vector<std::vector<std::pair<index_t, index_t>>> per_tile(tiles);
      std::vector<std::thread> pool;
      const unsigned w = std::min<unsigned>(threads, static_cast<unsigned>(tiles));
      for (unsigned k = 0; k < w; ++k)
        pool.emplace_back([&, k] {
          for (std::size_t t = k; t < tiles; t += w)
            scan_tile(t * kTile, std::min(n, (t + 1) * kTile), per_tile[t]);
        });
      for (auto& th : pool) th.join();
      for (auto& pairs : per_tile) {
        emit(pairs);
        pairs = {};
      }
    }
    // Tile order delivers every bucket in ascending order.
  }

  double alpha_;
  std::size_t dim_;
  std::vector<double> coords_;
  std::vector<std::vector<index_t>> buckets_;
  std::vector<std::uint8_t> live_;
  std::size_t live_count_ = 0;
};

}  // namespace anng
