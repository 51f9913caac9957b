#pragma once

// Brute-force adjacency oracle and a random operation-sequence driver for
// AlphaGraph, shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "anng/geometry.hpp"
#include "anng/graph.hpp"
#include "anng/instance.hpp"
#include "anng/random.hpp"
#include "anng/vector.hpp"

namespace graph_oracle {

using anng::AlphaGraph;
using anng::index_t;

/// Recomputes every bucket from the coordinates of the live slots.
inline bool matches(const AlphaGraph& g) {
  for (std::size_t i = 0; i < g.slots(); ++i) {
    const auto vi = static_cast<index_t>(i);
    std::vector<index_t> want;
    if (g.is_live(vi)) {
      for (std::size_t j = 0; j < g.slots(); ++j) {
        const auto vj = static_cast<index_t>(j);
        if (j != i && g.is_live(vj) && anng::dot(g.point(vi), g.point(vj)) >= g.alpha()) want.push_back(vj);
      }
    }
    const auto got = g.bucket(vi);
    if (!std::equal(got.begin(), got.end(), want.begin(), want.end())) return false;
  }
  std::size_t live = 0;
  for (std::size_t i = 0; i < g.slots(); ++i) live += g.is_live(static_cast<index_t>(i));
  return live == g.live_count();
}

/// alpha with cap_volume_exact(alpha, d) = p, by bisection.
inline double alpha_for_cap(double p, int d) {
  double lo = 0.0, hi = 1.0 - 1e-15;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (anng::cap_volume_exact({mid, d}) > p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Runs `count` random build/insert/delete/insert_at/compact sequences on
/// at most 64 vertices, checking the oracle after every operation. Returns
/// the number of sequences that matched throughout.
inline std::size_t run_sequences(std::size_t count, std::uint64_t seed) {
  std::size_t passed = 0;
  for (std::size_t s = 0; s < count; ++s) {
    anng::Engine rng = anng::make_engine(seed, s);
    std::uniform_int_distribution<std::size_t> dim_pick(2, 6);
    const std::size_t d = dim_pick(rng);
    const double alpha = std::uniform_real_distribution<double>(0.02, 0.95)(rng);
    const std::size_t n0 = std::uniform_int_distribution<std::size_t>(1, 40)(rng);
    AlphaGraph g = AlphaGraph::build(anng::gen_uniform(n0, d, rng()), alpha);
    bool ok = matches(g);
    const int ops = std::uniform_int_distribution<int>(1, 30)(rng);
    for (int k = 0; k < ops && ok; ++k) {
      const int op = std::uniform_int_distribution<int>(0, 9)(rng);
      auto pick_slot = [&] { return static_cast<index_t>(std::uniform_int_distribution<std::size_t>(0, g.slots() - 1)(rng)); };
      if (op <= 3 && g.slots() < 64) {
        g.insert(anng::sample_sphere(d, rng));
      } else if (op == 4 && g.slots() < 64 && g.live_count() > 0) {
        // Exact copy of a live point: inner product 1, always an edge.
        index_t v = pick_slot();
        while (!g.is_live(v)) v = pick_slot();
        const std::vector<double> p(g.point(v).begin(), g.point(v).end());
        const index_t k2 = g.insert(p);
        const auto b = g.bucket(k2);
        ok = ok && std::binary_search(b.begin(), b.end(), v);
      } else if (op <= 7 && g.live_count() > 0) {
        index_t v = pick_slot();
        while (!g.is_live(v)) v = pick_slot();
        g.remove(v);
        for (std::size_t i = 0; i < g.slots() && ok; ++i) {
          const auto b = g.bucket(static_cast<index_t>(i));
          ok = std::find(b.begin(), b.end(), v) == b.end();
        }
      } else if (op == 8 && g.live_count() < g.slots()) {
        index_t v = pick_slot();
        while (g.is_live(v)) v = pick_slot();
        g.insert_at(v, anng::sample_sphere(d, rng).coords());
      } else if (op == 9) {
        g.compact();
      }
      ok = ok && matches(g);
    }
    passed += ok;
  }
  return passed;
}

}  // namespace graph_oracle
