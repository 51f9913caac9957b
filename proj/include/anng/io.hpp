#pragma once

// Binary dataset and graph files.
//
// Dataset: "ANNG", u16 version, u16 flags (bit 0: planted), u64 n, u32 d,
// n*d f32 row-major; if planted: u64 index, f64 gamma*, d f32 query.
// Graph: "ANNGGRPH", u16 version, f64 alpha, u64 n, then per vertex a u32
// bucket length followed by that many u64 neighbour indices. A length of
// 0xFFFFFFFF marks a tombstone. Coordinates live in the dataset file.
// Everything is little-endian.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "anng/error.hpp"
#include "anng/graph.hpp"
#include "anng/instance.hpp"

namespace anng {

inline constexpr std::uint16_t kDatasetVersion = 1;
inline constexpr std::uint16_t kGraphVersion = 1;
inline constexpr std::uint32_t kTombstoneLength = 0xFFFFFFFFu;

namespace detail {

template <class T>
void put_le(std::ostream& os, T v) {
  std::uint64_t bits = 0;
  if constexpr (std::is_floating_point_v<T>) {
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    bits = std::bit_cast<U>(v);
  } else {
    bits = static_cast<std::uint64_t>(v);
  }
  std::array<char, sizeof(T)> buf;
  for (std::size_t k = 0; k < sizeof(T); ++k) buf[k] = static_cast<char>((bits >> (8 * k)) & 0xFF);
  os.write(buf.data(), buf.size());
}

template <class T>
T get_le(std::istream& is) {
  std::array<unsigned char, sizeof(T)> buf;
  if (!is.read(reinterpret_cast<char*>(buf.data()), buf.size())) throw format_error("truncated file");
  std::uint64_t bits = 0;
  for (std::size_t k = 0; k < sizeof(T); ++k) bits |= std::uint64_t{buf[k]} << (8 * k);
  if constexpr (std::is_floating_point_v<T>) {
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    return std::bit_cast<T>(static_cast<U>(bits));
  } else {
    return static_cast<T>(bits);
  }
}

inline void expect_magic(std::istream& is, std::string_view magic) {
  std::string got(magic.size(), '\0');
  if (!is.read(got.data(), static_cast<std::streamsize>(got.size())) || got != magic)
    throw format_error("bad magic: expected " + std::string(magic));
}

inline void check_ok(const std::ostream& os) {
  if (!os) throw io_error("write failed");
}

}  // namespace detail

/// Rounds every coordinate (and the planted query) to f32, the precision of
/// the file format. The planted gamma* is kept as recorded.
inline Dataset quantize_f32(const Dataset& ds) {
  std::vector<double> c(ds.coords().begin(), ds.coords().end());
  for (double& x : c) x = static_cast<float>(x);
  std::optional<PlantedInfo> planted;
  if (ds.planted()) {
    std::vector<double> q(ds.planted()->query.coords().begin(), ds.planted()->query.coords().end());
    for (double& x : q) x = static_cast<float>(x);
    planted = PlantedInfo{UnitVector(std::move(q), kStoredUnitTolerance), ds.planted()->planted_index,
                          ds.planted()->gamma_star};
  }
  return Dataset(ds.dim(), std::move(c), std::move(planted), kStoredUnitTolerance);
}

inline void write_dataset(std::ostream& os, const Dataset& ds) {
  os.write("ANNG", 4);
  detail::put_le<std::uint16_t>(os, kDatasetVersion);
  detail::put_le<std::uint16_t>(os, ds.planted() ? 1 : 0);
  detail::put_le<std::uint64_t>(os, ds.size());
  detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(ds.dim()));
  for (double x : ds.coords()) detail::put_le<float>(os, static_cast<float>(x));
  if (const auto& p = ds.planted()) {
    detail::put_le<std::uint64_t>(os, p->planted_index);
    detail::put_le<double>(os, p->gamma_star);
    for (double x : p->query.coords()) detail::put_le<float>(os, static_cast<float>(x));
  }
  detail::check_ok(os);
}

inline Dataset read_dataset(std::istream& is) {
  detail::expect_magic(is, "ANNG");
  const auto version = detail::get_le<std::uint16_t>(is);
  if (version != kDatasetVersion) throw format_error("unsupported dataset version " + std::to_string(version));
  const auto flags = detail::get_le<std::uint16_t>(is);
  if (flags & ~std::uint16_t{1}) throw format_error("unknown dataset flags");
  const auto n = detail::get_le<std::uint64_t>(is);
  const auto d = detail::get_le<std::uint32_t>(is);
  if (d < 2) throw format_error("dataset dimension must be >= 2");
  if (n > (std::uint64_t{1} << 40) / d) throw format_error("dataset header is implausibly large");
  std::vector<double> coords(static_cast<std::size_t>(n) * d);
  for (double& x : coords) x = detail::get_le<float>(is);
  std::optional<PlantedInfo> planted;
  if (flags & 1) {
    const auto idx = detail::get_le<std::uint64_t>(is);
    const auto gs = detail::get_le<double>(is);
    std::vector<double> q(d);
    for (double& x : q) x = detail::get_le<float>(is);
    try {
      planted = PlantedInfo{UnitVector(std::move(q), kStoredUnitTolerance), static_cast<std::size_t>(idx), gs};
    } catch (const validation_error& e) {
      throw format_error(std::string("bad planted query: ") + e.what());
    }
  }
  try {
    return Dataset(d, std::move(coords), std::move(planted), kStoredUnitTolerance);
  } catch (const validation_error& e) {
    throw format_error(std::string("bad dataset payload: ") + e.what());
  }
}

inline void write_graph(std::ostream& os, const AlphaGraph& g) {
  os.write("ANNGGRPH", 8);
  detail::put_le<std::uint16_t>(os, kGraphVersion);
  detail::put_le<double>(os, g.alpha());
  detail::put_le<std::uint64_t>(os, g.slots());
  for (std::size_t i = 0; i < g.slots(); ++i) {
    const auto v = static_cast<index_t>(i);
    if (!g.is_live(v)) {
      detail::put_le<std::uint32_t>(os, kTombstoneLength);
      continue;
    }
    const auto b = g.bucket(v);
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(b.size()));
    for (index_t j : b) detail::put_le<std::uint64_t>(os, j);
  }
  detail::check_ok(os);
}

/// Reads buckets and attaches the coordinates of `points`, which must have
/// one row per graph slot.
inline AlphaGraph read_graph(std::istream& is, const Dataset& points) {
  detail::expect_magic(is, "ANNGGRPH");
  const auto version = detail::get_le<std::uint16_t>(is);
  if (version != kGraphVersion) throw format_error("unsupported graph version " + std::to_string(version));
  const auto alpha = detail::get_le<double>(is);
  const auto n = detail::get_le<std::uint64_t>(is);
  if (n != points.size()) throw format_error("graph has " + std::to_string(n) + " vertices but dataset has " +
                                             std::to_string(points.size()) + " points");
  std::vector<std::vector<index_t>> buckets(n);
  std::vector<std::uint8_t> live(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto len = detail::get_le<std::uint32_t>(is);
    if (len == kTombstoneLength) {
      live[i] = 0;
      continue;
    }
    if (len >= n) throw format_error("bucket length exceeds vertex count");
    buckets[i].resize(len);
    for (auto& j : buckets[i]) {
      const auto v = detail::get_le<std::uint64_t>(is);
      if (v >= n) throw format_error("neighbour index out of range");
      j = static_cast<index_t>(v);
    }
  }
  try {
    return AlphaGraph::from_parts(alpha, points.dim(), std::vector<double>(points.coords().begin(), points.coords().end()),
                                  std::move(buckets), std::move(live));
  } catch (const validation_error& e) {
    throw format_error(std::string("bad graph payload: ") + e.what());
  }
}

/// Every slot of the graph, tombstones included, as a dataset.
inline Dataset graph_points(const AlphaGraph& g) {
  std::vector<double> c;
  c.reserve(g.slots() * g.dim());
  for (std::size_t i = 0; i < g.slots(); ++i) {
    const auto p = g.point(static_cast<index_t>(i));
    c.insert(c.end(), p.begin(), p.end());
  }
  return Dataset(g.dim(), std::move(c), std::nullopt, kStoredUnitTolerance);
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw io_error("cannot open " + path.string() + " for writing");
  return os;
}

inline std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw io_error("cannot open " + path.string());
  return is;
}

}  // namespace detail

inline void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
  auto os = detail::open_out(path);
  write_dataset(os, ds);
}

inline Dataset load_dataset(const std::filesystem::path& path) {
  auto is = detail::open_in(path);
  return read_dataset(is);
}

inline void save_graph(const std::filesystem::path& path, const AlphaGraph& g) {
  auto os = detail::open_out(path);
  write_graph(os, g);
}

inline AlphaGraph load_graph(const std::filesystem::path& path, const Dataset& points) {
  auto is = detail::open_in(path);
  return read_graph(is, points);
}

}  // namespace anng
