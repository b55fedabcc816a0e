#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <string>

#include "wakeplan/error.hpp"

namespace wakeplan {

using Vec3 = std::array<double, 3>;

// Cubic lattice of n^3 nodes spanning `extent` meters per axis. The first and
// last node of each axis lie on the domain boundary, so spacing = extent/(n-1).
struct GridSpec {
  int nx = 128;
  int ny = 128;
  int nz = 128;
  double extent = 155.0;

  static GridSpec cube(int n, double extent = 155.0) { return {n, n, n, extent}; }

  double spacing() const { return extent / static_cast<double>(nx - 1); }
  std::size_t size() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
           static_cast<std::size_t>(nz);
  }

  void validate() const {
    if (nx < 2 || ny < 2 || nz < 2)
      throw ConfigError("grid: every axis needs at least 2 nodes");
    if (nx != ny || ny != nz)
      throw ConfigError("grid: only cubic grids are supported (nx == ny == nz)");
    if (!(extent > 0.0) || !std::isfinite(extent))
      throw ConfigError("grid: extent must be positive and finite");
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct GridNode {
  int ix = 0;
  int iy = 0;
  int iz = 0;

  friend auto operator<=>(const GridNode&, const GridNode&) = default;
  friend bool operator==(const GridNode&, const GridNode&) = default;
};

inline std::string to_string(const GridNode& n) {
  return "(" + std::to_string(n.ix) + "," + std::to_string(n.iy) + "," + std::to_string(n.iz) + ")";
}

inline bool in_bounds(const GridSpec& g, const GridNode& n) {
  return n.ix >= 0 && n.iy >= 0 && n.iz >= 0 && n.ix < g.nx && n.iy < g.ny && n.iz < g.nz;
}

// Linear index, x fastest.
inline std::size_t linear_index(const GridSpec& g, const GridNode& n) {
  return static_cast<std::size_t>(n.ix) +
         static_cast<std::size_t>(g.nx) *
             (static_cast<std::size_t>(n.iy) + static_cast<std::size_t>(g.ny) * static_cast<std::size_t>(n.iz));
}

inline GridNode node_at(const GridSpec& g, std::size_t idx) {
  const auto nx = static_cast<std::size_t>(g.nx);
  const auto ny = static_cast<std::size_t>(g.ny);
  return {static_cast<int>(idx % nx), static_cast<int>((idx / nx) % ny),
          static_cast<int>(idx / (nx * ny))};
}

inline Vec3 position(const GridSpec& g, const GridNode& n) {
  const double h = g.spacing();
  return {h * n.ix, h * n.iy, h * n.iz};
}

// Nearest node to a physical point, clamped into the grid.
inline GridNode nearest_node(const GridSpec& g, const Vec3& p) {
  const double h = g.spacing();
  auto snap = [h](double x, int n) {
    const long i = std::lround(x / h);
    return static_cast<int>(std::clamp<long>(i, 0, n - 1));
  };
  return {snap(p[0], g.nx), snap(p[1], g.ny), snap(p[2], g.nz)};
}

inline int chebyshev(const GridNode& a, const GridNode& b) {
  return std::max({std::abs(a.ix - b.ix), std::abs(a.iy - b.iy), std::abs(a.iz - b.iz)});
}

// 26-connectivity: distinct nodes at Chebyshev distance 1.
inline bool are_neighbors(const GridNode& a, const GridNode& b) { return chebyshev(a, b) == 1; }

inline double euclid(const GridNode& a, const GridNode& b, double spacing) {
  const double dx = a.ix - b.ix;
  const double dy = a.iy - b.iy;
  const double dz = a.iz - b.iz;
  return spacing * std::sqrt(dx * dx + dy * dy + dz * dz);
}

}  // namespace wakeplan
