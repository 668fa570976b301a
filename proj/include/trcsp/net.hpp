#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "trcsp/common.hpp"

namespace trcsp {

inline constexpr std::uint64_t kDefaultNetCap = 10'000'000;

/// Grid net covering the radius-R ball in R^k at distance delta.
///
/// Points are the multiples of spacing = delta / sqrt(k) with integer
/// coordinates in [-J, J], J = ceil(R sqrt(k) / delta), kept when their norm
/// is at most R + delta. Rounding any x with |x| <= R to the nearest grid
/// point moves it by at most delta / 2, so the net covers the ball.
/// Enumeration is lexicographic in the integer coordinates, first coordinate
/// most significant. k = 0 gives the single empty point.
struct EpsilonNet {
  int k = 0;
  double radius = 0;
  double mesh = 0;
  double spacing = 0;
  int half_width = 0;  ///< J
  Matrix points;       ///< k x size; column s is net point s

  Index size() const { return points.cols(); }
  Vector point(Index s) const { return points.col(s); }
};

namespace detail {

inline int net_half_width(int k, double radius, double mesh) {
  if (k == 0) return 0;
  return static_cast<int>(std::ceil(radius * std::sqrt(static_cast<double>(k)) / mesh - 1e-12));
}

// Largest squared integer norm kept by the clipping rule.
inline long long net_norm_budget(int k, double radius, double mesh) {
  if (k == 0) return 0;
  const double spacing = mesh / std::sqrt(static_cast<double>(k));
  const double r = (radius + mesh) / spacing;
  return static_cast<long long>(std::floor(r * r * (1.0 + 1e-12)));
}

}  // namespace detail

/// (1 + 2J)^k, the size of the unclipped grid.
inline double net_size_bound(int k, double radius, double mesh) {
  return std::pow(1.0 + 2.0 * detail::net_half_width(k, radius, mesh), k);
}

/// Exact number of points build_net would produce, counted without
/// enumerating them (dynamic program over the squared integer norm).
inline std::uint64_t net_size(int k, double radius, double mesh) {
  const int half = detail::net_half_width(k, radius, mesh);
  const long long budget = detail::net_norm_budget(k, radius, mesh);
  std::vector<double> ways(static_cast<std::size_t>(budget) + 1, 0.0);
  ways[0] = 1.0;
  for (int d = 0; d < k; ++d) {
    std::vector<double> next(ways.size(), 0.0);
    for (long long s = 0; s <= budget; ++s) {
      if (ways[s] == 0.0) continue;
      for (int j = -half; j <= half; ++j) {
        const long long t = s + static_cast<long long>(j) * j;
        if (t <= budget) next[t] += ways[s];
      }
    }
    ways = std::move(next);
  }
  double total = 0;
  for (double w : ways) total += w;
  return total > 1.8e19 ? UINT64_MAX : static_cast<std::uint64_t>(total);
}

inline EpsilonNet build_net(int k, double radius, double mesh, std::uint64_t cap = kDefaultNetCap) {
  if (k < 0) throw PreconditionError("build_net: k must be non-negative");
  if (!(radius > 0) || !(mesh > 0)) throw PreconditionError("build_net: radius and mesh must be positive");
  EpsilonNet net;
  net.k = k;
  net.radius = radius;
  net.mesh = mesh;
  net.half_width = detail::net_half_width(k, radius, mesh);
  net.spacing = k > 0 ? mesh / std::sqrt(static_cast<double>(k)) : 0.0;
  const std::uint64_t count = net_size(k, radius, mesh);
  if (count > cap) {
    throw SizeLimitExceeded("net of dimension " + std::to_string(k) + " would have " +
                            std::to_string(count) + " points, above the cap of " + std::to_string(cap));
  }
  net.points.resize(k, static_cast<Index>(count));
  if (k == 0) return net;

  const long long budget = detail::net_norm_budget(k, radius, mesh);
  std::vector<int> idx(k, -net.half_width);
  Index s = 0;
  for (;;) {
    long long norm2 = 0;
    for (int j : idx) norm2 += static_cast<long long>(j) * j;
    if (norm2 <= budget) {
      for (int d = 0; d < k; ++d) net.points(d, s) = idx[d] * net.spacing;
      ++s;
    }
    int d = k - 1;
    while (d >= 0 && idx[d] == net.half_width) idx[d--] = -net.half_width;
    if (d < 0) break;
    ++idx[d];
  }
  return net;
}

/// Ambient vector U * coords.
inline Vector lift(const Vector& coords, const Matrix& basis) {
  if (coords.size() != basis.cols()) {
    throw InvalidInput("lift: " + std::to_string(coords.size()) + " coordinates for a basis of rank " +
                       std::to_string(basis.cols()));
  }
  if (coords.size() == 0) return Vector::Zero(basis.rows());
  return basis * coords;
}

}  // namespace trcsp
