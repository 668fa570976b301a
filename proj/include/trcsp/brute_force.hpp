#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "trcsp/csp.hpp"

namespace trcsp {

inline constexpr double kBruteForceCap = 1e7;

struct BruteForceResult {
  int opt = 0;
  Assignment assignment;  ///< lexicographically smallest optimum
};

namespace detail {

inline void require_enumerable(double count, const char* who) {
  if (count > kBruteForceCap) {
    throw SizeLimitExceeded(std::string(who) + ": " + std::to_string(static_cast<long long>(count)) +
                            " assignments exceed the enumeration cap of 10000000");
  }
}

}  // namespace detail

/// Exhaustive maximum of evaluate() over [q]^n. Assignments are visited in
/// lexicographic order (variable 0 most significant) and the score is
/// updated incrementally from the edges touching each changed variable.
inline BruteForceResult brute_force(const CspInstance& inst) {
  require_valid(inst);
  detail::require_enumerable(std::pow(static_cast<double>(inst.q), inst.n), "brute_force");

  std::vector<std::vector<int>> incident(inst.n);
  for (std::size_t e = 0; e < inst.edges.size(); ++e) {
    incident[inst.edges[e].u].push_back(static_cast<int>(e));
    incident[inst.edges[e].v].push_back(static_cast<int>(e));
  }
  // Truth tables make the inner update a lookup.
  std::vector<std::vector<char>> table(inst.edges.size(), std::vector<char>(inst.q * inst.q, 0));
  for (std::size_t e = 0; e < inst.edges.size(); ++e) {
    for (auto [a, b] : inst.edges[e].allowed) table[e][a * inst.q + b] = 1;
  }
  auto sat = [&](int e, const Assignment& x) {
    const auto& edge = inst.edges[e];
    return static_cast<int>(table[e][x[edge.u] * inst.q + x[edge.v]]);
  };

  Assignment x(inst.n, 0);
  int score = evaluate(inst, x);
  BruteForceResult best{score, x};
  for (;;) {
    int var = inst.n - 1;
    while (var >= 0 && x[var] == inst.q - 1) --var;
    if (var < 0) break;
    // Reset the tail to 0 and bump x[var], one variable at a time.
    for (int i = inst.n - 1; i >= var; --i) {
      const int next = i == var ? x[i] + 1 : 0;
      if (next == x[i]) continue;
      for (int e : incident[i]) score -= sat(e, x);
      x[i] = next;
      for (int e : incident[i]) score += sat(e, x);
    }
    if (score > best.opt) best = {score, x};
  }
  return best;
}

struct QuadraticOptimum {
  double value = 0;
  std::vector<int> x;  ///< +-1 entries; lexicographically smallest in the order +1 < -1
};

/// max over x in {+-1}^n of x^T A x, diagonal included.
inline QuadraticOptimum brute_force_quadratic(const SymMatrix& a) {
  const Index n = a.dim();
  if (n < 1) throw InvalidInput("brute_force_quadratic: empty matrix");
  detail::require_enumerable(std::pow(2.0, static_cast<double>(n)), "brute_force_quadratic");
  const Matrix& m = a.dense();
  std::vector<int> x(n, 1);
  QuadraticOptimum best{-std::numeric_limits<double>::infinity(), x};
  const std::uint64_t total = std::uint64_t{1} << n;
  Vector xv(n);
  for (std::uint64_t code = 0; code < total; ++code) {
    for (Index i = 0; i < n; ++i) x[i] = (code >> (n - 1 - i)) & 1 ? -1 : 1;
    for (Index i = 0; i < n; ++i) xv(i) = x[i];
    const double value = xv.dot(m * xv);
    if (value > best.value) best = {value, x};
  }
  return best;
}

}  // namespace trcsp
