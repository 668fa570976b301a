#pragma once

// Test-side oracles. These deliberately avoid the library's own algorithms
// (no incremental brute force, no self-adjoint eigensolver) so that agreement
// means something.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <tuple>
#include <vector>

#include <Eigen/Eigenvalues>

#include "trcsp/csp.hpp"

namespace oracle {

using trcsp::Assignment;
using trcsp::CspInstance;
using trcsp::Index;
using trcsp::Matrix;
using trcsp::Vector;

inline trcsp::CspInstance make_instance(int n, int q,
                                        const std::vector<std::tuple<int, int, std::vector<trcsp::LabelPair>>>& edges) {
  CspInstance inst;
  inst.n = n;
  inst.q = q;
  for (const auto& [u, v, allowed] : edges) inst.edges.push_back({u, v, allowed});
  return inst;
}

inline trcsp::Graph make_graph(int n, const std::vector<std::pair<int, int>>& edges) { return {n, edges}; }

inline trcsp::Graph cycle(int n) {
  trcsp::Graph g{n, {}};
  for (int i = 0; i < n; ++i) g.edges.emplace_back(std::min(i, (i + 1) % n), std::max(i, (i + 1) % n));
  return g;
}

inline trcsp::Graph complete_bipartite(int a, int b) {
  trcsp::Graph g{a + b, {}};
  for (int i = 0; i < a; ++i)
    for (int j = 0; j < b; ++j) g.edges.emplace_back(i, a + j);
  return g;
}

/// Number of satisfied constraints, by direct scan of the allowed lists.
inline int count_satisfied(const CspInstance& inst, const Assignment& x) {
  int total = 0;
  for (const auto& e : inst.edges) {
    for (auto [a, b] : e.allowed) {
      if (x[e.u] == a && x[e.v] == b) {
        ++total;
        break;
      }
    }
  }
  return total;
}

/// Full enumeration of [q]^n by decoding each index; returns OPT.
inline int enumerate_opt(const CspInstance& inst) {
  long long total = 1;
  for (int i = 0; i < inst.n; ++i) total *= inst.q;
  int best = -1;
  Assignment x(inst.n);
  for (long long code = 0; code < total; ++code) {
    long long c = code;
    for (int i = inst.n - 1; i >= 0; --i) {
      x[i] = static_cast<int>(c % inst.q);
      c /= inst.q;
    }
    best = std::max(best, count_satisfied(inst, x));
  }
  return best;
}

/// max over x in {+-1}^n of x^T A x by enumeration of sign patterns.
inline double enumerate_quadratic(const Matrix& a) {
  const Index n = a.rows();
  double best = -1e300;
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << n); ++code) {
    double v = 0;
    for (Index i = 0; i < n; ++i) {
      const double xi = (code >> i) & 1 ? -1.0 : 1.0;
      for (Index j = 0; j < n; ++j) {
        const double xj = (code >> j) & 1 ? -1.0 : 1.0;
        v += xi * a(i, j) * xj;
      }
    }
    best = std::max(best, v);
  }
  return best;
}

/// Spectrum through the general (non-symmetric) eigensolver, sorted descending.
inline std::vector<double> general_spectrum(const Matrix& m) {
  Eigen::EigenSolver<Matrix> es(m, false);
  std::vector<double> out;
  for (Index i = 0; i < m.rows(); ++i) out.push_back(es.eigenvalues()(i).real());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

inline int count_at_least(const std::vector<double>& spec, double tau) {
  return static_cast<int>(std::count_if(spec.begin(), spec.end(), [&](double l) { return l >= tau - 1e-9; }));
}

inline int count_at_most(const std::vector<double>& spec, double tau) {
  return static_cast<int>(std::count_if(spec.begin(), spec.end(), [&](double l) { return l <= tau + 1e-9; }));
}

/// Eigenvalues of the normalized adjacency of C_n: cos(2 pi j / n), descending.
inline std::vector<double> cycle_spectrum(int n) {
  std::vector<double> out;
  for (int j = 0; j < n; ++j) out.push_back(std::cos(2.0 * std::numbers::pi * j / n));
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

/// Uniform sample from the radius-r ball in R^k.
inline Vector ball_sample(std::mt19937_64& rng, int k, double r) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector x(k);
  for (int i = 0; i < k; ++i) x(i) = g(rng);
  return x / x.norm() * r * std::pow(u(rng), 1.0 / k);
}

/// Distance from x to the nearest column of `points`, by linear scan.
inline double nearest_distance(const Matrix& points, const Vector& x) {
  double best = 1e300;
  for (Index s = 0; s < points.cols(); ++s) best = std::min(best, (points.col(s) - x).norm());
  return best;
}

inline Matrix random_symmetric(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Matrix m(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) m(i, j) = m(j, i) = g(rng);
  return m;
}

/// Largest |eigenvalue| by power iteration on M^2.
inline double power_norm(const Matrix& m, int iterations = 2000) {
  Vector x = Vector::Ones(m.rows()) + Vector::LinSpaced(m.rows(), 0.0, 1.0);
  double est = 0;
  for (int it = 0; it < iterations; ++it) {
    Vector y = m * (m * x);
    const double n = y.norm();
    if (n == 0) return 0;
    est = std::sqrt(n / x.norm());
    x = y / n;
  }
  return est;
}

}  // namespace oracle
