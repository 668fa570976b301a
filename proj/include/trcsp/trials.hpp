#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>

#include "trcsp/certificate.hpp"
#include "trcsp/generate.hpp"

namespace trcsp {

// Random inputs satisfying the preconditions of verify_rank_bound and
// rank_certificate: A entrywise non-negative with ||A|| <= 1, and B with
// |B| <= A entrywise (blockwise for label-extended pairs).

struct AdmissiblePair {
  SymMatrix a;
  SymMatrix b;
  int q = 1;
  std::string kind;
};

namespace detail {

inline Matrix random_graph_adjacency(std::mt19937_64& rng, int n, double p) {
  std::bernoulli_distribution edge(p);
  Matrix a = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (edge(rng)) a(i, j) = a(j, i) = 1.0;
  return a;
}

// D^-1/2 A D^-1/2 with isolated vertices left as zero rows.
inline Matrix normalize_rows(const Matrix& a) {
  const Vector d = a.rowwise().sum();
  Vector s(d.size());
  for (Index i = 0; i < d.size(); ++i) s(i) = d(i) > 0 ? 1.0 / std::sqrt(d(i)) : 0.0;
  return symmetrize_upper(s.asDiagonal() * a * s.asDiagonal());
}

// Each entry of A multiplied by a random sign and, half the time, a random
// magnitude in [0, 1].
inline Matrix random_dominated(std::mt19937_64& rng, const Matrix& a) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  const bool full_magnitude = coin(rng);
  Matrix b = Matrix::Zero(a.rows(), a.cols());
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i <= j; ++i) {
      const double sign = coin(rng) ? 1.0 : -1.0;
      const double mag = full_magnitude ? 1.0 : unit(rng);
      b(i, j) = b(j, i) = sign * mag * a(i, j);
    }
  }
  return b;
}

}  // namespace detail

/// dim uniform in [2, max_dim]. A is one of: a normalized G(n, p) adjacency,
/// a normalized random-regular adjacency, or a dense non-negative matrix
/// scaled to unit norm.
inline AdmissiblePair random_admissible_pair(std::mt19937_64& rng, int max_dim) {
  if (max_dim < 2) throw PreconditionError("random_admissible_pair: max_dim must be >= 2");
  std::uniform_int_distribution<int> dim(2, max_dim);
  std::uniform_int_distribution<int> family(0, 2);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = dim(rng);
  AdmissiblePair out;
  Matrix a;
  switch (family(rng)) {
    case 0: {
      a = detail::normalize_rows(detail::random_graph_adjacency(rng, n, 0.1 + 0.6 * unit(rng)));
      out.kind = "gnp";
      break;
    }
    case 1: {
      const int d = std::max(1, std::min(n - 1, 1 + static_cast<int>(unit(rng) * 5)));
      if ((n * d) % 2 != 0 || d >= n) {
        a = detail::normalize_rows(detail::random_graph_adjacency(rng, n, 0.3));
        out.kind = "gnp";
        break;
      }
      a = Matrix::Zero(n, n);
      for (auto [u, v] : detail::random_regular_edges(rng, n, d)) a(u, v) = a(v, u) = 1.0 / d;
      out.kind = "regular";
      break;
    }
    default: {
      a = Matrix::Zero(n, n);
      for (int j = 0; j < n; ++j)
        for (int i = 0; i <= j; ++i) a(i, j) = a(j, i) = unit(rng);
      const double norm = operator_norm(SymMatrix(a));
      if (norm > 0) a = symmetrize_upper(a / norm);
      out.kind = "dense";
      break;
    }
  }
  out.b = SymMatrix(detail::random_dominated(rng, a));
  out.a = SymMatrix(std::move(a));
  return out;
}

/// A = normalized adjacency of a random CSP's constraint graph (isolated
/// variables removed), B = the label-extended matrix carrying A_ij on every
/// allowed pair of edge ij.
inline AdmissiblePair random_label_extended_pair(std::mt19937_64& rng, int q, int max_n) {
  if (max_n < 3) throw PreconditionError("random_label_extended_pair: max_n must be >= 3");
  std::uniform_int_distribution<int> vars(3, max_n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (;;) {
    const int n = vars(rng);
    const int max_m = n * (n - 1) / 2;
    GenParams p;
    p.n = n;
    p.q = q;
    p.m = std::max(1, static_cast<int>(max_m * (0.2 + 0.6 * unit(rng))));
    p.density = 0.2 + 0.6 * unit(rng);
    const bool planted = unit(rng) < 0.5;
    const auto inst = strip_isolated(
        generate(planted ? GenKind::PlantedAssignment : GenKind::RandomCsp, p, rng()).instance).core;
    if (inst.n < 2) continue;
    const Matrix a = normalized_adjacency(inst).dense();
    Matrix b = Matrix::Zero(static_cast<Index>(inst.n) * q, static_cast<Index>(inst.n) * q);
    for (const auto& e : inst.edges) {
      for (auto [x, y] : e.allowed) {
        const Index r = label_index(q, e.u, x);
        const Index s = label_index(q, e.v, y);
        b(r, s) = b(s, r) = a(e.u, e.v);
      }
    }
    AdmissiblePair out;
    out.a = SymMatrix(a);
    out.b = SymMatrix(std::move(b));
    out.q = q;
    out.kind = planted ? "label-extended-planted" : "label-extended-random";
    return out;
  }
}

struct CertificateInput {
  AdmissiblePair pair;
  double lambda = 0;
  int t = 1;
};

/// Admissible pair of dimension <= max_dim with t in [1, min(6, #eigenvalues
/// of B >= 0)] and lambda the t-th largest eigenvalue of B (clamped at 0).
inline CertificateInput random_certificate_input(std::mt19937_64& rng, int max_dim) {
  for (;;) {
    CertificateInput in;
    in.pair = random_admissible_pair(rng, max_dim);
    const auto spec = eig_sym(in.pair.b);
    int nonneg = 0;
    while (nonneg < spec.dim() && spec.values(nonneg) >= 0.0) ++nonneg;
    if (nonneg == 0) continue;
    std::uniform_int_distribution<int> pick(1, std::min(6, nonneg));
    in.t = pick(rng);
    in.lambda = std::max(0.0, spec.values(in.t - 1));
    return in;
  }
}

}  // namespace trcsp
