#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "trcsp/spectral.hpp"

namespace trcsp {

// Threshold-rank comparison between a non-negative matrix A and a matrix B
// it entrywise dominates (|B_ij| <= A_ij). Two operations live here: a
// constructive witness for the rank lower bound, and an empirical check of
// the resulting rank inequality.

struct CertificateReport {
  double lambda = 0;
  int t = 0;
  Matrix v;               ///< t^2 x n witness; column i is w_i (x) w_i / |w_i|
  double inner = 0;       ///< <A, V^T V>, must be >= lambda^2
  double frobenius2 = 0;  ///< ||V^T V||_F^2, must be <= 1/t
  double trace = 0;       ///< Tr(V^T V), must equal 1
  double tolerance = 0;
  bool inner_ok = false;
  bool frobenius_ok = false;
  bool trace_ok = false;

  bool pass() const { return inner_ok && frobenius_ok && trace_ok; }
};

namespace detail {

inline void require_dominance(const Matrix& a, const Matrix& b, const char* who) {
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      if (a(i, j) < 0) {
        throw PreconditionError(std::string(who) + ": A has a negative entry at (" + std::to_string(i) +
                                "," + std::to_string(j) + ")");
      }
      if (std::abs(b(i, j)) > a(i, j) + 1e-12) {
        throw PreconditionError(std::string(who) + ": |B| exceeds A at (" + std::to_string(i) + "," +
                                std::to_string(j) + ")");
      }
    }
  }
}

inline void require_norm_at_most_one(const SymMatrix& a, const char* who) {
  if (operator_norm(a) > 1.0 + 1e-9) throw PreconditionError(std::string(who) + ": ||A|| exceeds 1");
}

}  // namespace detail

/// Builds V from t orthonormal eigenvectors of B with eigenvalue >= lambda and
/// measures the three certificate quantities at tolerance 1e-9 * dim.
inline CertificateReport rank_certificate(const SymMatrix& a, const SymMatrix& b, double lambda, int t) {
  if (a.dim() != b.dim()) throw PreconditionError("rank_certificate: A and B differ in dimension");
  if (t < 1) throw PreconditionError("rank_certificate: t must be positive");
  if (lambda < 0) throw PreconditionError("rank_certificate: lambda must be non-negative");
  detail::require_dominance(a.dense(), b.dense(), "rank_certificate");
  detail::require_norm_at_most_one(a, "rank_certificate");
  const auto spec = eig_sym(b);
  int available = 0;
  while (available < spec.dim() && spec.values(available) >= lambda - kEigenCountTolerance) ++available;
  if (available < t) {
    throw PreconditionError("rank_certificate: B has only " + std::to_string(available) +
                            " eigenvalues >= lambda, need " + std::to_string(t));
  }
  const Index n = a.dim();
  const Matrix u = spec.vectors.leftCols(t) / std::sqrt(static_cast<double>(t));

  CertificateReport r;
  r.lambda = lambda;
  r.t = t;
  r.v = Matrix::Zero(static_cast<Index>(t) * t, n);
  for (Index i = 0; i < n; ++i) {
    const Vector w = u.row(i).transpose();
    const double norm = w.norm();
    if (norm == 0.0) continue;
    for (int s = 0; s < t; ++s)
      for (int p = 0; p < t; ++p) r.v(static_cast<Index>(s) * t + p, i) = w(s) * w(p) / norm;
  }
  const Matrix gram = r.v.transpose() * r.v;
  r.inner = (a.dense().array() * gram.array()).sum();
  r.frobenius2 = gram.squaredNorm();
  r.trace = gram.trace();
  r.tolerance = 1e-9 * static_cast<double>(n);
  r.inner_ok = r.inner >= lambda * lambda - r.tolerance;
  r.frobenius_ok = r.frobenius2 <= 1.0 / t + r.tolerance;
  r.trace_ok = std::abs(r.trace - 1.0) <= r.tolerance;
  return r;
}

struct BoundReport {
  double tau = 0;
  double sigma = 0;
  int q = 1;                 ///< 1 for same-size A, B; alphabet size for label-extended B
  double threshold_b = 0;    ///< q * sqrt(tau (1 - sigma) + sigma)
  int rank_a = 0;            ///< rank_{>= tau}(A)
  int rank_b = 0;            ///< rank_{>= threshold_b}(B)
  double bound = 0;          ///< rank_a / sigma^2
  bool holds = false;

  /// Special case sigma = tau = eps^2: rank_{>= 2 q eps}(B) <= rank_{>= eps^2}(A) / eps^4.
  struct Corollary {
    double eps = 0;
    int rank_a = 0;
    int rank_b = 0;
    double bound = 0;
    bool holds = false;
  };
  std::optional<Corollary> corollary;
};

/// Checks rank_{>= q sqrt(tau(1-sigma)+sigma)}(B) <= rank_{>= tau}(A) / sigma^2.
/// A is n x n, non-negative, ||A|| <= 1. B is either n x n with |B| <= A, or
/// nq x nq with |B_{(i,a),(j,b)}| <= A_ij (label-extended form). When `eps`
/// is given the corollary form at sigma = tau = eps^2 is evaluated as well.
inline BoundReport verify_rank_bound(const SymMatrix& a, const SymMatrix& b, double tau, double sigma,
                                     std::optional<double> eps = std::nullopt, int q = 1) {
  if (q < 1) throw PreconditionError("verify_rank_bound: q must be >= 1");
  if (b.dim() != a.dim() * q) {
    throw PreconditionError("verify_rank_bound: B must have dimension q * dim(A)");
  }
  if (!(tau > 0) || !(sigma > 0)) throw PreconditionError("verify_rank_bound: tau, sigma must be positive");
  if (q == 1) {
    detail::require_dominance(a.dense(), b.dense(), "verify_rank_bound");
  } else {
    // Compare each q x q block of B to the matching entry of A.
    Matrix expanded(b.dim(), b.dim());
    for (Index i = 0; i < a.dim(); ++i)
      for (Index j = 0; j < a.dim(); ++j) expanded.block(i * q, j * q, q, q).setConstant(a(i, j));
    detail::require_dominance(expanded, b.dense(), "verify_rank_bound");
  }
  detail::require_norm_at_most_one(a, "verify_rank_bound");

  const auto sa = eig_sym(a);
  const auto sb = eig_sym(b);
  BoundReport r;
  r.tau = tau;
  r.sigma = sigma;
  r.q = q;
  r.threshold_b = q * std::sqrt(tau * (1.0 - sigma) + sigma);
  r.rank_a = threshold_rank(sa, tau, Side::Pos);
  r.rank_b = threshold_rank(sb, r.threshold_b, Side::Pos);
  r.bound = r.rank_a / (sigma * sigma);
  r.holds = r.rank_b <= r.bound + 1e-9;
  if (eps) {
    const double e = *eps;
    if (!(e > 0)) throw PreconditionError("verify_rank_bound: eps must be positive");
    BoundReport::Corollary c;
    c.eps = e;
    c.rank_a = threshold_rank(sa, e * e, Side::Pos);
    c.rank_b = threshold_rank(sb, 2.0 * q * e, Side::Pos);
    c.bound = c.rank_a / (e * e * e * e);
    c.holds = c.rank_b <= c.bound + 1e-9;
    r.corollary = c;
  }
  return r;
}

}  // namespace trcsp
