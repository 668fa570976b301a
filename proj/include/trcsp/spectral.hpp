#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "trcsp/common.hpp"

namespace trcsp {

/// Eigenvalues at least this close to a threshold are counted as reaching it.
inline constexpr double kEigenCountTolerance = 1e-9;

/// Full spectrum of a symmetric matrix, eigenvalues descending. Each
/// eigenvector's first non-negligible coordinate is positive.
struct SpectralData {
  Vector values;
  Matrix vectors;

  Index dim() const { return values.size(); }
  double max() const { return values.size() ? values(0) : 0.0; }
  double min() const { return values.size() ? values(values.size() - 1) : 0.0; }
};

namespace detail {

inline void fix_sign(Eigen::Ref<Vector> v) {
  const double scale = v.cwiseAbs().maxCoeff();
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12 * scale) {
      if (v(i) < 0) v = -v;
      return;
    }
  }
}

inline SpectralData eig_sym_dense(const Matrix& m) {
  SpectralData out;
  const Index n = m.rows();
  if (n == 0) return out;
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success) throw ConvergenceError("eig_sym: eigensolver failed");
  // Eigen returns ascending order.
  out.values = es.eigenvalues().reverse();
  out.vectors = es.eigenvectors().rowwise().reverse();
  for (Index j = 0; j < n; ++j) fix_sign(out.vectors.col(j));
  return out;
}

}  // namespace detail

inline SpectralData eig_sym(const SymMatrix& m) { return detail::eig_sym_dense(m.dense()); }

enum class Side { Pos, Neg };

/// pos: #{lambda >= tau}; neg: #{lambda <= -tau}; both with slack kEigenCountTolerance.
inline int threshold_rank(const SpectralData& s, double tau, Side side) {
  if (!(tau > 0)) throw PreconditionError("threshold_rank: tau must be positive");
  int count = 0;
  for (Index i = 0; i < s.values.size(); ++i) {
    const double l = s.values(i);
    if (side == Side::Pos ? l >= tau - kEigenCountTolerance : l <= -tau + kEigenCountTolerance) ++count;
  }
  return count;
}

inline int threshold_rank(const SymMatrix& m, double tau, Side side) {
  return threshold_rank(eig_sym(m), tau, side);
}

/// Orthonormal basis of a retained eigenspace; the projector is basis * basis^T.
struct Projector {
  Matrix basis;   ///< dim x k
  Vector values;  ///< Ritz / eigenvalues matching the columns of `basis`

  Index dim() const { return basis.rows(); }
  Index rank() const { return basis.cols(); }
  Matrix dense() const { return basis * basis.transpose(); }
};

enum class EigenMode { Exact, Power };

/// Span of eigenvectors with eigenvalue >= threshold (exact path).
inline Projector exact_top_eigenspace(const SpectralData& s, double threshold) {
  Index k = 0;
  while (k < s.values.size() && s.values(k) >= threshold - kEigenCountTolerance) ++k;
  return {s.vectors.leftCols(k), s.values.head(k)};
}

struct PowerOptions {
  std::uint64_t seed = 0;
  int initial_block = 4;
  double residual_tolerance = 1e-5;
};

/// Block power (subspace) iteration on M + I followed by Rayleigh-Ritz.
/// Returns the Ritz vectors whose Ritz value is >= eps; by interlacing there
/// are at most rank_{>=eps}(M) of them. Throws ConvergenceError when the
/// iteration cap 64 * ceil(log2 dim) is reached before every retained Ritz
/// pair has a residual below tolerance.
inline Projector power_top_eigenspace(const SymMatrix& sym, double eps, const PowerOptions& opt = {}) {
  const Matrix& m = sym.dense();
  const Index dim = m.rows();
  if (dim == 0) return {};
  const int cap = 64 * std::max(1, static_cast<int>(std::ceil(std::log2(static_cast<double>(dim)))));
  std::mt19937_64 rng(mix_seed(opt.seed));
  std::normal_distribution<double> gauss;
  Index block = std::min<Index>(dim, std::max(1, opt.initial_block));
  for (;;) {
    Matrix q(dim, block);
    for (Index j = 0; j < block; ++j)
      for (Index i = 0; i < dim; ++i) q(i, j) = gauss(rng);
    Matrix thin_id = Matrix::Identity(dim, block);
    q = Eigen::HouseholderQR<Matrix>(q).householderQ() * thin_id;
    bool converged = false;
    Matrix ritz_vectors;
    Vector ritz_values;
    for (int it = 1; it <= cap && !converged; ++it) {
      Matrix z = m * q + q;
      q = Eigen::HouseholderQR<Matrix>(z).householderQ() * thin_id;
      if (it % 4 != 0 && it != cap) continue;
      const Matrix h = symmetrize_upper(q.transpose() * m * q);
      const auto rr = detail::eig_sym_dense(h);
      ritz_values = rr.values;
      ritz_vectors = q * rr.vectors;
      converged = true;
      for (Index j = 0; j < block; ++j) {
        if (ritz_values(j) < eps - kEigenCountTolerance) break;
        const double res = (m * ritz_vectors.col(j) - ritz_values(j) * ritz_vectors.col(j)).norm();
        if (res > opt.residual_tolerance) {
          converged = false;
          break;
        }
      }
    }
    if (!converged) {
      throw ConvergenceError("power_top_eigenspace: no convergence within " + std::to_string(cap) +
                             " iterations (block " + std::to_string(block) + ")");
    }
    const bool block_saturated = ritz_values(block - 1) >= eps - kEigenCountTolerance;
    if (block_saturated && block < dim) {
      block = std::min(dim, 2 * block);
      continue;
    }
    Index k = 0;
    while (k < block && ritz_values(k) >= eps - kEigenCountTolerance) ++k;
    Matrix basis = ritz_vectors.leftCols(k);
    for (Index j = 0; j < k; ++j) detail::fix_sign(basis.col(j));
    return {basis, ritz_values.head(k)};
  }
}

/// Projector onto the top eigenspace of M at threshold eps. Requires
/// ||M||_op <= 1 + 1e-6.
inline Projector top_eigenspace(const SymMatrix& m, double eps, EigenMode mode,
                                const PowerOptions& power = {}) {
  if (!(eps > 0)) throw PreconditionError("top_eigenspace: eps must be positive");
  if (mode == EigenMode::Power) {
    // The norm precondition is the caller's responsibility here; checking it
    // would cost the full eigendecomposition this path avoids.
    return power_top_eigenspace(m, eps, power);
  }
  const auto s = eig_sym(m);
  if (s.dim() > 0 && std::max(std::abs(s.max()), std::abs(s.min())) > 1.0 + 1e-6) {
    throw PreconditionError("top_eigenspace: operator norm exceeds 1");
  }
  return exact_top_eigenspace(s, eps);
}

inline double operator_norm(const SymMatrix& m) {
  const auto s = eig_sym(m);
  return s.dim() ? std::max(std::abs(s.max()), std::abs(s.min())) : 0.0;
}

}  // namespace trcsp
