#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace trcsp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Malformed input: bad file contents, invariant violations, dimension mismatches.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Work was refused because it would exceed a configured size cap
/// (net size, brute-force enumeration).
class SizeLimitExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative method hit its iteration cap.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense real symmetric matrix. Symmetry is checked exactly as stored.
class SymMatrix {
 public:
  SymMatrix() = default;

  explicit SymMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) {
      throw InvalidInput("SymMatrix: matrix is " + std::to_string(m_.rows()) + "x" +
                         std::to_string(m_.cols()) + ", expected square");
    }
    for (Index j = 0; j < m_.cols(); ++j) {
      for (Index i = 0; i < m_.rows(); ++i) {
        if (!std::isfinite(m_(i, j))) {
          throw InvalidInput("SymMatrix: non-finite entry at (" + std::to_string(i) + "," +
                             std::to_string(j) + ")");
        }
        if (i < j && m_(i, j) != m_(j, i)) {
          throw InvalidInput("SymMatrix: entry (" + std::to_string(i) + "," + std::to_string(j) +
                             ") differs from its transpose");
        }
      }
    }
  }

  static SymMatrix zero(Index dim) { return SymMatrix(Matrix::Zero(dim, dim)); }
  static SymMatrix diagonal(const Vector& d) { return SymMatrix(Matrix(d.asDiagonal())); }

  Index dim() const { return m_.rows(); }
  double operator()(Index i, Index j) const { return m_(i, j); }
  const Matrix& dense() const { return m_; }

  SymMatrix operator-() const { return SymMatrix(Matrix(-m_)); }
  SymMatrix scaled(double s) const { return SymMatrix(Matrix(s * m_)); }

 private:
  Matrix m_;
};

/// Exactly symmetric copy of `m` (upper triangle mirrored onto the lower).
inline Matrix symmetrize_upper(const Matrix& m) {
  Matrix out = m;
  for (Index j = 0; j < out.cols(); ++j) {
    for (Index i = j + 1; i < out.rows(); ++i) out(i, j) = out(j, i);
  }
  return out;
}

/// Mixes a 64-bit value (splitmix64 finalizer). Used to derive independent
/// RNG streams from a master seed and a stream index.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t stream) {
  return mix_seed(mix_seed(master) ^ (stream * 0xd1b54a32d192ed03ULL + 1));
}

}  // namespace trcsp
