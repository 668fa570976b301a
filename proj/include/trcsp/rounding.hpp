#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "trcsp/sdp.hpp"

namespace trcsp {

/// Per-variable categorical distributions read off pE y: negatives clipped to
/// zero, each block renormalized to sum 1 (uniform if the block vanishes).
inline Matrix sanitized_marginals(const Pseudoexpectation& pe) {
  Matrix p(pe.q(), pe.n());
  for (int i = 0; i < pe.n(); ++i) {
    double total = 0;
    for (int a = 0; a < pe.q(); ++a) {
      p(a, i) = std::max(0.0, pe.mean(i, a));
      total += p(a, i);
    }
    if (total > 0) {
      p.col(i) /= total;
    } else {
      p.col(i).setConstant(1.0 / pe.q());
    }
  }
  return p;
}

/// `samples` independent draws from the product of the per-variable marginals.
inline std::vector<Assignment> round(const Pseudoexpectation& pe, std::uint64_t seed, int samples) {
  const Matrix p = sanitized_marginals(pe);
  std::mt19937_64 rng(mix_seed(seed));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Assignment> out;
  out.reserve(static_cast<std::size_t>(std::max(0, samples)));
  for (int s = 0; s < samples; ++s) {
    Assignment a(pe.n(), pe.q() - 1);
    for (int i = 0; i < pe.n(); ++i) {
      const double u = unit(rng);
      double acc = 0;
      for (int label = 0; label < pe.q(); ++label) {
        acc += p(label, i);
        if (u < acc) {
          a[i] = label;
          break;
        }
      }
    }
    out.push_back(std::move(a));
  }
  return out;
}

/// E_{y ~ nu} Phi(y) under the product of the (sanitized) marginals.
inline double expected_objective(const Pseudoexpectation& pe, const CspInstance& inst) {
  if (pe.n() != inst.n || pe.q() != inst.q) throw InvalidInput("expected_objective: shape mismatch");
  const Matrix p = sanitized_marginals(pe);
  double total = 0;
  for (const auto& e : inst.edges) {
    for (const auto& [a, b] : e.allowed) total += p(a, e.u) * p(b, e.v);
  }
  return total;
}

/// E_{y ~ nu} y^T C y = p^T C p for the sanitized marginals p, valid because
/// C has zero diagonal blocks.
inline double expected_quadratic(const Pseudoexpectation& pe, const Matrix& c) {
  const Matrix p = sanitized_marginals(pe);
  const Eigen::Map<const Vector> flat(p.data(), p.size());
  return flat.dot(c * flat);
}

}  // namespace trcsp
