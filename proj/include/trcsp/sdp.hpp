#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "trcsp/csp.hpp"
#include "trcsp/spectral.hpp"

namespace trcsp {

// Degree-2 pseudoexpectations over y in {0,1}^{nq} with one 1 per block of
// q coordinates, and the subspace-constrained SDP solved once per net point.
//
// The moment matrix X is indexed by the monomials {1} u {y_(i,a)}: row 0 is
// the constant, row 1 + q i + a is y_(i,a).

struct SdpTolerances {
  double psd = 1e-7;           ///< eta: PSD slack and linear-constraint tolerance
  double primal = 1e-10;       ///< ADMM relative primal residual target
  double dual = 1e-7;          ///< ADMM relative dual residual target
  double gap = 1e-7;           ///< ADMM relative duality gap target
  int max_iterations = 50000;
  int stall_window = 500;
  double stall_improvement = 1e-9;
};

class Pseudoexpectation {
 public:
  Pseudoexpectation(Matrix moments, int n, int q) : x_(std::move(moments)), n_(n), q_(q) {
    if (x_.rows() != static_cast<Index>(n) * q + 1 || x_.cols() != x_.rows()) {
      throw InvalidInput("Pseudoexpectation: moment matrix must be (nq+1) x (nq+1)");
    }
  }

  /// Dirac pseudoexpectation of an integral point.
  static Pseudoexpectation dirac(const Assignment& a, int q) {
    const int n = static_cast<int>(a.size());
    Vector z = Vector::Zero(static_cast<Index>(n) * q + 1);
    z(0) = 1.0;
    for (int i = 0; i < n; ++i) z(1 + label_index(q, i, a[i])) = 1.0;
    return Pseudoexpectation(z * z.transpose(), n, q);
  }

  int n() const { return n_; }
  int q() const { return q_; }
  Index nq() const { return static_cast<Index>(n_) * q_; }
  const Matrix& moments() const { return x_; }

  /// pE y
  Vector mean() const { return x_.col(0).tail(nq()); }
  /// pE y y^T
  Matrix second_moments() const { return x_.bottomRightCorner(nq(), nq()); }
  Matrix pseudocovariance() const {
    const Vector m = mean();
    return second_moments() - m * m.transpose();
  }
  double mean(int var, int label) const { return x_(0, 1 + label_index(q_, var, label)); }

  /// Violations of the moment-matrix invariants at tolerance eta.
  std::vector<Violation> check(double eta) const {
    std::vector<Violation> out;
    auto at = [&](Index r, Index s) { return x_(r, s); };
    if ((x_ - x_.transpose()).cwiseAbs().maxCoeff() > 0.0) out.push_back({"asymmetric", ""});
    if (std::abs(at(0, 0) - 1.0) > eta) out.push_back({"normalization", std::to_string(at(0, 0))});
    const double lmin = detail::eig_sym_dense(symmetrize_upper(x_)).min();
    if (lmin < -eta) out.push_back({"not psd", "lambda_min = " + std::to_string(lmin)});
    for (int i = 0; i < n_; ++i) {
      double block = 0;
      for (int a = 0; a < q_; ++a) {
        const Index r = 1 + label_index(q_, i, a);
        block += at(0, r);
        if (std::abs(at(r, r) - at(0, r)) > eta) {
          out.push_back({"booleanity", "variable " + std::to_string(i) + " label " + std::to_string(a)});
        }
        for (int j = 0; j < n_; ++j) {
          double cross = 0;
          for (int b = 0; b < q_; ++b) cross += at(r, 1 + label_index(q_, j, b));
          if (std::abs(cross - at(0, r)) > q_ * eta) {
            out.push_back({"block consistency", "(" + std::to_string(i) + "," + std::to_string(a) +
                                                    ") vs block " + std::to_string(j)});
          }
        }
      }
      if (std::abs(block - 1.0) > eta) out.push_back({"block marginal", "variable " + std::to_string(i)});
    }
    return out;
  }

 private:
  Matrix x_;
  int n_;
  int q_;
};

enum class SdpStatus { Solved, Infeasible, Unresolved };

inline std::string to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Solved: return "solved";
    case SdpStatus::Infeasible: return "infeasible";
    case SdpStatus::Unresolved: return "unresolved";
  }
  return "?";
}

struct SdpResult {
  SdpStatus status = SdpStatus::Unresolved;
  std::optional<Pseudoexpectation> pe;
  double objective = 0;      ///< <E^1/2 M E^1/2, pE y y^T>
  double ball_value = 0;     ///< pE |Pi E^1/2 y - v|^2
  double ball_bound = 0;     ///< eps Tr D
  int iterations = 0;
  double primal_residual = 0;
  double dual_residual = 0;
  double gap = 0;
  std::string note;
};

namespace detail {

inline Index svec_size(Index d) { return d * (d + 1) / 2; }

// Upper triangle, column by column; off-diagonal entries scaled by sqrt 2 so
// that svec(A) . svec(B) = <A, B>.
inline Vector svec(const Matrix& a) {
  const Index d = a.rows();
  Vector out(svec_size(d));
  Index p = 0;
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < j; ++i) out(p++) = std::sqrt(2.0) * a(i, j);
    out(p++) = a(j, j);
  }
  return out;
}

inline Matrix smat(const Vector& v, Index d) {
  Matrix a(d, d);
  Index p = 0;
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < j; ++i) a(i, j) = a(j, i) = v(p++) / std::sqrt(2.0);
    a(j, j) = v(p++);
  }
  return a;
}

inline Matrix psd_part(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  const Vector l = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * l.asDiagonal() * es.eigenvectors().transpose();
}

// Euclidean projection onto the probability simplex.
inline void project_simplex(Eigen::Ref<Vector> v) {
  Vector u = v;
  std::sort(u.data(), u.data() + u.size(), std::greater<double>());
  double css = 0, theta = 0;
  for (Index i = 0; i < u.size(); ++i) {
    css += u(i);
    const double t = (css - 1.0) / static_cast<double>(i + 1);
    if (u(i) - t > 0) theta = t;
  }
  v = (v.array() - theta).cwiseMax(0.0);
}

}  // namespace detail

/// Everything about the SDP that does not depend on the net point: the
/// reduced moment space, the orthonormalized equality constraints, the
/// objective, and a ball-free warm start. Immutable after construction and
/// safe to share across threads.
class MomentSdp {
 public:
  /// objective = E^1/2 M E^1/2 (nq x nq, zero diagonal blocks); e_diag is the
  /// diagonal of E; basis is the projector basis U (nq x k); slack_bound is
  /// eps Tr D.
  MomentSdp(const Matrix& objective, const Vector& e_diag, int q, const Matrix& basis, double slack_bound,
            SdpTolerances tol = {})
      : q_(q), tol_(tol), slack_bound_(slack_bound) {
    const Index nq = objective.rows();
    if (q < 1 || nq % q != 0 || objective.cols() != nq || e_diag.size() != nq || basis.rows() != nq) {
      throw InvalidInput("MomentSdp: inconsistent dimensions");
    }
    if (!(slack_bound > 0)) throw PreconditionError("MomentSdp: slack bound must be positive");
    n_ = static_cast<int>(nq / q);
    for (int i = 0; i < n_; ++i) {
      if (objective.block(static_cast<Index>(i) * q, static_cast<Index>(i) * q, q, q).cwiseAbs().maxCoeff() != 0.0) {
        throw PreconditionError("MomentSdp: diagonal block " + std::to_string(i) + " of M is not zero");
      }
    }
    c_ = objective;
    e_sqrt_ = e_diag.cwiseSqrt();
    basis_ = basis;
    build_reduced_space();
    build_equalities();
    build_objective();
    base_ = run_admm(std::nullopt, std::nullopt);
  }

  int n() const { return n_; }
  int q() const { return q_; }
  Index k() const { return basis_.cols(); }
  double slack_bound() const { return slack_bound_; }
  const Matrix& objective() const { return c_; }
  const Matrix& basis() const { return basis_; }
  const SdpTolerances& tolerances() const { return tol_; }

  /// ||C||_F * nq, the scale of the objective tolerance.
  double scale() const { return c_.norm() * static_cast<double>(c_.rows()); }

  /// [-coords | U^T E^1/2]: pE |Pi E^1/2 y - v|^2 = Tr(L X L^T) + offset.
  Matrix ball_factor(const Vector& coords) const {
    Matrix l(k(), c_.rows() + 1);
    l.col(0) = -coords;
    l.rightCols(c_.rows()) = basis_.transpose() * e_sqrt_.asDiagonal();
    return l;
  }

  /// Matrix P of the polynomial |Pi E^1/2 y - v|^2 in the monomial basis.
  Matrix ball_matrix(const Vector& coords, double offset = 0.0) const {
    const Matrix l = ball_factor(coords);
    Matrix p = l.transpose() * l;
    p(0, 0) += offset;
    return symmetrize_upper(p);
  }

  double ball_value(const Pseudoexpectation& pe, const Vector& coords, double offset = 0.0) const {
    const Matrix l = ball_factor(coords);
    return (l * pe.moments() * l.transpose()).trace() + offset;
  }

  double objective_value(const Pseudoexpectation& pe) const {
    return (c_.array() * pe.second_moments().array()).sum();
  }

  /// Solves for v = U coords. `offset` adds |v - Pi v|^2 when v is not in
  /// the span of U.
  SdpResult solve(const Vector& coords, double offset = 0.0) const {
    if (coords.size() != k()) throw InvalidInput("MomentSdp::solve: coordinate dimension mismatch");
    SdpResult r;
    r.ball_bound = slack_bound_;
    if (k() == 0) {
      if (offset > slack_bound_) {
        r.status = SdpStatus::Infeasible;
        r.note = "constant ball term exceeds the bound";
        return r;
      }
      return finish(base_, coords, offset);
    }
    // Any pseudoexpectation satisfies pE|W y - c|^2 >= |W pE y - c|^2 with pE y
    // in a product of simplices, so a lower bound above the slack is a proof
    // of infeasibility.
    const double lower = marginal_lower_bound(coords) + offset;
    if (lower > slack_bound_ * (1.0 + 1e-9) + 1e-12) {
      r.status = SdpStatus::Infeasible;
      r.ball_value = lower;
      r.note = "marginal lower bound exceeds the ball bound";
      return r;
    }
    const Matrix lq = ball_factor(coords) * q_red_;
    const Vector p = detail::svec(lq.transpose() * lq);
    const Vector along = vr_.transpose() * p;
    const Vector perp = p - vr_ * along;
    const double fixed = along.dot(b_) + offset;  // contribution pinned by the equalities
    const double pn = perp.norm();
    if (pn <= 1e-12 * std::max(1.0, p.norm())) {
      if (fixed > slack_bound_ + tol_.psd) {
        r.status = SdpStatus::Infeasible;
        r.note = "ball term is constant on the feasible set and exceeds the bound";
        return r;
      }
      return finish(base_, coords, offset);
    }
    Ball ball{perp / pn, (slack_bound_ - fixed) / pn, pn};
    return finish(run_admm(ball, base_), coords, offset);
  }

 private:
  struct Ball {
    Vector u;     // unit normal in svec space, orthogonal to the equality rows
    double rhs;   // u . x + s = rhs, s >= 0
    double norm;  // scaling back to the original units
  };

  struct AdmmState {
    Vector x, s_dual, y;
    double slack = 0, slack_dual = 0, yb = 0, mu = 1.0;
    int iterations = 0;
    double rp = 0, rd = 0, gap = 0;
    bool converged = false;
    bool stalled = false;
    double ball_violation = 0;  // original units
  };

  void build_reduced_space() {
    const Index nq = c_.rows();
    const Index big = nq + 1;
    // a_j = -e_0 + sum_b e_(j,b); feasible moment matrices satisfy X a_j = 0.
    Matrix a = Matrix::Zero(big, n_);
    for (int j = 0; j < n_; ++j) {
      a(0, j) = -1.0;
      for (int b = 0; b < q_; ++b) a(1 + label_index(q_, j, b), j) = 1.0;
    }
    Eigen::HouseholderQR<Matrix> qr(a);
    const Matrix full_q = qr.householderQ() * Matrix::Identity(big, big);
    q_red_ = full_q.rightCols(big - n_);
    d_ = q_red_.cols();
  }

  void add_equality(std::vector<Vector>& rows, std::vector<double>& rhs, Index r, Index s, double wr,
                    Index t, double wt, double value) const {
    // <G, X> with G = wr * sym(e_r e_s^T) + wt * e_t e_t^T (wt may be zero).
    const Vector qr = q_red_.row(r).transpose();
    const Vector qs = q_red_.row(s).transpose();
    Matrix g = 0.5 * wr * (qr * qs.transpose() + qs * qr.transpose());
    if (wt != 0.0) {
      const Vector qt = q_red_.row(t).transpose();
      g += wt * qt * qt.transpose();
    }
    rows.push_back(detail::svec(g));
    rhs.push_back(value);
  }

  void build_equalities() {
    std::vector<Vector> rows;
    std::vector<double> rhs;
    add_equality(rows, rhs, 0, 0, 1.0, 0, 0.0, 1.0);  // X_00 = 1
    for (int i = 0; i < n_; ++i) {
      for (int a = 0; a < q_; ++a) {
        const Index r = 1 + label_index(q_, i, a);
        add_equality(rows, rhs, 0, r, -1.0, r, 1.0, 0.0);  // X_rr - X_0r = 0
        for (int b = a + 1; b < q_; ++b) {
          add_equality(rows, rhs, r, 1 + label_index(q_, i, b), 1.0, 0, 0.0, 0.0);  // y_ia y_ib = 0
        }
      }
    }
    const Index nv = detail::svec_size(d_);
    Matrix abar(static_cast<Index>(rows.size()), nv);
    Vector bbar(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      abar.row(static_cast<Index>(i)) = rows[i].transpose();
      bbar(static_cast<Index>(i)) = rhs[i];
    }
    Eigen::JacobiSVD<Matrix> svd(abar, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector sv = svd.singularValues();
    Index rank = 0;
    while (rank < sv.size() && sv(rank) > 1e-10 * sv(0)) ++rank;
    vr_ = svd.matrixV().leftCols(rank);
    b_ = (svd.matrixU().leftCols(rank).transpose() * bbar).cwiseQuotient(sv.head(rank));
  }

  void build_objective() {
    const Index nq = c_.rows();
    Matrix cf = Matrix::Zero(nq + 1, nq + 1);
    cf.bottomRightCorner(nq, nq) = c_;
    // Minimization form.
    cost_ = -detail::svec(q_red_.transpose() * cf * q_red_);
  }

  double marginal_lower_bound(const Vector& coords) const {
    const Matrix w = basis_.transpose() * e_sqrt_.asDiagonal();  // k x nq
    const Index nq = w.cols();
    const double lip = 2.0 * std::max(1e-12, w.squaredNorm());   // Frobenius bound on 2|W|^2
    Vector m = Vector::Constant(nq, 1.0 / q_);
    Vector z = m, prev = m;
    double t = 1.0;
    double best_lower = -std::numeric_limits<double>::infinity();
    for (int it = 0; it < 400; ++it) {
      const Vector rz = w * z - coords;
      const Vector grad = 2.0 * w.transpose() * rz;
      prev = m;
      m = z - grad / lip;
      for (int i = 0; i < n_; ++i) detail::project_simplex(m.segment(static_cast<Index>(i) * q_, q_));
      const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      z = m + ((t - 1.0) / tn) * (m - prev);
      t = tn;
      if (it % 20 == 19 || it == 399) {
        // Frank-Wolfe bound: f(m) + min_s grad(m) . (s - m) <= min f.
        const Vector rm = w * m - coords;
        const Vector gm = 2.0 * w.transpose() * rm;
        double lower = rm.squaredNorm() - gm.dot(m);
        for (int i = 0; i < n_; ++i) lower += gm.segment(static_cast<Index>(i) * q_, q_).minCoeff();
        best_lower = std::max(best_lower, lower);
        if (best_lower > slack_bound_ * 1.01) break;
        if (rm.squaredNorm() <= slack_bound_ * 0.5) break;  // clearly no certificate coming
      }
    }
    return std::max(0.0, best_lower);
  }

  AdmmState run_admm(const std::optional<Ball>& ball, const std::optional<AdmmState>& warm) const {
    const Index nv = detail::svec_size(d_);
    const Index r = vr_.cols();
    AdmmState st;
    if (warm) {
      st.x = warm->x;
      st.s_dual = warm->s_dual;
      st.y = warm->y;
      st.mu = warm->mu;
    } else {
      st.x = Vector::Zero(nv);
      st.s_dual = Vector::Zero(nv);
      st.y = Vector::Zero(r);
    }
    const bool has_ball = ball.has_value();
    if (has_ball) {
      st.slack = std::max(0.0, ball->rhs - ball->u.dot(st.x));
      st.slack_dual = 0.0;
      st.yb = 0.0;
    }
    const double bnorm = std::sqrt(b_.squaredNorm() + (has_ball ? ball->rhs * ball->rhs : 0.0));
    const double cnorm = cost_.norm();
    double best_rp = std::numeric_limits<double>::infinity();
    double window_start_rp = best_rp;
    int window_start = 0;
    int ratio_votes = 0;

    for (int it = 1; it <= tol_.max_iterations; ++it) {
      const double mu = st.mu;
      // y-step: (A A^T) is diag(I, 2) because the ball row is orthogonal to the
      // equality rows and has unit normal plus the slack coefficient.
      const Vector cms = cost_ - st.s_dual;
      st.y = mu * (b_ - vr_.transpose() * st.x) + vr_.transpose() * cms;
      if (has_ball) {
        st.yb = 0.5 * (mu * (ball->rhs - ball->u.dot(st.x) - st.slack) + ball->u.dot(cms) - st.slack_dual);
      }
      // S-step: V = C - A^T y - mu X, S = Proj_K(V), X = (S - V) / mu.
      Vector v = cost_ - vr_ * st.y - mu * st.x;
      if (has_ball) v -= st.yb * ball->u;
      const Matrix vm = detail::smat(v, d_);
      st.s_dual = detail::svec(detail::psd_part(vm));
      st.x = (st.s_dual - v) / mu;
      if (has_ball) {
        const double vs = -st.yb - mu * st.slack;
        st.slack_dual = std::max(vs, 0.0);
        st.slack = (st.slack_dual - vs) / mu;
      }

      // Residuals.
      Vector pres = vr_.transpose() * st.x - b_;
      double pball = 0.0;
      if (has_ball) pball = ball->u.dot(st.x) + st.slack - ball->rhs;
      st.rp = std::sqrt(pres.squaredNorm() + pball * pball) / (1.0 + bnorm);
      Vector dres = vr_ * st.y + st.s_dual - cost_;
      double dball = 0.0;
      if (has_ball) {
        dres += st.yb * ball->u;
        dball = st.yb + st.slack_dual;
      }
      st.rd = std::sqrt(dres.squaredNorm() + dball * dball) / (1.0 + cnorm);
      const double pobj = cost_.dot(st.x);
      const double dobj = b_.dot(st.y) + (has_ball ? ball->rhs * st.yb : 0.0);
      st.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
      st.iterations = it;
      if (has_ball) st.ball_violation = std::max(0.0, ball->u.dot(st.x) - ball->rhs) * ball->norm;

      if (st.rp <= tol_.primal && st.rd <= tol_.dual && st.gap <= tol_.gap) {
        st.converged = true;
        break;
      }

      // Stall detection on the primal residual.
      best_rp = std::min(best_rp, st.rp);
      if (it == 1) window_start_rp = best_rp;
      if (it - window_start >= tol_.stall_window) {
        if (window_start_rp - best_rp <= tol_.stall_improvement * window_start_rp) {
          st.stalled = true;
          break;
        }
        window_start = it;
        window_start_rp = best_rp;
      }

      // Balance primal and dual residuals.
      if (st.rp > 4.0 * st.rd) {
        ratio_votes = std::max(0, ratio_votes) + 1;
      } else if (st.rd > 4.0 * st.rp) {
        ratio_votes = std::min(0, ratio_votes) - 1;
      } else {
        ratio_votes = 0;
      }
      if (ratio_votes >= 10) {
        st.mu = std::min(st.mu * 1.6, 1e6);
        ratio_votes = 0;
      } else if (ratio_votes <= -10) {
        st.mu = std::max(st.mu / 1.6, 1e-6);
        ratio_votes = 0;
      }
    }
    return st;
  }

  SdpResult finish(const AdmmState& st, const Vector& coords, double offset) const {
    SdpResult r;
    r.ball_bound = slack_bound_;
    r.iterations = st.iterations;
    r.primal_residual = st.rp;
    r.dual_residual = st.rd;
    r.gap = st.gap;
    if (!st.converged) {
      const bool infeasible = st.stalled && st.ball_violation > 10.0 * tol_.psd;
      r.status = infeasible ? SdpStatus::Infeasible : SdpStatus::Unresolved;
      r.note = st.stalled ? "primal residual stalled" : "iteration cap reached";
      r.ball_value = std::numeric_limits<double>::quiet_NaN();
      return r;
    }
    // Restore the equality constraints exactly; the PSD slack this costs is
    // of the order of the final primal residual.
    const Vector x = st.x - vr_ * (vr_.transpose() * st.x - b_);
    Matrix moments = symmetrize_upper(q_red_ * detail::smat(x, d_) * q_red_.transpose());
    Pseudoexpectation pe(std::move(moments), n_, q_);
    r.objective = objective_value(pe);
    r.ball_value = k() > 0 ? ball_value(pe, coords, offset) : offset;
    r.status = SdpStatus::Solved;
    r.pe = std::move(pe);
    return r;
  }

  int n_ = 0;
  int q_ = 0;
  SdpTolerances tol_;
  double slack_bound_ = 0;
  Matrix c_;
  Vector e_sqrt_;
  Matrix basis_;
  Matrix q_red_;  // (nq+1) x d, orthonormal basis of the block-sum complement
  Index d_ = 0;
  Matrix vr_;     // svec space x r, orthonormal equality rows
  Vector b_;      // right-hand side in the orthonormal row basis
  Vector cost_;   // svec of the (negated) reduced objective
  AdmmState base_;
};

/// One SDP instance: the shared model plus the target point v = U coords.
struct SdpProblem {
  std::shared_ptr<const MomentSdp> model;
  Vector coords;
  double offset = 0.0;  ///< |v - Pi v|^2

  Matrix objective() const { return model->objective(); }
  Matrix ball_matrix() const { return model->ball_matrix(coords, offset); }
  double slack_bound() const { return model->slack_bound(); }
};

inline Matrix weighted_objective(const SymMatrix& m, const Vector& e_diag) {
  const Vector s = e_diag.cwiseSqrt();
  return symmetrize_upper(s.asDiagonal() * m.dense() * s.asDiagonal());
}

/// Problem maximizing pE y^T E^1/2 M E^1/2 y subject to the pseudoexpectation
/// constraints and pE |Pi E^1/2 y - v|^2 <= eps Tr D.
inline SdpProblem build_sdp(const SymMatrix& m, const SymMatrix& e, int q, const Projector& projector,
                            const Vector& v, double eps, double trace_d, SdpTolerances tol = {}) {
  if (e.dim() != m.dim() || projector.dim() != m.dim() || v.size() != m.dim()) {
    throw InvalidInput("build_sdp: dimension mismatch");
  }
  const Vector e_diag = e.dense().diagonal();
  auto model = std::make_shared<const MomentSdp>(weighted_objective(m, e_diag), e_diag, q, projector.basis,
                                                 eps * trace_d, tol);
  SdpProblem p;
  p.model = std::move(model);
  p.coords = projector.basis.transpose() * v;
  p.offset = (v - projector.basis * p.coords).squaredNorm();
  return p;
}

inline SdpResult solve_sdp(const SdpProblem& p) { return p.model->solve(p.coords, p.offset); }

}  // namespace trcsp
