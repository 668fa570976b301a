#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "trcsp/brute_force.hpp"
#include "trcsp/csp.hpp"
#include "trcsp/net.hpp"
#include "trcsp/rounding.hpp"
#include "trcsp/sdp.hpp"
#include "trcsp/spectral.hpp"

namespace trcsp {

struct SolveOptions {
  int workers = 1;
  std::uint64_t net_cap = kDefaultNetCap;
  int samples = 0;  ///< rounding samples per net point; 0 picks default_samples(eps)
  EigenMode eigen = EigenMode::Exact;
  bool oracle = false;
  bool timings = false;  ///< wall-clock per phase in the report (breaks byte-stability)
  SdpTolerances sdp;
};

inline int default_samples(double eps) {
  return std::max(16, static_cast<int>(std::ceil(4.0 / eps - 1e-12)));
}

/// A frontend problem rewritten as: maximize y^T C y over y in C_q^n, with
/// C = E^1/2 M E^1/2 on the non-isolated core, and reported objective
/// shift + factor * y^T C y.
struct Reduction {
  std::string problem;
  std::optional<std::string> name;
  int n = 0;  ///< variables of the original problem
  int q = 2;
  int m = 0;
  std::vector<int> kept;  ///< core variable -> original variable
  SymMatrix mat;          ///< M on the core (nq x nq)
  Vector e_diag;          ///< diagonal of E on the core
  double eps = 0;         ///< user-facing eps
  double eps_alg = 0;     ///< eps fed to the algorithm
  double trace_d = 0;     ///< Tr D with E = D (x) I_q
  double shift = 0;
  double factor = 1;
  double input_scale = 1;  ///< divisor applied to the input matrix (quadratic frontend)
  std::function<double(const Assignment&)> score;  ///< full assignment -> reported objective
  std::function<double()> oracle;                  ///< exact optimum in reported units

  int core_n() const { return static_cast<int>(kept.size()); }
};

namespace detail {

inline void require_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw PreconditionError("eps must lie in (0, 1)");
}

// M (x) K/2 with K = [[1,-1],[-1,1]]: y_i^T (K/2) y_j = x_i x_j / 2 for the
// +-1 encoding label 0 -> +1, label 1 -> -1.
inline SymMatrix signed_tensor(const Matrix& m) {
  const Index n = m.rows();
  Matrix out = Matrix::Zero(2 * n, 2 * n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const double h = 0.5 * m(i, j);
      out(2 * i, 2 * j) = h;
      out(2 * i + 1, 2 * j + 1) = h;
      out(2 * i, 2 * j + 1) = -h;
      out(2 * i + 1, 2 * j) = -h;
    }
  }
  return SymMatrix(std::move(out));
}

template <class F>
void parallel_for(Index count, int workers, F&& body) {
  const Index w = std::max<Index>(1, std::min<Index>(workers, count));
  if (w <= 1) {
    for (Index i = 0; i < count; ++i) body(i);
    return;
  }
  const Index chunk = (count + w - 1) / w;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(w));
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(w));
  for (Index t = 0; t < w; ++t) {
    threads.emplace_back([&, t] {
      try {
        const Index end = std::min(count, (t + 1) * chunk);
        for (Index i = t * chunk; i < end; ++i) body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

}  // namespace detail

inline Reduction reduce_2csp(const CspInstance& inst, double eps) {
  require_valid(inst);
  detail::require_eps(eps);
  auto stripped = strip_isolated(inst);
  Reduction r;
  r.problem = "2csp";
  r.name = inst.name;
  r.n = inst.n;
  r.q = inst.q;
  r.m = inst.m();
  r.kept = stripped.kept;
  if (stripped.core.n > 0) {
    auto nle = normalized_label_extended(stripped.core);
    r.mat = std::move(nle.m);
    r.e_diag = nle.e.dense().diagonal();
  }
  // M = B/q with E = qD (x) I_q, so D here is qD and y^T C y = 2 Phi.
  r.eps = eps;
  r.eps_alg = 2.0 * eps;
  r.trace_d = 2.0 * inst.q * inst.m();
  r.factor = 0.5;
  r.score = [inst](const Assignment& a) { return static_cast<double>(evaluate(inst, a)); };
  r.oracle = [inst] { return static_cast<double>(brute_force(inst).opt); };
  return r;
}

inline Reduction reduce_maxcut(const Graph& g, double eps) {
  detail::require_eps(eps);
  const CspInstance inst = maxcut_instance(g);
  if (inst.m() == 0) throw PreconditionError("maxcut: graph has no edges");
  auto stripped = strip_isolated(inst);
  Reduction r;
  r.problem = "maxcut";
  r.name = inst.name;
  r.n = inst.n;
  r.q = 2;
  r.m = inst.m();
  r.kept = stripped.kept;
  // -A_norm (x) K/2 keeps ||M|| <= 1 and rank_{>=eps}(M) = rank_{<=-eps}(A_norm).
  r.mat = detail::signed_tensor(-normalized_adjacency(stripped.core).dense());
  const auto deg = degrees(stripped.core);
  r.e_diag.resize(2 * stripped.core.n);
  for (int i = 0; i < stripped.core.n; ++i) r.e_diag(2 * i) = r.e_diag(2 * i + 1) = deg[i];
  r.eps = eps;
  r.eps_alg = eps;
  r.trace_d = 2.0 * inst.m();
  // y^T C y = -sum_edges x_u x_v, and cut = sum_edges (1 - x_u x_v) / 2.
  r.shift = 0.5 * inst.m();
  r.factor = 0.5;
  r.score = [inst](const Assignment& a) { return static_cast<double>(evaluate(inst, a)); };
  r.oracle = [inst] { return static_cast<double>(brute_force(inst).opt); };
  return r;
}

/// Labels to signs: 0 -> +1, 1 -> -1.
inline std::vector<int> to_signs(const Assignment& a) {
  std::vector<int> x(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) x[i] = a[i] == 0 ? 1 : -1;
  return x;
}

inline double quadratic_value(const SymMatrix& a, const std::vector<int>& x) {
  if (static_cast<Index>(x.size()) != a.dim()) throw InvalidInput("quadratic_value: dimension mismatch");
  Vector v(a.dim());
  for (Index i = 0; i < a.dim(); ++i) v(i) = x[i];
  return v.dot(a.dense() * v);
}

inline Reduction reduce_quadratic(const SymMatrix& a, double eps) {
  detail::require_eps(eps);
  const Index n = a.dim();
  if (n < 1) throw InvalidInput("quadratic: empty matrix");
  Matrix off = a.dense();
  off.diagonal().setZero();
  const double norm = operator_norm(SymMatrix(off));
  Reduction r;
  r.problem = "quadratic";
  r.n = static_cast<int>(n);
  r.q = 2;
  r.m = 0;
  for (int i = 0; i < n; ++i) r.kept.push_back(i);
  r.input_scale = norm > 1.0 ? norm : 1.0;
  r.mat = detail::signed_tensor(off / r.input_scale);
  r.e_diag = Vector::Ones(2 * n);
  r.eps = eps;
  r.eps_alg = eps;
  r.trace_d = static_cast<double>(n);
  // y^T C y = x^T A' x / (2 s) for the zero-diagonal A'; the diagonal adds Tr A.
  r.shift = a.dense().trace();
  r.factor = 2.0 * r.input_scale;
  r.score = [a](const Assignment& y) { return quadratic_value(a, to_signs(y)); };
  r.oracle = [a] { return brute_force_quadratic(a).value; };
  return r;
}

struct PointRecord {
  Index index = 0;
  Vector coords;
  SdpStatus status = SdpStatus::Unresolved;
  int iterations = 0;
  std::string note;
  double sdp_objective = 0;  ///< y^T C y units
  double sdp_value = 0;      ///< reported units
  double ball_value = 0;     ///< pE |Pi E^1/2 y - v|^2
  double expected_quadratic = 0;
  double expected_value = 0;  ///< E over the rounding distribution, reported units
  std::optional<double> best_rounded;
};

struct SolveReport {
  std::string problem;
  std::optional<std::string> name;
  int n = 0, q = 0, m = 0;
  double eps = 0, eps_alg = 0;
  std::uint64_t seed = 0;
  int samples = 0;
  double trace_d = 0;
  double scale = 0;  ///< ||C||_F nq
  double input_scale = 1;

  std::string eigen_mode;
  bool eigen_fallback = false;
  int k = 0;
  std::vector<double> retained;  ///< eigenvalues (or Ritz values) spanning the projector
  std::optional<double> lambda_max, lambda_min;

  double net_radius = 0, net_mesh = 0, net_spacing = 0;
  int net_half_width = 0;
  Index net_size = 0;
  double net_bound = 0;

  std::vector<PointRecord> points;
  int solved = 0, infeasible = 0, unresolved = 0;

  Assignment best_assignment;
  double best = 0;
  std::optional<Index> best_index;
  bool fallback = false;

  std::optional<double> opt, gap;
  std::vector<std::pair<std::string, double>> timings;

  int exit_code() const { return fallback ? 3 : 0; }
};

/// The solver split into a seed-independent part (spectral work, net,
/// one SDP per net point; done in the constructor) and the seeded rounding
/// in run(). Results are merged by net index, so any worker count gives the
/// same report.
class Pipeline {
 public:
  Pipeline(Reduction reduction, SolveOptions options) : r_(std::move(reduction)), opt_(std::move(options)) {
    samples_ = opt_.samples > 0 ? opt_.samples : default_samples(r_.eps);
    if (r_.core_n() == 0) return;
    detail::Stopwatch clock;

    if (opt_.eigen == EigenMode::Power) {
      try {
        projector_ = top_eigenspace(r_.mat, r_.eps_alg, EigenMode::Power);
      } catch (const ConvergenceError&) {
        eigen_fallback_ = true;
      }
    }
    if (opt_.eigen == EigenMode::Exact || eigen_fallback_) {
      const auto spec = eig_sym(r_.mat);
      lambda_max_ = spec.max();
      lambda_min_ = spec.min();
      if (std::max(std::abs(spec.max()), std::abs(spec.min())) > 1.0 + 1e-6) {
        throw PreconditionError("operator norm of M exceeds 1");
      }
      projector_ = exact_top_eigenspace(spec, r_.eps_alg);
    }
    timings_.emplace_back("spectral", clock.lap());

    net_ = build_net(static_cast<int>(projector_.rank()), std::sqrt(r_.trace_d),
                     std::sqrt(r_.eps_alg * r_.trace_d), opt_.net_cap);
    timings_.emplace_back("net", clock.lap());

    model_ = std::make_shared<const MomentSdp>(weighted_objective(r_.mat, r_.e_diag), r_.e_diag, r_.q,
                                               projector_.basis, r_.eps_alg * r_.trace_d, opt_.sdp);
    results_.resize(static_cast<std::size_t>(net_.size()));
    detail::parallel_for(net_.size(), opt_.workers,
                         [&](Index s) { results_[static_cast<std::size_t>(s)] = model_->solve(net_.point(s)); });
    timings_.emplace_back("sdp", clock.lap());
  }

  const Reduction& reduction() const { return r_; }
  const SolveOptions& options() const { return opt_; }
  const Projector& projector() const { return projector_; }
  const EpsilonNet& net() const { return net_; }
  const MomentSdp* model() const { return model_.get(); }
  const std::vector<SdpResult>& results() const { return results_; }
  int samples() const { return samples_; }

  SolveReport run(std::uint64_t seed) const {
    detail::Stopwatch clock;
    SolveReport rep = skeleton(seed);
    if (r_.core_n() == 0) {
      rep.best_assignment.assign(static_cast<std::size_t>(r_.n), 0);
      rep.best = r_.score(rep.best_assignment);
    } else {
      round_points(rep, seed);
    }
    if (opt_.timings) {
      rep.timings = timings_;
      rep.timings.emplace_back("rounding", clock.lap());
    }
    if (opt_.oracle) {
      rep.opt = r_.oracle();
      rep.gap = *rep.opt - rep.best;
      if (opt_.timings) rep.timings.emplace_back("oracle", clock.lap());
    }
    return rep;
  }

 private:
  SolveReport skeleton(std::uint64_t seed) const {
    SolveReport rep;
    rep.problem = r_.problem;
    rep.name = r_.name;
    rep.n = r_.n;
    rep.q = r_.q;
    rep.m = r_.m;
    rep.eps = r_.eps;
    rep.eps_alg = r_.eps_alg;
    rep.seed = seed;
    rep.samples = samples_;
    rep.trace_d = r_.trace_d;
    rep.input_scale = r_.input_scale;
    rep.eigen_mode = opt_.eigen == EigenMode::Exact ? "exact" : "power";
    rep.eigen_fallback = eigen_fallback_;
    rep.k = static_cast<int>(projector_.rank());
    rep.retained.assign(projector_.values.data(), projector_.values.data() + projector_.values.size());
    rep.lambda_max = lambda_max_;
    rep.lambda_min = lambda_min_;
    rep.net_radius = net_.radius;
    rep.net_mesh = net_.mesh;
    rep.net_spacing = net_.spacing;
    rep.net_half_width = net_.half_width;
    rep.net_size = net_.size();
    rep.net_bound = model_ ? net_size_bound(net_.k, net_.radius, net_.mesh) : 0.0;
    rep.scale = model_ ? model_->scale() : 0.0;
    return rep;
  }

  Assignment full(const Assignment& core) const { return reattach(core, r_.kept, r_.n); }

  void round_points(SolveReport& rep, std::uint64_t seed) const {
    const Index count = net_.size();
    rep.points.resize(static_cast<std::size_t>(count));
    std::vector<Assignment> winners(static_cast<std::size_t>(count));
    detail::parallel_for(count, opt_.workers, [&](Index s) {
      const auto& res = results_[static_cast<std::size_t>(s)];
      auto& rec = rep.points[static_cast<std::size_t>(s)];
      rec.index = s;
      rec.coords = net_.point(s);
      rec.status = res.status;
      rec.iterations = res.iterations;
      rec.note = res.note;
      if (res.status != SdpStatus::Solved) return;
      rec.sdp_objective = res.objective;
      rec.sdp_value = r_.shift + r_.factor * res.objective;
      rec.ball_value = res.ball_value;
      rec.expected_quadratic = expected_quadratic(*res.pe, model_->objective());
      rec.expected_value = r_.shift + r_.factor * rec.expected_quadratic;
      for (auto& core : round(*res.pe, stream_seed(seed, static_cast<std::uint64_t>(s)), samples_)) {
        Assignment a = full(core);
        const double v = r_.score(a);
        auto& w = winners[static_cast<std::size_t>(s)];
        if (!rec.best_rounded || v > *rec.best_rounded || (v == *rec.best_rounded && a < w)) {
          rec.best_rounded = v;
          w = std::move(a);
        }
      }
    });
    for (const auto& rec : rep.points) {
      switch (rec.status) {
        case SdpStatus::Solved: ++rep.solved; break;
        case SdpStatus::Infeasible: ++rep.infeasible; break;
        case SdpStatus::Unresolved: ++rep.unresolved; break;
      }
      if (rec.best_rounded && (!rep.best_index || *rec.best_rounded > rep.best)) {
        rep.best = *rec.best_rounded;
        rep.best_index = rec.index;
        rep.best_assignment = winners[static_cast<std::size_t>(rec.index)];
      }
    }
    if (!rep.best_index) fallback(rep, seed);
  }

  // Every net point failed: best of 100 uniform assignments.
  void fallback(SolveReport& rep, std::uint64_t seed) const {
    rep.fallback = true;
    std::mt19937_64 rng(stream_seed(seed, static_cast<std::uint64_t>(net_.size())));
    std::uniform_int_distribution<int> label(0, r_.q - 1);
    bool first = true;
    for (int t = 0; t < 100; ++t) {
      Assignment a(static_cast<std::size_t>(r_.n));
      for (auto& x : a) x = label(rng);
      const double v = r_.score(a);
      if (first || v > rep.best || (v == rep.best && a < rep.best_assignment)) {
        rep.best = v;
        rep.best_assignment = std::move(a);
        first = false;
      }
    }
  }

  Reduction r_;
  SolveOptions opt_;
  int samples_ = 0;
  Projector projector_;
  bool eigen_fallback_ = false;
  std::optional<double> lambda_max_, lambda_min_;
  EpsilonNet net_;
  std::shared_ptr<const MomentSdp> model_;
  std::vector<SdpResult> results_;
  std::vector<std::pair<std::string, double>> timings_;
};

inline SolveReport solve_2csp(const CspInstance& inst, double eps, std::uint64_t seed,
                              const SolveOptions& options = {}) {
  return Pipeline(reduce_2csp(inst, eps), options).run(seed);
}

inline SolveReport solve_maxcut(const Graph& g, double eps, std::uint64_t seed, const SolveOptions& options = {}) {
  return Pipeline(reduce_maxcut(g, eps), options).run(seed);
}

inline SolveReport solve_boolean_quadratic(const SymMatrix& a, double eps, std::uint64_t seed,
                                           const SolveOptions& options = {}) {
  return Pipeline(reduce_quadratic(a, eps), options).run(seed);
}

}  // namespace trcsp
