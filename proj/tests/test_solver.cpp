#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "support.hpp"
#include "trcsp/brute_force.hpp"
#include "trcsp/generate.hpp"
#include "trcsp/io.hpp"
#include "trcsp/solver.hpp"

using namespace trcsp;

namespace {

SolveOptions with_oracle() {
  SolveOptions o;
  o.oracle = true;
  return o;
}

// One-hot encoding of a core assignment.
Vector one_hot(const Assignment& a, int q) {
  Vector y = Vector::Zero(static_cast<Index>(a.size()) * q);
  for (std::size_t i = 0; i < a.size(); ++i) y(label_index(q, static_cast<int>(i), a[i])) = 1.0;
  return y;
}

Assignment random_assignment(std::mt19937_64& rng, int n, int q) {
  Assignment a(n);
  for (auto& x : a) x = static_cast<int>(rng() % q);
  return a;
}

}  // namespace

TEST(BruteForce, AgreesWithEnumeration) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const int q = 2 + static_cast<int>(seed % 3);
    const int n = q == 4 ? 5 : 7;
    const auto gen = generate(GenKind::RandomCsp, {.n = n, .q = q, .m = 10, .density = 0.3}, seed);
    const auto bf = brute_force(gen.instance);
    EXPECT_EQ(bf.opt, oracle::enumerate_opt(gen.instance));
    EXPECT_EQ(evaluate(gen.instance, bf.assignment), bf.opt);
  }
}

TEST(BruteForce, LexicographicTieBreak) {
  const auto everything = oracle::make_instance(3, 3, {{0, 1, all_pairs(3)}, {1, 2, all_pairs(3)}});
  EXPECT_EQ(brute_force(everything).assignment, (Assignment{0, 0, 0}));
  const auto cut = oracle::make_instance(2, 2, {{0, 1, inequality_pairs(2)}});
  const auto bf = brute_force(cut);
  EXPECT_EQ(bf.opt, 1);
  EXPECT_EQ(bf.assignment, (Assignment{0, 1}));
  const auto late = oracle::make_instance(2, 3, {{0, 1, {{2, 1}, {2, 2}}}});
  EXPECT_EQ(brute_force(late).assignment, (Assignment{2, 1}));
}

TEST(BruteForce, Cap) {
  CspInstance big;
  big.n = 24;
  big.q = 2;
  big.edges.push_back({0, 1, inequality_pairs(2)});
  EXPECT_THROW(brute_force(big), SizeLimitExceeded);
  EXPECT_THROW(brute_force_quadratic(SymMatrix::zero(24)), SizeLimitExceeded);
}

TEST(BruteForce, Quadratic) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 10; ++t) {
    const Matrix a = oracle::random_symmetric(rng, 2 + t % 8);
    const auto r = brute_force_quadratic(SymMatrix(a));
    EXPECT_NEAR(r.value, oracle::enumerate_quadratic(a), 1e-9);
    EXPECT_NEAR(quadratic_value(SymMatrix(a), r.x), r.value, 1e-9);
  }
  EXPECT_EQ(brute_force_quadratic(SymMatrix::zero(3)).x, (std::vector<int>{1, 1, 1}));
}

TEST(Reduction, ShiftAndFactorRecoverTheObjective) {
  // shift + factor * y^T C y equals the problem objective on every integral y.
  std::mt19937_64 rng(12);
  const auto csp = generate(GenKind::RandomCsp, {.n = 6, .q = 3, .m = 9}, 1).instance;
  const auto r2 = reduce_2csp(csp, 0.2);
  const Matrix c2 = weighted_objective(r2.mat, r2.e_diag);
  const Graph g = oracle::cycle(5);
  const auto rm = reduce_maxcut(g, 0.2);
  const Matrix cm = weighted_objective(rm.mat, rm.e_diag);
  Matrix a = oracle::random_symmetric(rng, 5);
  const auto rq = reduce_quadratic(SymMatrix(a), 0.2);
  const Matrix cq = weighted_objective(rq.mat, rq.e_diag);
  for (int t = 0; t < 30; ++t) {
    const auto x2 = random_assignment(rng, 6, 3);
    const Vector y2 = one_hot(x2, 3);
    EXPECT_NEAR(r2.shift + r2.factor * y2.dot(c2 * y2), oracle::count_satisfied(csp, x2), 1e-9);

    const auto xm = random_assignment(rng, 5, 2);
    const Vector ym = one_hot(xm, 2);
    int cut = 0;
    for (auto [u, v] : g.edges) cut += xm[u] != xm[v];
    EXPECT_NEAR(rm.shift + rm.factor * ym.dot(cm * ym), cut, 1e-9);

    const auto xq = random_assignment(rng, 5, 2);
    const Vector yq = one_hot(xq, 2);
    Vector s(5);
    for (int i = 0; i < 5; ++i) s(i) = xq[i] == 0 ? 1.0 : -1.0;
    EXPECT_NEAR(rq.shift + rq.factor * yq.dot(cq * yq), s.dot(a * s), 1e-9);
  }
}

TEST(Reduction, Preconditions) {
  const auto inst = oracle::make_instance(2, 2, {{0, 1, all_pairs(2)}});
  EXPECT_THROW(reduce_2csp(inst, 0.0), PreconditionError);
  EXPECT_THROW(reduce_2csp(inst, 1.0), PreconditionError);
  EXPECT_NO_THROW(reduce_2csp(inst, 0.99));
  EXPECT_THROW(reduce_maxcut(oracle::make_graph(3, {}), 0.2), PreconditionError);
  EXPECT_THROW(reduce_quadratic(SymMatrix::zero(0), 0.2), InvalidInput);
  auto bad = inst;
  bad.edges[0].v = 0;
  EXPECT_THROW(reduce_2csp(bad, 0.2), InvalidInput);
}

TEST(Reduction, QuadraticRescale) {
  Matrix a = 3.0 * (Matrix::Ones(4, 4) - Matrix::Identity(4, 4));
  a.diagonal() << 1, 2, 3, 4;
  const auto r = reduce_quadratic(SymMatrix(a), 0.2);
  EXPECT_NEAR(r.input_scale, 9.0, 1e-12);
  EXPECT_NEAR(r.shift, 10.0, 1e-12);
  EXPECT_LE(operator_norm(r.mat), 1.0 + 1e-12);
  const auto small = reduce_quadratic(SymMatrix(Matrix(0.1 * a)), 0.2);
  EXPECT_EQ(small.input_scale, 1.0);
}

TEST(Solve2Csp, SmallInstancesReachOpt) {
  const auto eq = oracle::make_instance(3, 2, {{0, 1, equality_pairs(2)}, {1, 2, equality_pairs(2)}});
  auto rep = solve_2csp(eq, 0.2, 1, with_oracle());
  EXPECT_EQ(rep.best, 2);
  EXPECT_EQ(*rep.opt, 2);
  EXPECT_EQ(evaluate(eq, rep.best_assignment), 2);

  const auto planted = generate(GenKind::PlantedAssignment, {.n = 8, .q = 3, .m = 12}, 7);
  rep = solve_2csp(planted.instance, 0.2, 3, with_oracle());
  EXPECT_EQ(*rep.opt, 12);
  EXPECT_EQ(rep.best, evaluate(planted.instance, rep.best_assignment));
  EXPECT_GE(rep.best, 12 - 5 * 0.2 * 3 * 12);
  EXPECT_FALSE(rep.fallback);
}

TEST(SolveMaxcut, Examples) {
  auto rep = solve_maxcut(oracle::complete_bipartite(3, 3), 0.2, 1, with_oracle());
  EXPECT_EQ(rep.best, 9);
  EXPECT_EQ(*rep.opt, 9);
  EXPECT_EQ(rep.k, 1);
  const auto& x = rep.best_assignment;
  EXPECT_TRUE(x[0] == x[1] && x[1] == x[2] && x[3] == x[4] && x[4] == x[5] && x[0] != x[3]);

  rep = solve_maxcut(oracle::cycle(4), 0.2, 1, with_oracle());
  EXPECT_EQ(rep.best, 4);
  EXPECT_EQ(rep.k, 1);

  rep = solve_maxcut(oracle::cycle(3), 0.05, 1, with_oracle());
  EXPECT_EQ(rep.best, 2);
  EXPECT_EQ(*rep.opt, 2);
  EXPECT_EQ(rep.k, 2);
}

TEST(SolveQuadratic, Examples) {
  auto rep = solve_boolean_quadratic(SymMatrix::zero(3), 0.2, 1, with_oracle());
  EXPECT_EQ(rep.best, 0);
  EXPECT_EQ(rep.k, 0);

  const Matrix j = (Matrix::Ones(4, 4) - Matrix::Identity(4, 4)) / 3.0;
  rep = solve_boolean_quadratic(SymMatrix(j), 0.2, 1, with_oracle());
  EXPECT_NEAR(rep.best, 4.0, 1e-12);
  EXPECT_NEAR(*rep.opt, 4.0, 1e-12);

  Matrix c4 = Matrix::Zero(4, 4);
  for (auto [u, v] : oracle::cycle(4).edges) c4(u, v) = c4(v, u) = -0.5;
  rep = solve_boolean_quadratic(SymMatrix(c4), 0.2, 1, with_oracle());
  EXPECT_NEAR(rep.best, 4.0, 1e-12);
  EXPECT_NEAR(rep.best, quadratic_value(SymMatrix(c4), to_signs(rep.best_assignment)), 1e-12);

  // Rescaled input still reports values in the original units.
  rep = solve_boolean_quadratic(SymMatrix(Matrix(9.0 * j)), 0.2, 1, with_oracle());
  EXPECT_NEAR(rep.input_scale, 9.0, 1e-12);
  EXPECT_NEAR(rep.best, 36.0, 1e-9);
  EXPECT_NEAR(*rep.gap, 0.0, 1e-9);
}

TEST(Report, Invariants) {
  const auto gen = generate(GenKind::RandomRegular, {.n = 10, .q = 2, .degree = 3}, 2);
  SolveOptions o = with_oracle();
  o.workers = 3;
  const auto rep = solve_2csp(gen.instance, 0.2, 5, o);
  EXPECT_EQ(rep.net_size, static_cast<Index>(rep.points.size()));
  EXPECT_EQ(rep.solved + rep.infeasible + rep.unresolved, static_cast<int>(rep.points.size()));
  EXPECT_LE(static_cast<double>(rep.net_size), rep.net_bound);
  EXPECT_EQ(rep.samples, default_samples(0.2));
  EXPECT_EQ(rep.k, static_cast<int>(rep.retained.size()));
  for (double l : rep.retained) EXPECT_GE(l, 0.4 - 1e-9);
  EXPECT_DOUBLE_EQ(rep.trace_d, 2.0 * 2 * gen.instance.m());
  ASSERT_TRUE(rep.best_index.has_value());
  EXPECT_EQ(rep.best, *rep.points[static_cast<std::size_t>(*rep.best_index)].best_rounded);
  double top = -1;
  for (const auto& p : rep.points) {
    if (p.status == SdpStatus::Solved) {
      EXPECT_NEAR(p.sdp_value, 0.5 * p.sdp_objective, 1e-12);
      EXPECT_LE(*p.best_rounded, *rep.opt);
      top = std::max(top, *p.best_rounded);
    } else {
      EXPECT_FALSE(p.best_rounded.has_value());
    }
  }
  EXPECT_EQ(top, rep.best);
  // Smallest net index among the ties.
  for (const auto& p : rep.points) {
    if (p.best_rounded && *p.best_rounded == rep.best) {
      EXPECT_EQ(p.index, *rep.best_index);
      break;
    }
  }
  EXPECT_EQ(evaluate(gen.instance, rep.best_assignment), rep.best);
  EXPECT_TRUE(rep.timings.empty());
}

TEST(Report, SameForAnyWorkerCount) {
  const auto gen = generate(GenKind::PlantedAssignment, {.n = 9, .q = 3, .m = 16}, 4);
  SolveOptions one, four;
  one.workers = 1;
  four.workers = 4;
  for (std::uint64_t seed : {0, 1, 99}) {
    EXPECT_EQ(emit_report(solve_2csp(gen.instance, 0.2, seed, one)),
              emit_report(solve_2csp(gen.instance, 0.2, seed, four)));
  }
}

TEST(Report, SeedsChangeOnlyTheRounding) {
  const auto gen = generate(GenKind::RandomCsp, {.n = 8, .q = 2, .m = 14}, 8);
  const Pipeline p(reduce_2csp(gen.instance, 0.2), {});
  const auto a = p.run(1), b = p.run(2);
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t s = 0; s < a.points.size(); ++s) {
    EXPECT_EQ(a.points[s].status, b.points[s].status);
    EXPECT_EQ(a.points[s].sdp_objective, b.points[s].sdp_objective);
  }
  EXPECT_EQ(emit_report(p.run(1)), emit_report(a));
}

TEST(Report, TimingsAreOptIn) {
  SolveOptions o;
  o.timings = true;
  const auto rep = solve_maxcut(oracle::cycle(4), 0.2, 0, o);
  ASSERT_FALSE(rep.timings.empty());
  EXPECT_EQ(rep.timings.front().first, "spectral");
}

TEST(Fallback, EveryPointUnresolved) {
  SolveOptions o;
  o.sdp.max_iterations = 1;
  const auto gen = generate(GenKind::RandomCsp, {.n = 6, .q = 2, .m = 9}, 1);
  const auto rep = solve_2csp(gen.instance, 0.2, 4, o);
  EXPECT_EQ(rep.solved, 0);
  EXPECT_TRUE(rep.fallback);
  EXPECT_EQ(rep.exit_code(), 3);
  EXPECT_FALSE(rep.best_index.has_value());
  EXPECT_EQ(evaluate(gen.instance, rep.best_assignment), rep.best);
  EXPECT_EQ(emit_report(rep), emit_report(solve_2csp(gen.instance, 0.2, 4, o)));
}

TEST(Solve2Csp, IsolatedVariablesGetLabelZero) {
  const auto inst = oracle::make_instance(5, 3, {{1, 3, {{2, 1}}}});
  const auto rep = solve_2csp(inst, 0.2, 0, with_oracle());
  EXPECT_EQ(rep.best, 1);
  EXPECT_EQ(rep.best_assignment, (Assignment{0, 2, 0, 1, 0}));

  CspInstance empty;
  empty.n = 3;
  empty.q = 2;
  const auto e = solve_2csp(empty, 0.2, 0);
  EXPECT_EQ(e.best_assignment, (Assignment{0, 0, 0}));
  EXPECT_EQ(e.best, 0);
  EXPECT_EQ(e.exit_code(), 0);
}

TEST(Solve2Csp, PowerModeMatchesExact) {
  const auto gen = generate(GenKind::RandomRegular, {.n = 10, .q = 2, .degree = 3}, 6);
  SolveOptions pw;
  pw.eigen = EigenMode::Power;
  const auto p = solve_2csp(gen.instance, 0.2, 1, pw);
  const auto e = solve_2csp(gen.instance, 0.2, 1);
  EXPECT_EQ(p.eigen_mode, "power");
  EXPECT_FALSE(p.eigen_fallback);
  EXPECT_LE(p.k, e.k);
  EXPECT_EQ(evaluate(gen.instance, p.best_assignment), p.best);
}

TEST(Solve2Csp, NetCap) {
  const auto gen = generate(GenKind::RandomRegular, {.n = 10, .q = 2, .degree = 3}, 2);
  SolveOptions o;
  o.net_cap = 2;
  EXPECT_THROW(solve_2csp(gen.instance, 0.2, 1, o), SizeLimitExceeded);
}

TEST(Solve2Csp, GuaranteeOnRandomInstances) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const int q = 2 + static_cast<int>(seed % 2);
    const auto gen = generate(seed % 2 ? GenKind::PlantedAssignment : GenKind::RandomCsp,
                              {.n = q == 2 ? 9 : 7, .q = q, .m = 12}, 300 + seed);
    const auto rep = solve_2csp(gen.instance, 0.2, seed, with_oracle());
    const int opt = oracle::enumerate_opt(gen.instance);
    EXPECT_EQ(*rep.opt, opt);
    EXPECT_GE(rep.best, opt - 5 * 0.2 * q * 12) << "seed " << seed;
    // Some solved net point has SDP value at least OPT.
    double top = -1;
    for (const auto& p : rep.points)
      if (p.status == SdpStatus::Solved) top = std::max(top, p.sdp_value);
    EXPECT_GE(top, opt - 1e-5 * rep.scale) << "seed " << seed;
  }
}
