#pragma once

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "trcsp/certificate.hpp"
#include "trcsp/generate.hpp"
#include "trcsp/io.hpp"
#include "trcsp/solver.hpp"
#include "trcsp/trials.hpp"

namespace trcsp::cli {

enum ExitCode { kOk = 0, kInputError = 1, kRefused = 2, kSolverFailure = 3 };

struct RunConfig {
  std::string input;
  double eps = 0.2;
  std::uint64_t seed = 0;
  int workers = 1;
  std::uint64_t net_cap = kDefaultNetCap;
  int samples = 0;
  bool oracle = false;
  std::string out;
  bool exact_eig = false;
  bool power_eig = false;
  bool timings = false;
  SdpTolerances sdp;
};

namespace detail {

inline const CLI::Validator& writable_path() {
  static const CLI::Validator v(
      [](std::string& path) -> std::string {
        const auto parent = std::filesystem::path(path).parent_path();
        if (!parent.empty() && !std::filesystem::is_directory(parent)) {
          return "directory '" + parent.string() + "' does not exist";
        }
        if (std::filesystem::is_directory(path)) return "'" + path + "' is a directory";
        return {};
      },
      "PATH");
  return v;
}

inline const CLI::Validator& open_unit() {
  static const CLI::Validator v(
      [](std::string& s) -> std::string {
        double x = 0;
        try {
          x = std::stod(s);
        } catch (...) {
          return "'" + s + "' is not a number";
        }
        if (!(x > 0.0 && x < 1.0)) return "value must lie in (0, 1)";
        return {};
      },
      "(0,1)");
  return v;
}

inline void add_run_flags(CLI::App* sub, RunConfig& c) {
  sub->add_option("--eps", c.eps, "approximation parameter in (0,1)")->check(open_unit())->capture_default_str();
  sub->add_option("--seed", c.seed, "master seed for rounding")->capture_default_str();
  sub->add_option("--workers", c.workers, "worker threads for net points")
      ->check(CLI::Range(1, 1024))
      ->capture_default_str();
  sub->add_option("--net-cap", c.net_cap, "refuse nets with more points than this")->capture_default_str();
  sub->add_option("--samples", c.samples, "rounding samples per net point (0: max(16, ceil(4/eps)))")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_flag("--oracle", c.oracle, "also compute OPT by brute force");
  sub->add_option("--out", c.out, "write the JSON report here")->check(writable_path());
  auto* exact = sub->add_flag("--exact-eig", c.exact_eig, "dense eigendecomposition (default)");
  auto* power = sub->add_flag("--power-eig", c.power_eig, "block power iteration, exact on failure");
  exact->excludes(power);
  sub->add_flag("--timings", c.timings, "record wall-clock per phase in the report");
  sub->add_option("--sdp-max-iterations", c.sdp.max_iterations, "ADMM iteration cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--sdp-psd-tol", c.sdp.psd, "PSD / feasibility tolerance eta")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--sdp-gap-tol", c.sdp.gap, "relative duality gap target")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

inline SolveOptions solve_options(const RunConfig& c) {
  SolveOptions o;
  o.workers = c.workers;
  o.net_cap = c.net_cap;
  o.samples = c.samples;
  o.eigen = c.power_eig ? EigenMode::Power : EigenMode::Exact;
  o.oracle = c.oracle;
  o.timings = c.timings;
  o.sdp = c.sdp;
  return o;
}

inline int finish_solve(const SolveReport& rep, const RunConfig& c, std::ostream& out, std::ostream& err) {
  if (!c.out.empty()) write_file(c.out, emit_report(rep));
  out << summary_line(rep) << "\n";
  if (rep.fallback) {
    err << "warning: no net point produced a solution; reporting the best of 100 random assignments\n";
  }
  return rep.exit_code();
}

inline void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
  } else {
    write_file(path, text);
  }
}

// Normalized adjacency with isolated vertices removed.
inline SymMatrix graph_matrix(const CspInstance& inst) { return normalized_adjacency(strip_isolated(inst).core); }

}  // namespace detail

/// Runs the command line `args` (args[0] is the program name). Output goes
/// to `out`, diagnostics to `err`; the return value is the process exit code.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Approximate MAX-2CSP, MAX-CUT and Boolean quadratic optimization on graphs of bounded threshold rank",
               "trcsp"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "trcsp 0.1.0");

  RunConfig solve_cfg, maxcut_cfg, quad_cfg;
  auto* solve = app.add_subcommand("solve", "solve a MAX-2CSP instance (JSON)");
  solve->add_option("--instance", solve_cfg.input, "instance JSON")->required()->check(CLI::ExistingFile);
  detail::add_run_flags(solve, solve_cfg);

  auto* maxcut = app.add_subcommand("maxcut", "MAX-CUT on a graph in 'n m' + edge-list text format");
  maxcut->add_option("--graph", maxcut_cfg.input, "graph text file")->required()->check(CLI::ExistingFile);
  detail::add_run_flags(maxcut, maxcut_cfg);

  auto* quad = app.add_subcommand("quadratic", "maximize x^T A x over x in {-1,+1}^n");
  quad->add_option("--matrix", quad_cfg.input, "matrix JSON")->required()->check(CLI::ExistingFile);
  detail::add_run_flags(quad, quad_cfg);

  std::string rank_graph, rank_instance, rank_matrix, rank_side, rank_out;
  double rank_tau = 0;
  auto* rank = app.add_subcommand("rank", "threshold ranks of a normalized adjacency or a matrix");
  auto* rg = rank->add_option("--graph", rank_graph, "graph text file")->check(CLI::ExistingFile);
  auto* ri = rank->add_option("--instance", rank_instance, "instance JSON (its constraint graph)")
                 ->check(CLI::ExistingFile);
  auto* rm = rank->add_option("--matrix", rank_matrix, "symmetric matrix JSON, used as is")->check(CLI::ExistingFile);
  rg->excludes(ri)->excludes(rm);
  ri->excludes(rm);
  rank->add_option("--tau", rank_tau, "threshold (> 0)")->required()->check(CLI::PositiveNumber);
  rank->add_option("--side", rank_side, "print only this count")->check(CLI::IsMember({"pos", "neg"}));
  rank->add_option("--out", rank_out, "write the JSON here")->check(detail::writable_path());

  std::string gen_kind, gen_predicate = "cut", gen_format = "json", gen_out;
  GenParams gp;
  std::uint64_t gen_seed = 0;
  auto* gen = app.add_subcommand("gen", "generate an instance");
  gen->add_option("--kind", gen_kind, "generator")
      ->required()
      ->check(CLI::IsMember({"random-regular", "complete-bipartite-noise", "planted-assignment", "random-csp"}));
  gen->add_option("--n", gp.n, "variables")->capture_default_str();
  gen->add_option("--q", gp.q, "alphabet size")->capture_default_str();
  gen->add_option("--degree", gp.degree, "degree (random-regular)")->capture_default_str();
  gen->add_option("--m", gp.m, "constraints (planted-assignment, random-csp)")->capture_default_str();
  gen->add_option("--a", gp.a, "left side (complete-bipartite-noise)")->capture_default_str();
  gen->add_option("--b", gp.b, "right side (complete-bipartite-noise)")->capture_default_str();
  gen->add_option("--rho", gp.rho, "extra-edge probability (complete-bipartite-noise)")->capture_default_str();
  gen->add_option("--density", gp.density, "probability of each optional allowed pair")->capture_default_str();
  gen->add_option("--predicate", gen_predicate, "predicate on graph kinds")
      ->check(CLI::IsMember({"cut", "equal", "all", "random"}))
      ->capture_default_str();
  gen->add_option("--seed", gen_seed, "generator seed")->capture_default_str();
  gen->add_option("--format", gen_format, "json (instance) or graph (edge list)")
      ->check(CLI::IsMember({"json", "graph"}))
      ->capture_default_str();
  gen->add_option("--out", gen_out, "output file (default: stdout)")->check(detail::writable_path());

  int vrb_trials = 100, vrb_label_trials = -1, vrb_max_dim = 40;
  std::uint64_t vrb_seed = 0;
  auto* vrb = app.add_subcommand("verify-rank-bound", "randomized check of the threshold-rank inequality");
  vrb->add_option("--trials", vrb_trials, "random admissible (A, B) pairs")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  vrb->add_option("--label-trials", vrb_label_trials, "label-extended pairs (default: trials / 2)");
  vrb->add_option("--max-dim", vrb_max_dim, "largest dimension of A")->check(CLI::Range(3, 400))->capture_default_str();
  vrb->add_option("--seed", vrb_seed, "seed")->capture_default_str();

  std::string cert_a, cert_b, cert_out;
  double cert_lambda = -1;
  int cert_t = 0, cert_trials = 0, cert_max_dim = 20;
  std::uint64_t cert_seed = 0;
  auto* cert = app.add_subcommand("certify", "build and check the threshold-rank certificate V");
  auto* ca = cert->add_option("--a", cert_a, "matrix JSON for A")->check(CLI::ExistingFile);
  auto* cb = cert->add_option("--b", cert_b, "matrix JSON for B")->check(CLI::ExistingFile);
  cert->add_option("--lambda", cert_lambda, "eigenvalue threshold (>= 0)");
  cert->add_option("--t", cert_t, "number of eigenvectors");
  auto* ct = cert->add_option("--trials", cert_trials, "random admissible inputs instead of files");
  cert->add_option("--max-dim", cert_max_dim, "largest dimension in --trials mode")
      ->check(CLI::Range(2, 400))
      ->capture_default_str();
  cert->add_option("--seed", cert_seed, "seed for --trials")->capture_default_str();
  cert->add_option("--out", cert_out, "write the JSON here")->check(detail::writable_path());
  ct->excludes(ca)->excludes(cb);
  ca->needs(cb);
  cb->needs(ca);

  std::vector<std::string> owned(args.begin(), args.end());
  if (owned.empty()) owned.push_back("trcsp");
  std::vector<char*> argv;
  for (auto& s : owned) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*solve) {
      const CspInstance inst = parse_instance(read_file(solve_cfg.input), solve_cfg.input);
      return detail::finish_solve(solve_2csp(inst, solve_cfg.eps, solve_cfg.seed, detail::solve_options(solve_cfg)),
                                  solve_cfg, out, err);
    }
    if (*maxcut) {
      const Graph g = parse_graph(read_file(maxcut_cfg.input), maxcut_cfg.input);
      return detail::finish_solve(
          solve_maxcut(g, maxcut_cfg.eps, maxcut_cfg.seed, detail::solve_options(maxcut_cfg)), maxcut_cfg, out, err);
    }
    if (*quad) {
      const SymMatrix a = parse_matrix(read_file(quad_cfg.input), quad_cfg.input);
      return detail::finish_solve(
          solve_boolean_quadratic(a, quad_cfg.eps, quad_cfg.seed, detail::solve_options(quad_cfg)), quad_cfg, out,
          err);
    }
    if (*rank) {
      SymMatrix m;
      if (!rank_graph.empty()) {
        m = detail::graph_matrix(maxcut_instance(parse_graph(read_file(rank_graph), rank_graph)));
      } else if (!rank_instance.empty()) {
        m = detail::graph_matrix(parse_instance(read_file(rank_instance), rank_instance));
      } else if (!rank_matrix.empty()) {
        m = parse_matrix(read_file(rank_matrix), rank_matrix);
      } else {
        err << "rank: one of --graph, --instance, --matrix is required\n";
        return kInputError;
      }
      const auto spec = eig_sym(m);
      const int pos = threshold_rank(spec, rank_tau, Side::Pos);
      const int neg = threshold_rank(spec, rank_tau, Side::Neg);
      if (!rank_side.empty()) {
        out << (rank_side == "pos" ? pos : neg) << "\n";
        if (!rank_out.empty()) write_file(rank_out, std::to_string(rank_side == "pos" ? pos : neg) + "\n");
        return kOk;
      }
      const Json j = {{"tau", rank_tau}, {"pos", pos}, {"neg", neg}, {"spectrum_extremes", {spec.max(), spec.min()}}};
      detail::emit(canonical_json(j), rank_out, out);
      return kOk;
    }
    if (*gen) {
      gp.predicate = parse_predicate_kind(gen_predicate);
      const auto kind = parse_gen_kind(gen_kind);
      const Generated g = generate(kind, gp, gen_seed);
      const std::string text =
          gen_format == "graph" ? emit_graph(constraint_graph(g.instance)) : emit_instance(g.instance);
      detail::emit(text, gen_out, out);
      std::ostream& note = gen_out.empty() ? err : out;
      note << "generated " << *g.instance.name << ": n=" << g.instance.n << " q=" << g.instance.q
           << " m=" << g.instance.m();
      if (g.planted) {
        note << " planted=";
        for (int x : *g.planted) note << x;
        note << " (satisfies " << evaluate(g.instance, *g.planted) << " of " << g.instance.m() << ")";
      }
      note << "\n";
      return kOk;
    }
    if (*vrb) {
      if (vrb_label_trials < 0) vrb_label_trials = vrb_trials / 2;
      std::mt19937_64 rng(mix_seed(vrb_seed));
      const struct { double tau, sigma, eps; } configs[] = {{0.25, 0.25, 0.5}, {0.09, 0.09, 0.3}};
      int violations = 0, checks = 0;
      auto check = [&](const AdmissiblePair& p, int trial) {
        for (const auto& c : configs) {
          const auto r = verify_rank_bound(p.a, p.b, c.tau, c.sigma, c.eps, p.q);
          ++checks;
          if (!r.holds || !r.corollary->holds) {
            ++violations;
            out << "violation: trial " << trial << " (" << p.kind << ", dim " << p.a.dim() << ", q " << p.q
                << ") tau=" << c.tau << " rank_b=" << r.rank_b << " bound=" << r.bound
                << " corollary rank_b=" << r.corollary->rank_b << " bound=" << r.corollary->bound << "\n";
          }
        }
      };
      for (int t = 0; t < vrb_trials; ++t) check(random_admissible_pair(rng, vrb_max_dim), t);
      for (int t = 0; t < vrb_label_trials; ++t) {
        const int q = 2 + t % 2;
        check(random_label_extended_pair(rng, q, std::max(3, vrb_max_dim / q)), vrb_trials + t);
      }
      out << "checks: " << checks << "\n" << "violations: " << violations << "\n";
      return violations == 0 ? kOk : kInputError;
    }
    if (*cert) {
      auto report_json = [](const CertificateReport& r) {
        return Json{{"lambda", r.lambda},   {"t", r.t},
                    {"inner", r.inner},     {"frobenius2", r.frobenius2},
                    {"trace", r.trace},     {"tolerance", r.tolerance},
                    {"inner_ok", r.inner_ok}, {"frobenius_ok", r.frobenius_ok},
                    {"trace_ok", r.trace_ok}, {"pass", r.pass()}};
      };
      if (cert_trials > 0) {
        std::mt19937_64 rng(mix_seed(cert_seed));
        int violations = 0;
        Json all = Json::array();
        for (int t = 0; t < cert_trials; ++t) {
          const auto in = random_certificate_input(rng, cert_max_dim);
          const auto r = rank_certificate(in.pair.a, in.pair.b, in.lambda, in.t);
          all.push_back(report_json(r));
          if (!r.pass()) {
            ++violations;
            out << "violation: trial " << t << " inner=" << r.inner << " lambda^2=" << r.lambda * r.lambda
                << " frobenius2=" << r.frobenius2 << " 1/t=" << 1.0 / r.t << " trace=" << r.trace << "\n";
          }
        }
        if (!cert_out.empty()) write_file(cert_out, canonical_json(all));
        out << "violations: " << violations << "\n";
        return violations == 0 ? kOk : kInputError;
      }
      if (cert_a.empty() || cert_lambda < 0 || cert_t < 1) {
        err << "certify: give --a, --b, --lambda >= 0 and --t >= 1, or --trials N\n";
        return kInputError;
      }
      const auto r = rank_certificate(parse_matrix(read_file(cert_a), cert_a), parse_matrix(read_file(cert_b), cert_b),
                                      cert_lambda, cert_t);
      detail::emit(canonical_json(report_json(r)), cert_out, out);
      return r.pass() ? kOk : kInputError;
    }
  } catch (const SizeLimitExceeded& e) {
    err << "refused: " << e.what() << "\n";
    return kRefused;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kSolverFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace trcsp::cli
