#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "trcsp/csp.hpp"

namespace trcsp {

enum class GenKind { RandomRegular, CompleteBipartiteNoise, PlantedAssignment, RandomCsp };

inline GenKind parse_gen_kind(const std::string& s) {
  if (s == "random-regular") return GenKind::RandomRegular;
  if (s == "complete-bipartite-noise") return GenKind::CompleteBipartiteNoise;
  if (s == "planted-assignment") return GenKind::PlantedAssignment;
  if (s == "random-csp") return GenKind::RandomCsp;
  throw InvalidInput("unknown generator kind '" + s + "'");
}

inline std::string to_string(GenKind k) {
  switch (k) {
    case GenKind::RandomRegular: return "random-regular";
    case GenKind::CompleteBipartiteNoise: return "complete-bipartite-noise";
    case GenKind::PlantedAssignment: return "planted-assignment";
    case GenKind::RandomCsp: return "random-csp";
  }
  return "?";
}

/// Predicate family attached to every edge of a generated graph.
enum class PredicateKind { Cut, Equal, All, Random };

inline PredicateKind parse_predicate_kind(const std::string& s) {
  if (s == "cut") return PredicateKind::Cut;
  if (s == "equal") return PredicateKind::Equal;
  if (s == "all") return PredicateKind::All;
  if (s == "random") return PredicateKind::Random;
  throw InvalidInput("unknown predicate kind '" + s + "'");
}

struct GenParams {
  int n = 0;
  int q = 2;
  int degree = 3;          // random-regular
  int m = 0;               // planted-assignment, random-csp
  int a = 0;               // complete-bipartite-noise side sizes
  int b = 0;
  double rho = 0.0;        // complete-bipartite-noise: probability of each extra edge
  double density = 0.5;    // probability that a non-forced label pair is allowed
  PredicateKind predicate = PredicateKind::Cut;  // graph kinds only
};

struct Generated {
  CspInstance instance;
  std::optional<Assignment> planted;  ///< hidden assignment satisfying every edge
};

namespace detail {

inline std::vector<LabelPair> random_predicate(std::mt19937_64& rng, int q, double density,
                                               std::optional<LabelPair> forced) {
  std::bernoulli_distribution keep(density);
  std::vector<LabelPair> allowed;
  for (int a = 0; a < q; ++a) {
    for (int b = 0; b < q; ++b) {
      const bool is_forced = forced && forced->first == a && forced->second == b;
      if (is_forced || keep(rng)) allowed.push_back({a, b});
    }
  }
  if (allowed.empty()) {
    std::uniform_int_distribution<int> label(0, q - 1);
    allowed.push_back({label(rng), label(rng)});
  }
  return allowed;
}

inline std::vector<LabelPair> graph_predicate(std::mt19937_64& rng, const GenParams& p) {
  switch (p.predicate) {
    case PredicateKind::Cut: return inequality_pairs(p.q);
    case PredicateKind::Equal: return equality_pairs(p.q);
    case PredicateKind::All: return all_pairs(p.q);
    case PredicateKind::Random: return random_predicate(rng, p.q, p.density, std::nullopt);
  }
  return {};
}

inline std::vector<std::pair<int, int>> random_pairs(std::mt19937_64& rng, int n, int m) {
  const long long total = static_cast<long long>(n) * (n - 1) / 2;
  if (m < 0 || m > total) {
    throw InvalidInput("cannot place " + std::to_string(m) + " distinct edges on " +
                       std::to_string(n) + " vertices");
  }
  std::vector<std::pair<int, int>> all;
  all.reserve(static_cast<std::size_t>(total));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) all.emplace_back(i, j);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(static_cast<std::size_t>(m));
  std::sort(all.begin(), all.end());
  return all;
}

// Configuration model with rejection of loops and multi-edges.
inline std::vector<std::pair<int, int>> random_regular_edges(std::mt19937_64& rng, int n, int d) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    std::vector<int> stubs;
    stubs.reserve(static_cast<std::size_t>(n) * d);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < d; ++k) stubs.push_back(i);
    std::shuffle(stubs.begin(), stubs.end(), rng);
    std::set<std::pair<int, int>> edges;
    bool ok = true;
    for (std::size_t s = 0; s + 1 < stubs.size(); s += 2) {
      auto e = std::minmax(stubs[s], stubs[s + 1]);
      if (e.first == e.second || !edges.insert(e).second) {
        ok = false;
        break;
      }
    }
    if (ok) return {edges.begin(), edges.end()};
  }
  throw ConvergenceError("random-regular: no simple pairing found");
}

}  // namespace detail

/// Deterministic in `seed`. Always returns a validated instance.
inline Generated generate(GenKind kind, const GenParams& p, std::uint64_t seed) {
  std::mt19937_64 rng(mix_seed(seed));
  if (p.q < 2) throw InvalidInput("generate: q must be >= 2");
  Generated out;
  auto& inst = out.instance;
  inst.q = p.q;
  switch (kind) {
    case GenKind::RandomRegular: {
      if (p.n < 2 || p.degree < 1 || p.degree >= p.n) {
        throw InvalidInput("random-regular: need 1 <= degree < n");
      }
      if ((static_cast<long long>(p.n) * p.degree) % 2 != 0) {
        throw InvalidInput("random-regular: n * degree must be even");
      }
      inst.n = p.n;
      for (auto [u, v] : detail::random_regular_edges(rng, p.n, p.degree)) {
        inst.edges.push_back({u, v, detail::graph_predicate(rng, p)});
      }
      break;
    }
    case GenKind::CompleteBipartiteNoise: {
      if (p.a < 1 || p.b < 1) throw InvalidInput("complete-bipartite-noise: need a, b >= 1");
      if (p.rho < 0.0 || p.rho > 1.0) throw InvalidInput("complete-bipartite-noise: rho must lie in [0,1]");
      inst.n = p.a + p.b;
      std::bernoulli_distribution extra(p.rho);
      for (int i = 0; i < inst.n; ++i) {
        for (int j = i + 1; j < inst.n; ++j) {
          const bool across = (i < p.a) != (j < p.a);
          if (across || extra(rng)) inst.edges.push_back({i, j, detail::graph_predicate(rng, p)});
        }
      }
      break;
    }
    case GenKind::PlantedAssignment: {
      if (p.n < 2) throw InvalidInput("planted-assignment: need n >= 2");
      inst.n = p.n;
      std::uniform_int_distribution<int> label(0, p.q - 1);
      Assignment hidden(p.n);
      for (auto& h : hidden) h = label(rng);
      for (auto [u, v] : detail::random_pairs(rng, p.n, p.m)) {
        inst.edges.push_back(
            {u, v, detail::random_predicate(rng, p.q, p.density, LabelPair{hidden[u], hidden[v]})});
      }
      out.planted = std::move(hidden);
      break;
    }
    case GenKind::RandomCsp: {
      if (p.n < 2) throw InvalidInput("random-csp: need n >= 2");
      inst.n = p.n;
      for (auto [u, v] : detail::random_pairs(rng, p.n, p.m)) {
        inst.edges.push_back({u, v, detail::random_predicate(rng, p.q, p.density, std::nullopt)});
      }
      break;
    }
  }
  inst.name = to_string(kind) + "-s" + std::to_string(seed);
  require_valid(inst);
  return out;
}

}  // namespace trcsp
