#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "trcsp/common.hpp"

namespace trcsp {

/// Pair of labels (alpha, beta) meaning "x_u = alpha, x_v = beta".
using LabelPair = std::pair<int, int>;

/// One binary constraint. `allowed` is the satisfying set of the predicate,
/// with the first label belonging to `u` and the second to `v`.
struct CspEdge {
  int u = 0;
  int v = 0;
  std::vector<LabelPair> allowed;

  bool operator==(const CspEdge&) const = default;
};

/// MAX-2CSP instance over alphabet [q]. Unweighted; at most one constraint
/// per unordered variable pair.
struct CspInstance {
  int n = 0;
  int q = 2;
  std::vector<CspEdge> edges;
  std::optional<std::string> name;

  int m() const { return static_cast<int>(edges.size()); }
  bool operator==(const CspInstance&) const = default;
};

/// x in [q]^n, one label per variable.
using Assignment = std::vector<int>;

/// Simple undirected graph, used for the MAX-CUT entry points.
struct Graph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;

  int m() const { return static_cast<int>(edges.size()); }
  bool operator==(const Graph&) const = default;
};

struct Violation {
  std::string code;
  std::string detail;
};

/// Every invariant violation of `inst`; an empty list means the instance is valid.
inline std::vector<Violation> validate(const CspInstance& inst) {
  std::vector<Violation> out;
  if (inst.n < 1) out.push_back({"no variables", "n = " + std::to_string(inst.n)});
  if (inst.q < 2) out.push_back({"alphabet too small", "q = " + std::to_string(inst.q)});
  std::set<std::pair<int, int>> seen;
  for (std::size_t e = 0; e < inst.edges.size(); ++e) {
    const auto& edge = inst.edges[e];
    const std::string where = "edge #" + std::to_string(e) + " (" + std::to_string(edge.u) + "," +
                              std::to_string(edge.v) + ")";
    if (edge.u == edge.v) {
      out.push_back({"self-loop", where});
    } else if (edge.u > edge.v) {
      out.push_back({"unordered edge", where + ": expected u < v"});
    }
    if (edge.u < 0 || edge.v < 0 || edge.u >= inst.n || edge.v >= inst.n) {
      out.push_back({"endpoint out of range", where});
    }
    if (!seen.insert(std::minmax(edge.u, edge.v)).second) {
      out.push_back({"duplicate edge", where});
    }
    if (edge.allowed.empty()) out.push_back({"empty predicate", where});
    std::set<LabelPair> pairs;
    for (const auto& [a, b] : edge.allowed) {
      if (a < 0 || b < 0 || a >= inst.q || b >= inst.q) {
        out.push_back({"label out of range", where + ": (" + std::to_string(a) + "," +
                                                 std::to_string(b) + ")"});
      }
      if (!pairs.insert({a, b}).second) {
        out.push_back({"duplicate allowed pair", where + ": (" + std::to_string(a) + "," +
                                                     std::to_string(b) + ")"});
      }
    }
  }
  return out;
}

inline void require_valid(const CspInstance& inst) {
  const auto violations = validate(inst);
  if (!violations.empty()) {
    std::string msg = "invalid instance:";
    for (const auto& v : violations) msg += " [" + v.code + ": " + v.detail + "]";
    throw InvalidInput(msg);
  }
}

inline bool satisfies(const CspEdge& edge, int a, int b) {
  return std::find(edge.allowed.begin(), edge.allowed.end(), LabelPair{a, b}) != edge.allowed.end();
}

/// Number of satisfied constraints.
inline int evaluate(const CspInstance& inst, const Assignment& a) {
  if (static_cast<int>(a.size()) != inst.n) {
    throw InvalidInput("evaluate: assignment has length " + std::to_string(a.size()) +
                       ", instance has n = " + std::to_string(inst.n));
  }
  for (int v : a) {
    if (v < 0 || v >= inst.q) throw InvalidInput("evaluate: label " + std::to_string(v) + " out of range");
  }
  int total = 0;
  for (const auto& edge : inst.edges) total += satisfies(edge, a[edge.u], a[edge.v]) ? 1 : 0;
  return total;
}

inline std::vector<int> degrees(const CspInstance& inst) {
  std::vector<int> deg(inst.n, 0);
  for (const auto& e : inst.edges) {
    ++deg[e.u];
    ++deg[e.v];
  }
  return deg;
}

inline SymMatrix degree_diagonal(const CspInstance& inst) {
  const auto deg = degrees(inst);
  Vector d(inst.n);
  for (int i = 0; i < inst.n; ++i) d(i) = deg[i];
  return SymMatrix::diagonal(d);
}

/// 0/1 adjacency of the constraint graph.
inline SymMatrix adjacency(const CspInstance& inst) {
  Matrix a = Matrix::Zero(inst.n, inst.n);
  for (const auto& e : inst.edges) a(e.u, e.v) = a(e.v, e.u) = 1.0;
  return SymMatrix(std::move(a));
}

/// D^{-1/2} A D^{-1/2}. Requires every vertex to have degree >= 1.
inline SymMatrix normalized_adjacency(const CspInstance& inst) {
  const auto deg = degrees(inst);
  for (int i = 0; i < inst.n; ++i) {
    if (deg[i] == 0) throw PreconditionError("variable " + std::to_string(i) + " has degree 0");
  }
  Matrix a = Matrix::Zero(inst.n, inst.n);
  for (const auto& e : inst.edges) {
    a(e.u, e.v) = a(e.v, e.u) = 1.0 / std::sqrt(static_cast<double>(deg[e.u]) * deg[e.v]);
  }
  return SymMatrix(std::move(a));
}

/// Row index of (variable, label) in every nq-dimensional object.
inline Index label_index(int q, int var, int label) {
  return static_cast<Index>(q) * var + label;
}

/// Adjacency of the label-extended graph on [n] x [q].
inline SymMatrix label_extended(const CspInstance& inst) {
  const Index nq = static_cast<Index>(inst.n) * inst.q;
  Matrix b = Matrix::Zero(nq, nq);
  for (const auto& e : inst.edges) {
    for (const auto& [a, c] : e.allowed) {
      const Index r = label_index(inst.q, e.u, a);
      const Index s = label_index(inst.q, e.v, c);
      b(r, s) = b(s, r) = 1.0;
    }
  }
  return SymMatrix(std::move(b));
}

struct NormalizedLabelExtended {
  SymMatrix m;  ///< (1/q) * normalized label-extended adjacency
  SymMatrix e;  ///< q D (x) I_q
};

inline NormalizedLabelExtended normalized_label_extended(const CspInstance& inst) {
  require_valid(inst);
  const auto deg = degrees(inst);
  for (int i = 0; i < inst.n; ++i) {
    if (deg[i] == 0) {
      throw PreconditionError("normalized_label_extended: variable " + std::to_string(i) +
                              " has degree 0; strip isolated variables first");
    }
  }
  const int q = inst.q;
  const Index nq = static_cast<Index>(inst.n) * q;
  Matrix m = Matrix::Zero(nq, nq);
  for (const auto& e : inst.edges) {
    const double w = 1.0 / (q * std::sqrt(static_cast<double>(deg[e.u]) * deg[e.v]));
    for (const auto& [a, c] : e.allowed) {
      const Index r = label_index(q, e.u, a);
      const Index s = label_index(q, e.v, c);
      m(r, s) = m(s, r) = w;
    }
  }
  Vector ediag(nq);
  for (int i = 0; i < inst.n; ++i) ediag.segment(static_cast<Index>(i) * q, q).setConstant(double(q) * deg[i]);
  return {SymMatrix(std::move(m)), SymMatrix::diagonal(ediag)};
}

/// Instance restricted to variables of positive degree.
struct StrippedInstance {
  CspInstance core;
  std::vector<int> kept;  ///< core variable -> original variable
};

inline StrippedInstance strip_isolated(const CspInstance& inst) {
  const auto deg = degrees(inst);
  std::vector<int> remap(inst.n, -1);
  StrippedInstance out;
  for (int i = 0; i < inst.n; ++i) {
    if (deg[i] > 0) {
      remap[i] = static_cast<int>(out.kept.size());
      out.kept.push_back(i);
    }
  }
  out.core.n = static_cast<int>(out.kept.size());
  out.core.q = inst.q;
  out.core.name = inst.name;
  for (const auto& e : inst.edges) out.core.edges.push_back({remap[e.u], remap[e.v], e.allowed});
  return out;
}

/// Lifts a core assignment back to the original variables; stripped ones get 0.
inline Assignment reattach(const Assignment& core, const std::vector<int>& kept, int n) {
  Assignment full(n, 0);
  for (std::size_t c = 0; c < kept.size(); ++c) full[kept[c]] = core[c];
  return full;
}

inline std::vector<LabelPair> inequality_pairs(int q) {
  std::vector<LabelPair> out;
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b)
      if (a != b) out.push_back({a, b});
  return out;
}

inline std::vector<LabelPair> equality_pairs(int q) {
  std::vector<LabelPair> out;
  for (int a = 0; a < q; ++a) out.push_back({a, a});
  return out;
}

inline std::vector<LabelPair> all_pairs(int q) {
  std::vector<LabelPair> out;
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b) out.push_back({a, b});
  return out;
}

/// MAX-CUT as a q = 2 CSP with inequality predicates. Edge endpoints are
/// ordered; duplicates and self-loops are rejected by validation.
inline CspInstance maxcut_instance(const Graph& g) {
  CspInstance inst;
  inst.n = g.n;
  inst.q = 2;
  for (auto [u, v] : g.edges) {
    if (u > v) std::swap(u, v);
    inst.edges.push_back({u, v, inequality_pairs(2)});
  }
  require_valid(inst);
  return inst;
}

inline Graph constraint_graph(const CspInstance& inst) {
  Graph g;
  g.n = inst.n;
  for (const auto& e : inst.edges) g.edges.emplace_back(e.u, e.v);
  return g;
}

}  // namespace trcsp
