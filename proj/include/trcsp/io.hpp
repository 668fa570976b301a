#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "trcsp/csp.hpp"
#include "trcsp/solver.hpp"

namespace trcsp {

using Json = nlohmann::json;

// ---- canonical JSON -------------------------------------------------------
// Sorted keys (nlohmann objects are std::map backed), no whitespace, floats
// as %.17g, non-finite floats as null, trailing LF.

namespace detail {

inline void dump_canonical(const Json& j, std::string& out) {
  switch (j.type()) {
    case Json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += Json(it.key()).dump();
        out += ':';
        dump_canonical(it.value(), out);
      }
      out += '}';
      break;
    }
    case Json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        dump_canonical(j[i], out);
      }
      out += ']';
      break;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
      } else {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out += buf;
      }
      break;
    }
    default: out += j.dump(); break;
  }
}

inline std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace detail

inline std::string canonical_json(const Json& j) {
  std::string out;
  detail::dump_canonical(j, out);
  out += '\n';
  return out;
}

/// Parses JSON text; syntax errors become InvalidInput with line/column.
inline Json parse_json_text(const std::string& text, const std::string& source = "input") {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    const std::string what = e.what();
    const auto colon = what.find("syntax error");
    throw InvalidInput(source + ": " + detail::line_column(text, e.byte > 0 ? e.byte - 1 : 0) + ": " +
                       (colon == std::string::npos ? what : what.substr(colon)));
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  out << contents;
  if (!out) throw InvalidInput("write to '" + path + "' failed");
}

// ---- instances ------------------------------------------------------------

namespace detail {

inline int require_int(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) throw InvalidInput(where + ": expected an integer");
  const auto v = j.get<long long>();
  if (v < -2147483647LL || v > 2147483647LL) throw InvalidInput(where + ": integer out of range");
  return static_cast<int>(v);
}

inline const Json& require_field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw InvalidInput(where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw InvalidInput(where + ": missing field \"" + key + "\"");
  return *it;
}

}  // namespace detail

inline Json instance_to_json(const CspInstance& inst) {
  Json edges = Json::array();
  for (const auto& e : inst.edges) {
    Json allowed = Json::array();
    for (auto [a, b] : e.allowed) allowed.push_back({a, b});
    edges.push_back({{"u", e.u}, {"v", e.v}, {"allowed", allowed}});
  }
  Json j = {{"n", inst.n}, {"q", inst.q}, {"edges", edges}};
  if (inst.name) j["name"] = *inst.name;
  return j;
}

/// Structural parse plus full validation; every problem is named by its
/// JSON path.
inline CspInstance instance_from_json(const Json& j) {
  CspInstance inst;
  inst.n = detail::require_int(detail::require_field(j, "n", "instance"), "n");
  inst.q = detail::require_int(detail::require_field(j, "q", "instance"), "q");
  if (auto it = j.find("name"); it != j.end()) {
    if (!it->is_string()) throw InvalidInput("name: expected a string");
    inst.name = it->get<std::string>();
  }
  const Json& edges = detail::require_field(j, "edges", "instance");
  if (!edges.is_array()) throw InvalidInput("edges: expected an array");
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const std::string where = "edges[" + std::to_string(e) + "]";
    CspEdge edge;
    edge.u = detail::require_int(detail::require_field(edges[e], "u", where), where + ".u");
    edge.v = detail::require_int(detail::require_field(edges[e], "v", where), where + ".v");
    const Json& allowed = detail::require_field(edges[e], "allowed", where);
    if (!allowed.is_array()) throw InvalidInput(where + ".allowed: expected an array");
    for (std::size_t p = 0; p < allowed.size(); ++p) {
      const std::string pw = where + ".allowed[" + std::to_string(p) + "]";
      if (!allowed[p].is_array() || allowed[p].size() != 2) throw InvalidInput(pw + ": expected a pair [a, b]");
      edge.allowed.push_back({detail::require_int(allowed[p][0], pw + "[0]"),
                              detail::require_int(allowed[p][1], pw + "[1]")});
    }
    inst.edges.push_back(std::move(edge));
  }
  const auto violations = validate(inst);
  if (!violations.empty()) {
    std::string msg = "invalid instance:";
    for (const auto& v : violations) msg += "\n  " + v.code + (v.detail.empty() ? "" : ": " + v.detail);
    throw InvalidInput(msg);
  }
  return inst;
}

inline CspInstance parse_instance(const std::string& text, const std::string& source = "instance") {
  return instance_from_json(parse_json_text(text, source));
}

inline std::string emit_instance(const CspInstance& inst) { return canonical_json(instance_to_json(inst)); }

// ---- MAX-CUT graph text ---------------------------------------------------
// First line "n m", then m lines "u v", 0-indexed.

inline Graph parse_graph(const std::string& text, const std::string& source = "graph") {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) -> void {
    throw InvalidInput(source + ": line " + std::to_string(lineno) + ": " + msg);
  };
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') fail("CR line endings are not accepted");
      if (line.find_first_not_of(" \t") != std::string::npos) return true;
    }
    return false;
  };
  auto two_ints = [&](long long& x, long long& y) {
    std::istringstream ls(line);
    std::string extra;
    if (!(ls >> x >> y)) fail("expected two integers");
    if (ls >> extra) fail("unexpected trailing text '" + extra + "'");
  };
  if (!next_line()) throw InvalidInput(source + ": empty file");
  long long n = 0, m = 0;
  two_ints(n, m);
  if (n < 1 || n > 1000000) fail("vertex count must lie in [1, 1000000]");
  if (m < 0 || m > n * (n - 1) / 2) fail("edge count " + std::to_string(m) + " impossible for n = " + std::to_string(n));
  Graph g;
  g.n = static_cast<int>(n);
  std::set<std::pair<int, int>> seen;
  for (long long e = 0; e < m; ++e) {
    if (!next_line()) throw InvalidInput(source + ": expected " + std::to_string(m) + " edges, found " + std::to_string(e));
    long long u = 0, v = 0;
    two_ints(u, v);
    if (u < 0 || u >= n || v < 0 || v >= n) fail("endpoint out of range");
    if (u == v) fail("self-loop");
    const std::pair<int, int> key{static_cast<int>(std::min(u, v)), static_cast<int>(std::max(u, v))};
    if (!seen.insert(key).second) fail("duplicate edge");
    g.edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
  }
  if (next_line()) fail("more edge lines than declared");
  return g;
}

inline std::string emit_graph(const Graph& g) {
  std::string out = std::to_string(g.n) + " " + std::to_string(g.m()) + "\n";
  for (auto [u, v] : g.edges) out += std::to_string(u) + " " + std::to_string(v) + "\n";
  return out;
}

// ---- matrices -------------------------------------------------------------
// {"matrix": [[...], ...]} or a bare array of rows.

inline SymMatrix matrix_from_json(const Json& j) {
  const Json& rows = j.is_object() ? detail::require_field(j, "matrix", "matrix file") : j;
  if (!rows.is_array() || rows.empty()) throw InvalidInput("matrix: expected a non-empty array of rows");
  const std::size_t n = rows.size();
  Matrix m(static_cast<Index>(n), static_cast<Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const std::string where = "matrix[" + std::to_string(i) + "]";
    if (!rows[i].is_array() || rows[i].size() != n) {
      throw InvalidInput(where + ": expected a row of length " + std::to_string(n));
    }
    for (std::size_t k = 0; k < n; ++k) {
      if (!rows[i][k].is_number()) throw InvalidInput(where + "[" + std::to_string(k) + "]: expected a number");
      m(static_cast<Index>(i), static_cast<Index>(k)) = rows[i][k].get<double>();
    }
  }
  return SymMatrix(std::move(m));
}

inline SymMatrix parse_matrix(const std::string& text, const std::string& source = "matrix") {
  return matrix_from_json(parse_json_text(text, source));
}

inline Json matrix_to_json(const SymMatrix& a) {
  Json rows = Json::array();
  for (Index i = 0; i < a.dim(); ++i) {
    Json row = Json::array();
    for (Index k = 0; k < a.dim(); ++k) row.push_back(a(i, k));
    rows.push_back(row);
  }
  return {{"matrix", rows}};
}

// ---- reports --------------------------------------------------------------

namespace detail {

inline Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

}  // namespace detail

inline Json report_to_json(const SolveReport& r) {
  Json points = Json::array();
  for (const auto& p : r.points) {
    const bool solved = p.status == SdpStatus::Solved;
    Json jp = {{"index", p.index},
               {"coords", detail::vector_json(p.coords)},
               {"status", to_string(p.status)},
               {"iterations", p.iterations},
               {"sdp_value", solved ? Json(p.sdp_value) : Json(nullptr)},
               {"sdp_objective", solved ? Json(p.sdp_objective) : Json(nullptr)},
               {"ball_value", solved ? Json(p.ball_value) : Json(nullptr)},
               {"expected_value", solved ? Json(p.expected_value) : Json(nullptr)},
               {"best_rounded", detail::optional_number(p.best_rounded)}};
    if (!p.note.empty()) jp["note"] = p.note;
    points.push_back(std::move(jp));
  }
  Json best = {{"objective", r.best},
               {"assignment", r.best_assignment},
               {"net_index", r.best_index ? Json(*r.best_index) : Json(nullptr)}};
  if (r.problem == "quadratic") best["signs"] = to_signs(r.best_assignment);
  Json j = {
      {"problem", r.problem},
      {"name", r.name ? Json(*r.name) : Json(nullptr)},
      {"n", r.n},
      {"q", r.q},
      {"m", r.m},
      {"eps", r.eps},
      {"eps_algorithm", r.eps_alg},
      {"seed", r.seed},
      {"samples", r.samples},
      {"k", r.k},
      {"spectrum",
       {{"mode", r.eigen_mode},
        {"fallback_to_exact", r.eigen_fallback},
        {"retained", r.retained},
        {"max", detail::optional_number(r.lambda_max)},
        {"min", detail::optional_number(r.lambda_min)}}},
      {"net",
       {{"size", r.net_size},
        {"size_bound", r.net_bound},
        {"radius", r.net_radius},
        {"mesh", r.net_mesh},
        {"spacing", r.net_spacing},
        {"half_width", r.net_half_width}}},
      {"sdp",
       {{"solved", r.solved},
        {"infeasible", r.infeasible},
        {"unresolved", r.unresolved},
        {"trace_d", r.trace_d},
        {"scale", r.scale}}},
      {"points", points},
      {"best", best},
      {"fallback", r.fallback},
      {"opt", detail::optional_number(r.opt)},
      {"gap", detail::optional_number(r.gap)},
  };
  if (r.problem == "quadratic") j["input_scale"] = r.input_scale;
  if (!r.timings.empty()) {
    Json t = Json::object();
    for (const auto& [phase, seconds] : r.timings) t[phase] = seconds;
    j["timings"] = t;
  }
  return j;
}

inline std::string emit_report(const SolveReport& r) { return canonical_json(report_to_json(r)); }

/// Integral values print as integers, others with 10 significant digits.
inline std::string format_number(double v) {
  char buf[40];
  if (v == 0.0) v = 0.0;  // no "-0"
  if (std::isfinite(v) && v == std::round(v) && std::abs(v) < 1e15) {
    std::snprintf(buf, sizeof buf, "%.0f", v);
  } else {
    std::snprintf(buf, sizeof buf, "%.10g", v);
  }
  return buf;
}

/// best=<v> OPT=<v|n/a> gap=<v|n/a> |S|=<v> k=<v>
inline std::string summary_line(const SolveReport& r) {
  return "best=" + format_number(r.best) + " OPT=" + (r.opt ? format_number(*r.opt) : "n/a") +
         " gap=" + (r.gap ? format_number(*r.gap) : "n/a") + " |S|=" + std::to_string(r.net_size) +
         " k=" + std::to_string(r.k);
}

}  // namespace trcsp
