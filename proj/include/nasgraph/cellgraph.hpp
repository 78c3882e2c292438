#pragma once

// Cell representations.
//
// Two encodings coexist in cell-based search spaces:
//   * EdgeOpCell: feature nodes joined by edges that carry operators
//     (the NAS-Bench-201 / DARTS convention).
//   * CellGraph: operators are nodes, edges are data flow
//     (the NAS-Bench-101 convention, and the form the predictor consumes).
// edge_to_node_transform() maps the former onto the latter.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "nasgraph/error.hpp"

namespace nasgraph {

inline constexpr std::string_view kInputName = "input";
inline constexpr std::string_view kOutputName = "output";

/// Name of the i-th reserved input node for a cell with `num_inputs` inputs.
/// Single-input cells use "input"; two-input (DARTS-style) cells use
/// "input0" / "input1".
inline std::string input_node_name(int index, int num_inputs) {
  if (num_inputs == 1) return std::string(kInputName);
  return std::string(kInputName) + std::to_string(index);
}

inline bool is_input_name(std::string_view name) {
  return name == "input" || name == "input0" || name == "input1";
}

inline bool is_reserved_name(std::string_view name) {
  return is_input_name(name) || name == kOutputName;
}

using EdgeKey = std::pair<int, int>;  // (source feature node, destination feature node)

/// Cell with operators on edges between feature nodes. Nodes [0, num_inputs)
/// are cell inputs; the remaining nodes are intermediate features.
struct EdgeOpCell {
  int num_nodes = 0;
  int num_inputs = 1;
  std::map<EdgeKey, std::string> edge_ops;  // ordered lexicographically by (src, dst)

  bool operator==(const EdgeOpCell&) const = default;
};

/// Cell with operators on nodes. adjacency is row-major N*N, entry (i, j) set
/// means data flows from node i to node j.
struct CellGraph {
  std::vector<std::string> node_ops;
  std::vector<std::uint8_t> adjacency;

  CellGraph() = default;
  explicit CellGraph(std::vector<std::string> ops)
      : node_ops(std::move(ops)), adjacency(node_ops.size() * node_ops.size(), 0) {}

  std::size_t size() const noexcept { return node_ops.size(); }
  bool has_edge(std::size_t from, std::size_t to) const { return adjacency[from * size() + to] != 0; }
  void set_edge(std::size_t from, std::size_t to, bool on = true) {
    adjacency[from * size() + to] = on ? 1 : 0;
  }
  std::size_t edge_count() const {
    return static_cast<std::size_t>(std::count(adjacency.begin(), adjacency.end(), std::uint8_t{1}));
  }

  bool operator==(const CellGraph&) const = default;
};

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  std::string kind;  // e.g. "cycle", "unreachable-output"
  std::string detail;
};

/// Checks every CellGraph invariant and reports the first one violated.
/// Order of checks: shape, self-loop, cycle, reserved nodes, reachability.
inline std::optional<Violation> validate_dag(const CellGraph& g) {
  const std::size_t n = g.size();
  if (n == 0) return Violation{"shape", "graph has no nodes"};
  if (g.adjacency.size() != n * n) {
    return Violation{"shape", "adjacency has " + std::to_string(g.adjacency.size()) +
                                  " entries, expected " + std::to_string(n * n)};
  }
  for (std::size_t i = 0; i < n * n; ++i) {
    if (g.adjacency[i] > 1) return Violation{"shape", "adjacency entries must be 0 or 1"};
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (g.has_edge(i, i)) return Violation{"self-loop", "node " + std::to_string(i)};
  }

  std::vector<int> indeg(n, 0), outdeg(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (g.has_edge(i, j)) {
        ++outdeg[i];
        ++indeg[j];
      }

  // Kahn's algorithm; leftover nodes sit on a cycle.
  {
    std::vector<int> deg = indeg;
    std::vector<std::size_t> queue;
    for (std::size_t i = 0; i < n; ++i)
      if (deg[i] == 0) queue.push_back(i);
    std::size_t seen = 0;
    while (seen < queue.size()) {
      const std::size_t u = queue[seen++];
      for (std::size_t v = 0; v < n; ++v)
        if (g.has_edge(u, v) && --deg[v] == 0) queue.push_back(v);
    }
    if (seen != n) return Violation{"cycle", std::to_string(n - seen) + " node(s) on a cycle"};
  }

  std::vector<std::size_t> inputs;
  std::vector<std::size_t> outputs;
  int plain_inputs = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& name = g.node_ops[i];
    if (is_input_name(name)) {
      inputs.push_back(i);
      if (name == kInputName) ++plain_inputs;
    }
    if (name == kOutputName) outputs.push_back(i);
  }
  const bool single = plain_inputs == 1 && inputs.size() == 1;
  const bool dual = plain_inputs == 0 && inputs.size() == 2 && g.node_ops[inputs[0]] != g.node_ops[inputs[1]];
  if (!single && !dual) {
    return Violation{"input-count", "expected exactly one \"input\" node (or one each of input0/input1), found " +
                                        std::to_string(inputs.size())};
  }
  if (outputs.size() != 1) {
    return Violation{"output-count", "expected exactly one \"output\" node, found " + std::to_string(outputs.size())};
  }
  for (auto i : inputs)
    if (indeg[i] != 0) return Violation{"input-in-degree", g.node_ops[i] + " has incoming edges"};
  if (outdeg[outputs[0]] != 0) return Violation{"output-out-degree", "output has outgoing edges"};

  auto reach = [&](std::vector<std::size_t> start, bool forward) {
    std::vector<char> mark(n, 0);
    for (auto s : start) mark[s] = 1;
    while (!start.empty()) {
      const std::size_t u = start.back();
      start.pop_back();
      for (std::size_t v = 0; v < n; ++v) {
        const bool e = forward ? g.has_edge(u, v) : g.has_edge(v, u);
        if (e && !mark[v]) {
          mark[v] = 1;
          start.push_back(v);
        }
      }
    }
    return mark;
  };
  const auto from_input = reach(inputs, true);
  for (std::size_t i = 0; i < n; ++i)
    if (!from_input[i])
      return Violation{"unreachable-input", "node " + std::to_string(i) + " (" + g.node_ops[i] + ")"};
  const auto to_output = reach({outputs[0]}, false);
  for (std::size_t i = 0; i < n; ++i)
    if (!to_output[i])
      return Violation{"unreachable-output", "node " + std::to_string(i) + " (" + g.node_ops[i] + ")"};
  return std::nullopt;
}

/// Throws ValidationError naming the first violated invariant.
inline void require_valid(const CellGraph& g) {
  if (auto v = validate_dag(g)) throw ValidationError(v->kind + ": " + v->detail);
}

/// Structural checks on an edge-operator cell; returns a description of the
/// first problem found.
inline std::optional<std::string> check_cell(const EdgeOpCell& cell) {
  if (cell.num_inputs != 1 && cell.num_inputs != 2) return "num_inputs must be 1 or 2";
  if (cell.num_nodes < cell.num_inputs + 1) return "cell needs at least one non-input node";
  std::vector<int> in(cell.num_nodes, 0), out(cell.num_nodes, 0);
  for (const auto& [key, op] : cell.edge_ops) {
    const auto [src, dst] = key;
    if (src < 0 || dst >= cell.num_nodes || src >= dst)
      return "edge (" + std::to_string(src) + "," + std::to_string(dst) + ") is not forward";
    if (dst < cell.num_inputs) return "edge into input node " + std::to_string(dst);
    if (op.empty()) return "empty operator name";
    if (is_reserved_name(op)) return "reserved name '" + op + "' used as operator";
    ++out[src];
    ++in[dst];
  }
  for (int j = cell.num_inputs; j < cell.num_nodes; ++j)
    if (in[j] == 0) return "node " + std::to_string(j) + " has no incoming edge";
  if (cell.num_inputs == 1) {
    for (int j = 0; j + 1 < cell.num_nodes; ++j)
      if (out[j] == 0) return "node " + std::to_string(j) + " has no outgoing edge";
  } else {
    for (int j = 0; j < cell.num_inputs; ++j)
      if (out[j] == 0) return "input node " + std::to_string(j) + " is unused";
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Arch strings: "|op~0|+|op~0|op~1|+|op~0|op~1|op~2|"

inline std::string format_arch_string(const EdgeOpCell& cell) {
  std::string out;
  for (int dst = cell.num_inputs; dst < cell.num_nodes; ++dst) {
    if (dst > cell.num_inputs) out += '+';
    out += '|';
    for (const auto& [key, op] : cell.edge_ops) {
      if (key.second != dst) continue;
      out += op;
      out += '~';
      out += std::to_string(key.first);
      out += '|';
    }
  }
  return out;
}

/// Parses an arch string. When `vocabulary` is given, operator names outside
/// it raise UnknownOperatorError.
inline EdgeOpCell parse_arch_string(std::string_view s,
                                    const std::vector<std::string>* vocabulary = nullptr,
                                    int num_inputs = 1) {
  if (num_inputs != 1 && num_inputs != 2) throw ValidationError("num_inputs must be 1 or 2");
  auto fail = [&](const std::string& why) -> ParseError {
    return ParseError("malformed arch string '" + std::string(s) + "': " + why);
  };
  if (s.empty()) throw fail("empty");

  EdgeOpCell cell;
  cell.num_inputs = num_inputs;
  int dst = num_inputs;
  std::size_t pos = 0;
  while (true) {
    const std::size_t end = s.find('+', pos);
    const std::string_view group = s.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    if (group.size() < 2 || group.front() != '|' || group.back() != '|')
      throw fail("group " + std::to_string(dst - num_inputs) + " must be delimited by '|'");
    std::string_view body = group.substr(1, group.size() - 2);
    if (body.empty()) throw fail("group " + std::to_string(dst - num_inputs) + " has no edges");
    int last_src = -1;
    std::size_t p = 0;
    while (p <= body.size()) {
      const std::size_t bar = body.find('|', p);
      const std::string_view token = body.substr(p, bar == std::string_view::npos ? std::string_view::npos : bar - p);
      const std::size_t tilde = token.rfind('~');
      if (tilde == std::string_view::npos || tilde == 0 || tilde + 1 == token.size())
        throw fail("edge token '" + std::string(token) + "' is not op~src");
      const std::string op(token.substr(0, tilde));
      const std::string_view src_text = token.substr(tilde + 1);
      if (!std::all_of(src_text.begin(), src_text.end(), [](char c) { return c >= '0' && c <= '9'; }))
        throw fail("source index '" + std::string(src_text) + "' is not a number");
      if (src_text.size() > 6) throw fail("source index too large");
      const int src = std::stoi(std::string(src_text));
      if (src >= dst) throw fail("edge " + std::to_string(src) + "->" + std::to_string(dst) + " is not forward");
      if (src <= last_src) throw fail("sources must be strictly ascending within a group");
      if (op.find_first_of("|+~ \t") != std::string::npos) throw fail("bad operator name '" + op + "'");
      if (vocabulary && std::find(vocabulary->begin(), vocabulary->end(), op) == vocabulary->end())
        throw UnknownOperatorError(op);
      cell.edge_ops.emplace(EdgeKey{src, dst}, op);
      last_src = src;
      if (bar == std::string_view::npos) break;
      p = bar + 1;
    }
    ++dst;
    if (end == std::string_view::npos) break;
    pos = end + 1;
  }
  cell.num_nodes = dst;
  if (auto problem = check_cell(cell)) throw fail(*problem);
  return cell;
}

// ---------------------------------------------------------------------------
// Edge-operator to node-operator transform

/// One operator instance sitting on edge (src, dst). Several instances may
/// share an edge (parallel operators of a supernet).
struct EdgeOperator {
  int src;
  int dst;
  std::string op;
};

/// Builds the node-operator graph for a set of edge operators. Op node order
/// follows `ops`; callers pass them sorted by (src, dst), which is a
/// topological order.
inline CellGraph build_node_graph(int num_nodes, int num_inputs, std::span<const EdgeOperator> ops) {
  std::vector<std::string> names;
  names.reserve(ops.size() + num_inputs + 1);
  for (int i = 0; i < num_inputs; ++i) names.push_back(input_node_name(i, num_inputs));
  for (const auto& e : ops) names.push_back(e.op);
  names.emplace_back(kOutputName);
  CellGraph g(std::move(names));

  const std::size_t base = static_cast<std::size_t>(num_inputs);
  const std::size_t out = g.size() - 1;
  const int last = num_nodes - 1;
  for (std::size_t a = 0; a < ops.size(); ++a) {
    const auto& e = ops[a];
    if (e.src < num_inputs) g.set_edge(static_cast<std::size_t>(e.src), base + a);
    for (std::size_t b = 0; b < ops.size(); ++b)
      if (ops[b].src == e.dst) g.set_edge(base + a, base + b);
    // Single-input cells emit the last feature node; two-input cells
    // concatenate every intermediate node.
    if (e.dst == last || num_inputs == 2) g.set_edge(base + a, out);
  }
  return g;
}

inline CellGraph edge_to_node_transform(const EdgeOpCell& cell) {
  if (auto problem = check_cell(cell)) throw ValidationError("invalid cell: " + *problem);
  std::vector<EdgeOperator> ops;
  ops.reserve(cell.edge_ops.size());
  for (const auto& [key, op] : cell.edge_ops) ops.push_back({key.first, key.second, op});
  return build_node_graph(cell.num_nodes, cell.num_inputs, ops);
}

/// Relabels nodes: node i of `g` becomes node perm[i] of the result.
inline CellGraph permuted(const CellGraph& g, std::span<const std::size_t> perm) {
  if (perm.size() != g.size()) throw ValidationError("permutation size mismatch");
  CellGraph out(std::vector<std::string>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) out.node_ops[perm[i]] = g.node_ops[i];
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j)
      if (g.has_edge(i, j)) out.set_edge(perm[i], perm[j]);
  return out;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const CellGraph& g) {
  nlohmann::json adj = nlohmann::json::array();
  for (std::size_t i = 0; i < g.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < g.size(); ++j) row.push_back(g.has_edge(i, j) ? 1 : 0);
    adj.push_back(std::move(row));
  }
  return {{"node_ops", g.node_ops}, {"adjacency", std::move(adj)}};
}

/// Reads the explicit {node_ops, adjacency} form. Shape problems throw;
/// DAG invariants are left to validate_dag().
inline CellGraph cell_graph_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("node_ops") || !j.contains("adjacency"))
    throw ParseError("explicit graph needs node_ops and adjacency");
  const auto& ops = j.at("node_ops");
  const auto& adj = j.at("adjacency");
  if (!ops.is_array() || !adj.is_array()) throw ParseError("node_ops and adjacency must be arrays");
  std::vector<std::string> names;
  for (const auto& o : ops) {
    if (!o.is_string()) throw ParseError("node_ops entries must be strings");
    names.push_back(o.get<std::string>());
  }
  CellGraph g(std::move(names));
  if (adj.size() != g.size()) throw ParseError("adjacency row count does not match node_ops");
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto& row = adj[i];
    if (!row.is_array() || row.size() != g.size()) throw ParseError("adjacency must be square");
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (!row[k].is_number_integer() && !row[k].is_boolean()) throw ParseError("adjacency entries must be 0/1");
      const int v = row[k].is_boolean() ? static_cast<int>(row[k].get<bool>()) : row[k].get<int>();
      if (v != 0 && v != 1) throw ParseError("adjacency entries must be 0/1");
      g.set_edge(i, k, v == 1);
    }
  }
  return g;
}

}  // namespace nasgraph
