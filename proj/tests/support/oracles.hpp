#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. Everything here is deliberately naive: O(n^2) pair counting,
// definitional mid-ranks, exhaustive path enumeration.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "nasgraph.hpp"

namespace oracle {

// ---------------------------------------------------------------------------
// Rank statistics by definition

inline double kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
  long long concordant = 0, discordant = 0, tie_x_only = 0, tie_y_only = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0 && dy == 0) continue;
      if (dx == 0) {
        ++tie_x_only;
      } else if (dy == 0) {
        ++tie_y_only;
      } else if ((dx > 0) == (dy > 0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  const double denom = std::sqrt(static_cast<double>(concordant + discordant + tie_x_only) *
                                 static_cast<double>(concordant + discordant + tie_y_only));
  return static_cast<double>(concordant - discordant) / denom;
}

inline std::vector<double> definitional_ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double w : v) {
      if (w < v[i]) ++less;
      if (w == v[i]) ++equal;
    }
    r[i] = less + (equal + 1.0) / 2.0;
  }
  return r;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double sa = 0, sb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
  }
  const double ma = sa / n, mb = sb / n;
  double num = 0, da = 0, db = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - ma) * (b[i] - mb);
    da += (a[i] - ma) * (a[i] - ma);
    db += (b[i] - mb) * (b[i] - mb);
  }
  return num / std::sqrt(da * db);
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(definitional_ranks(x), definitional_ranks(y));
}

// Tie-free shortcut 1 - 6 sum d^2 / (n (n^2 - 1)).
inline double spearman_tie_free(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = definitional_ranks(x), ry = definitional_ranks(y);
  double d2 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  const double n = static_cast<double>(x.size());
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

// ---------------------------------------------------------------------------
// Path enumeration

using OpPath = std::vector<std::string>;

// Operator sequences along every path from feature node 0 to the last feature
// node of a single-input cell.
inline std::multiset<OpPath> edge_cell_paths(const nasgraph::EdgeOpCell& cell) {
  std::multiset<OpPath> out;
  OpPath cur;
  auto walk = [&](auto&& self, int node) -> void {
    if (node == cell.num_nodes - 1) {
      out.insert(cur);
      return;
    }
    for (const auto& [key, op] : cell.edge_ops) {
      if (key.first != node) continue;
      cur.push_back(op);
      self(self, key.second);
      cur.pop_back();
    }
  };
  walk(walk, 0);
  return out;
}

// Operator sequences (input and output excluded) along every input -> output
// path of a node-operator graph.
inline std::multiset<OpPath> node_graph_paths(const nasgraph::CellGraph& g) {
  std::multiset<OpPath> out;
  std::size_t in = 0, outn = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.node_ops[i] == "input") in = i;
    if (g.node_ops[i] == "output") outn = i;
  }
  OpPath cur;
  auto walk = [&](auto&& self, std::size_t node) -> void {
    if (node == outn) {
      out.insert(cur);
      return;
    }
    for (std::size_t v = 0; v < g.size(); ++v) {
      if (!g.has_edge(node, v)) continue;
      if (v != outn) cur.push_back(g.node_ops[v]);
      self(self, v);
      if (v != outn) cur.pop_back();
    }
  };
  walk(walk, in);
  return out;
}

// ---------------------------------------------------------------------------
// Random structures

inline nasgraph::EdgeOpCell random_cell(std::mt19937_64& rng, int num_nodes, const std::vector<std::string>& ops) {
  nasgraph::EdgeOpCell cell{num_nodes, 1, {}};
  std::uniform_int_distribution<std::size_t> pick(0, ops.size() - 1);
  for (int j = 1; j < num_nodes; ++j)
    for (int i = 0; i < j; ++i) cell.edge_ops[{i, j}] = ops[pick(rng)];
  return cell;
}

// A valid DAG: input first, output last, a chain through every node plus
// random forward edges.
inline nasgraph::CellGraph random_dag(std::mt19937_64& rng, std::size_t n, const std::vector<std::string>& ops,
                                      double density = 0.4) {
  std::vector<std::string> names{"input"};
  std::uniform_int_distribution<std::size_t> pick(0, ops.size() - 1);
  for (std::size_t i = 1; i + 1 < n; ++i) names.push_back(ops[pick(rng)]);
  names.emplace_back("output");
  nasgraph::CellGraph g(std::move(names));
  std::bernoulli_distribution coin(density);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    g.set_edge(i, i + 1);
    for (std::size_t j = i + 2; j < n; ++j)
      if (i != 0 || j != n - 1)
        if (coin(rng)) g.set_edge(i, j);
  }
  return g;
}

// Symmetric 0/1 matrix with zero diagonal.
inline Eigen::MatrixXd random_undirected(std::mt19937_64& rng, Eigen::Index n, double density = 0.4) {
  std::bernoulli_distribution coin(density);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (coin(rng)) a(i, j) = a(j, i) = 1.0;
  return a;
}

inline std::vector<std::size_t> random_permutation(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

// ---------------------------------------------------------------------------
// Synthetic ground truth on the 27-cell toy space
//
//   y = 0.1 + 0.3 #conv + 0.2 #skip + 0.05 #pool + 0.25 #(skip -> conv edges)
//
// Defined on node-operator graphs, so it scores supernets as well. On the toy
// space the unique argmax is skip on (0,1), conv on (0,2) and (1,2): 1.15.

struct ToyWeights {
  double bias = 0.1;
  double conv = 0.3;
  double skip = 0.2;
  double pool = 0.05;
  double interaction = 0.25;
};

inline double toy_truth(const nasgraph::CellGraph& g, const ToyWeights& w = {}) {
  double y = w.bias;
  for (const auto& op : g.node_ops) {
    if (op == "nor_conv_3x3") y += w.conv;
    if (op == "skip_connect") y += w.skip;
    if (op == "avg_pool_3x3") y += w.pool;
  }
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j)
      if (g.has_edge(i, j) && g.node_ops[i] == "skip_connect" && g.node_ops[j] == "nor_conv_3x3")
        y += w.interaction;
  return y;
}

inline double toy_truth(std::span<const nasgraph::CellGraph> graphs) {
  double s = 0;
  for (const auto& g : graphs) s += toy_truth(g);
  return s / static_cast<double>(graphs.size());
}

// Deceptive for greedy leave-one-out: in the full supernet pooling looks
// cheap to remove, but the all-pool single path is the global optimum.
//   y = (#pool / #op nodes) + 0.3 #conv
inline double deceptive_truth(std::span<const nasgraph::CellGraph> graphs) {
  double s = 0;
  for (const auto& g : graphs) {
    double ops = 0, pool = 0, conv = 0;
    for (const auto& op : g.node_ops) {
      if (op == "input" || op == "output") continue;
      ++ops;
      if (op == "avg_pool_3x3") ++pool;
      if (op == "nor_conv_3x3") ++conv;
    }
    s += (ops > 0 ? pool / ops : 0.0) + 0.3 * conv;
  }
  return s / static_cast<double>(graphs.size());
}

struct Enumerated {
  std::vector<nasgraph::ArchChoice> choices;
  std::vector<double> scores;
  std::size_t argmax = 0;
  double max = 0.0;
  bool unique = true;
};

inline Enumerated enumerate_scores(const nasgraph::SearchSpace& space, const nasgraph::Scorer& scorer) {
  Enumerated e;
  nasgraph::enumerate_choices(space, [&](const nasgraph::ArchChoice& c) {
    e.choices.push_back(c);
    e.scores.push_back(scorer.score(nasgraph::to_graphs(nasgraph::make_architecture(space, c))));
  });
  for (std::size_t i = 1; i < e.scores.size(); ++i)
    if (e.scores[i] > e.scores[e.argmax]) e.argmax = i;
  e.max = e.scores[e.argmax];
  for (std::size_t i = 0; i < e.scores.size(); ++i)
    if (i != e.argmax && e.scores[i] == e.max) e.unique = false;
  return e;
}

// ---------------------------------------------------------------------------
// Central finite differences over every parameter of a model.

template <class LossFn>
std::vector<double> finite_difference(nasgraph::GcnModel model, LossFn&& f, double h = 1e-4) {
  std::vector<double> theta = model.params.flatten();
  std::vector<double> grad(theta.size());
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double saved = theta[k];
    theta[k] = saved + h;
    model.params.assign(theta);
    const double up = f(model);
    theta[k] = saved - h;
    model.params.assign(theta);
    const double down = f(model);
    theta[k] = saved;
    grad[k] = (up - down) / (2 * h);
  }
  return grad;
}

inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
}

// ---------------------------------------------------------------------------
// The best NB201 CIFAR-10 cell. Four 3x3 convs, one 1x1 conv and a skip; the
// counters only see the operator multiset, so placement does not matter.

inline constexpr const char* kNb201BestCell =
    "|nor_conv_3x3~0|+|nor_conv_3x3~0|nor_conv_3x3~1|+|skip_connect~0|nor_conv_1x1~1|nor_conv_3x3~2|";

// The 27 toy cells as a JSONL dataset labelled with toy_truth.
inline std::string toy_dataset_jsonl() {
  const auto space = nasgraph::toy_space();
  std::string out;
  int i = 0;
  nasgraph::enumerate_choices(space, [&](const nasgraph::ArchChoice& c) {
    const auto arch = nasgraph::make_architecture(space, c);
    const auto graphs = nasgraph::to_graphs(arch);
    nlohmann::json j = {{"id", "toy" + std::to_string(i++)},
                        {"cells", {nasgraph::format_arch_string(arch.front())}},
                        {"label", toy_truth(graphs)}};
    out += j.dump() + "\n";
  });
  return out;
}

}  // namespace oracle
