#pragma once

// Architecture search over cell-based spaces with a scoring oracle:
//   * prune_search: start from the supernet that keeps every operator on
//     every edge; each step drops, on every multi-operator edge, the operator
//     whose removal costs the least score. Cost is linear in |O| * E.
//   * evo_search: rand/1/bin differential evolution on a continuous encoding,
//     one gene per edge, genes binned evenly onto the operator list.
//   * hybrid_search: runs both, keeps the better result.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "nasgraph/cellgraph.hpp"
#include "nasgraph/embeddings.hpp"
#include "nasgraph/error.hpp"
#include "nasgraph/gcn.hpp"
#include "nasgraph/parallel.hpp"

namespace nasgraph {

// ---------------------------------------------------------------------------
// Spaces

struct CellSpace {
  std::string name = "cell";
  int num_nodes = 4;
  int num_inputs = 1;
  std::vector<EdgeKey> edges;     // sorted (src, dst)
  std::vector<std::string> ops;   // the operator set O, in index order
};

/// Every forward edge that does not end in an input node.
inline std::vector<EdgeKey> complete_edges(int num_nodes, int num_inputs) {
  std::vector<EdgeKey> edges;
  for (int i = 0; i < num_nodes; ++i)
    for (int j = std::max(i + 1, num_inputs); j < num_nodes; ++j) edges.emplace_back(i, j);
  return edges;
}

struct SearchSpace {
  std::string name;
  std::string macro;  // MacroConfig preset used for FLOPs/params reporting
  std::vector<CellSpace> cell_types;

  std::size_t total_edges() const {
    std::size_t n = 0;
    for (const auto& c : cell_types) n += c.edges.size();
    return n;
  }

  void validate() const {
    if (cell_types.empty()) throw ValidationError("search space has no cell types");
    for (const auto& c : cell_types) {
      if (c.ops.empty()) throw ValidationError("cell type '" + c.name + "' has no operators");
      if (c.edges.empty()) throw ValidationError("cell type '" + c.name + "' has no edges");
      for (std::size_t i = 0; i < c.ops.size(); ++i)
        for (std::size_t k = i + 1; k < c.ops.size(); ++k)
          if (c.ops[i] == c.ops[k]) throw ValidationError("duplicate operator '" + c.ops[i] + "'");
      EdgeOpCell probe{c.num_nodes, c.num_inputs, {}};
      for (const auto& e : c.edges) probe.edge_ops[e] = c.ops.front();
      if (probe.edge_ops.size() != c.edges.size()) throw ValidationError("duplicate edge in '" + c.name + "'");
      if (auto problem = check_cell(probe)) throw ValidationError("cell type '" + c.name + "': " + *problem);
    }
  }

  /// Operator names must resolve in the table.
  void validate(const OperatorEmbeddingTable& table) const {
    validate();
    for (const auto& c : cell_types) {
      for (const auto& op : c.ops) table.embed(op);
      for (int i = 0; i < c.num_inputs; ++i) table.embed(input_node_name(i, c.num_inputs));
    }
    table.embed(std::string(kOutputName));
  }

  /// Every operator and reserved node name that can appear in a graph.
  std::vector<std::string> vocabulary() const {
    std::set<std::string> names{std::string(kOutputName)};
    for (const auto& c : cell_types) {
      names.insert(c.ops.begin(), c.ops.end());
      for (int i = 0; i < c.num_inputs; ++i) names.insert(input_node_name(i, c.num_inputs));
    }
    return {names.begin(), names.end()};
  }
};

inline const std::vector<std::string>& nb201_operators() {
  static const std::vector<std::string> ops{"none", "skip_connect", "nor_conv_1x1", "nor_conv_3x3", "avg_pool_3x3"};
  return ops;
}

inline SearchSpace nb201_space() {
  CellSpace c{"cell", 4, 1, complete_edges(4, 1), nb201_operators()};
  return {"nb201", "nb201", {c}};
}

/// Three edges, three operators: 27 cells, small enough to enumerate.
inline SearchSpace toy_space() {
  CellSpace c{"cell", 3, 1, complete_edges(3, 1), {"nor_conv_3x3", "skip_connect", "avg_pool_3x3"}};
  return {"toy27", "nb201", {c}};
}

inline SearchSpace darts_space() {
  const std::vector<std::string> ops{"none",         "max_pool_3x3", "avg_pool_3x3", "skip_connect",
                                     "sep_conv_3x3", "sep_conv_5x5", "dil_conv_3x3", "dil_conv_5x5"};
  CellSpace normal{"normal", 6, 2, complete_edges(6, 2), ops};
  CellSpace reduce{"reduce", 6, 2, complete_edges(6, 2), ops};
  return {"darts", "", {normal, reduce}};
}

inline nlohmann::json to_json(const SearchSpace& s) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : s.cell_types) {
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [a, b] : c.edges) edges.push_back({a, b});
    cells.push_back(
        {{"name", c.name}, {"num_nodes", c.num_nodes}, {"num_inputs", c.num_inputs}, {"ops", c.ops}, {"edges", edges}});
  }
  return {{"name", s.name}, {"macro", s.macro}, {"cell_types", cells}};
}

inline SearchSpace space_from_json(const nlohmann::json& j) {
  try {
    SearchSpace s;
    s.name = j.value("name", std::string{"custom"});
    s.macro = j.value("macro", std::string{});
    for (const auto& c : j.at("cell_types")) {
      CellSpace cs;
      cs.name = c.value("name", std::string{"cell"});
      cs.num_nodes = c.at("num_nodes").get<int>();
      cs.num_inputs = c.value("num_inputs", 1);
      cs.ops = c.at("ops").get<std::vector<std::string>>();
      if (c.contains("edges")) {
        for (const auto& e : c.at("edges")) cs.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
        std::sort(cs.edges.begin(), cs.edges.end());
      } else {
        cs.edges = complete_edges(cs.num_nodes, cs.num_inputs);
      }
      s.cell_types.push_back(std::move(cs));
    }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad search space descriptor: ") + e.what());
  }
}

/// Preset name ("nb201", "toy27", "darts") or a descriptor JSON file.
inline SearchSpace load_space(const std::string& name_or_path) {
  if (name_or_path == "nb201") return nb201_space();
  if (name_or_path == "toy27") return toy_space();
  if (name_or_path == "darts") return darts_space();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(detail::read_file(name_or_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("search space '" + name_or_path + "' is not valid JSON: " + e.what());
  }
  return space_from_json(j);
}

// ---------------------------------------------------------------------------
// Architectures

/// One EdgeOpCell per cell type, in the space's declared order.
using Architecture = std::vector<EdgeOpCell>;

/// Operator index per edge per cell type.
using ArchChoice = std::vector<std::vector<int>>;

inline Architecture make_architecture(const SearchSpace& space, const ArchChoice& choice) {
  if (choice.size() != space.cell_types.size()) throw ValidationError("choice does not match cell types");
  Architecture arch;
  for (std::size_t c = 0; c < space.cell_types.size(); ++c) {
    const auto& ct = space.cell_types[c];
    if (choice[c].size() != ct.edges.size()) throw ValidationError("choice does not match edge count");
    EdgeOpCell cell{ct.num_nodes, ct.num_inputs, {}};
    for (std::size_t e = 0; e < ct.edges.size(); ++e) {
      const int k = choice[c][e];
      if (k < 0 || k >= static_cast<int>(ct.ops.size())) throw ValidationError("operator index out of range");
      cell.edge_ops[ct.edges[e]] = ct.ops[static_cast<std::size_t>(k)];
    }
    arch.push_back(std::move(cell));
  }
  return arch;
}

inline std::vector<CellGraph> to_graphs(const Architecture& arch) {
  std::vector<CellGraph> out;
  out.reserve(arch.size());
  for (const auto& c : arch) out.push_back(edge_to_node_transform(c));
  return out;
}

inline nlohmann::json arch_to_json(const Architecture& arch) {
  if (arch.size() == 1) return format_arch_string(arch.front());
  nlohmann::json a = nlohmann::json::array();
  for (const auto& c : arch) a.push_back(format_arch_string(c));
  return a;
}

/// Calls fn(choice) for every architecture in the space, in lexicographic
/// order of operator indices.
template <class Fn>
void enumerate_choices(const SearchSpace& space, Fn&& fn) {
  ArchChoice choice;
  for (const auto& ct : space.cell_types) choice.emplace_back(ct.edges.size(), 0);
  while (true) {
    fn(std::as_const(choice));
    std::size_t c = space.cell_types.size();
    bool carried = true;
    while (carried && c-- > 0) {
      std::size_t e = choice[c].size();
      while (carried && e-- > 0) {
        if (++choice[c][e] < static_cast<int>(space.cell_types[c].ops.size())) {
          carried = false;
        } else {
          choice[c][e] = 0;
        }
      }
    }
    if (carried) return;
  }
}

inline ArchChoice random_choice(const SearchSpace& space, std::mt19937_64& rng) {
  ArchChoice choice;
  for (const auto& ct : space.cell_types) {
    std::vector<int> edges(ct.edges.size());
    for (auto& k : edges) k = static_cast<int>(detail::uniform_index(rng, ct.ops.size()));
    choice.push_back(std::move(edges));
  }
  return choice;
}

// ---------------------------------------------------------------------------
// Scoring oracle

/// Fitness of an architecture given as one graph per cell type. Must be safe
/// to call concurrently.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual double score(std::span<const CellGraph> graphs) const = 0;
};

class GcnScorer final : public Scorer {
 public:
  GcnScorer(const GcnModel& model, const OperatorEmbeddingTable& table) : model_(model), table_(table) {
    check_table(model, table);
  }
  // The scorer keeps references; refuse temporaries that would dangle.
  GcnScorer(GcnModel&&, const OperatorEmbeddingTable&) = delete;
  GcnScorer(const GcnModel&, OperatorEmbeddingTable&&) = delete;
  GcnScorer(GcnModel&&, OperatorEmbeddingTable&&) = delete;
  double score(std::span<const CellGraph> graphs) const override { return forward(model_, graphs, table_); }

 private:
  const GcnModel& model_;
  const OperatorEmbeddingTable& table_;
};

class FunctionScorer final : public Scorer {
 public:
  explicit FunctionScorer(std::function<double(std::span<const CellGraph>)> fn) : fn_(std::move(fn)) {}
  double score(std::span<const CellGraph> graphs) const override { return fn_(graphs); }

 private:
  std::function<double(std::span<const CellGraph>)> fn_;
};

/// Wraps a scorer and counts calls.
class CountingScorer final : public Scorer {
 public:
  explicit CountingScorer(const Scorer& inner) : inner_(inner) {}
  double score(std::span<const CellGraph> graphs) const override {
    ++count_;
    return inner_.score(graphs);
  }
  std::size_t count() const noexcept { return count_.load(); }

 private:
  const Scorer& inner_;
  mutable std::atomic<std::size_t> count_{0};
};

// ---------------------------------------------------------------------------
// Supernet pruning

/// Retained operator indices (ascending) per edge per cell type.
struct Supernet {
  std::vector<std::vector<std::vector<int>>> retained;

  static Supernet full(const SearchSpace& space) {
    Supernet net;
    for (const auto& ct : space.cell_types) {
      std::vector<int> all(ct.ops.size());
      std::iota(all.begin(), all.end(), 0);
      net.retained.emplace_back(ct.edges.size(), all);
    }
    return net;
  }

  static Supernet single_path(const ArchChoice& choice) {
    Supernet net;
    for (const auto& cell : choice) {
      std::vector<std::vector<int>> edges;
      for (int k : cell) edges.push_back({k});
      net.retained.push_back(std::move(edges));
    }
    return net;
  }

  bool is_single_path() const {
    for (const auto& cell : retained)
      for (const auto& e : cell)
        if (e.size() != 1) return false;
    return true;
  }

  std::size_t op_count() const {
    std::size_t n = 0;
    for (const auto& cell : retained)
      for (const auto& e : cell) n += e.size();
    return n;
  }

  /// Valid single-path nets map to an operator choice.
  ArchChoice choice() const {
    if (!is_single_path()) throw ValidationError("supernet is not a single path");
    ArchChoice out;
    for (const auto& cell : retained) {
      std::vector<int> c;
      for (const auto& e : cell) c.push_back(e.front());
      out.push_back(std::move(c));
    }
    return out;
  }

  void validate(const SearchSpace& space) const {
    if (retained.size() != space.cell_types.size()) throw ValidationError("supernet does not match cell types");
    for (std::size_t c = 0; c < retained.size(); ++c) {
      if (retained[c].size() != space.cell_types[c].edges.size())
        throw ValidationError("supernet does not match edge count");
      for (const auto& e : retained[c]) {
        if (e.empty()) throw ValidationError("supernet edge retains no operator");
        for (std::size_t k = 0; k < e.size(); ++k) {
          if (e[k] < 0 || e[k] >= static_cast<int>(space.cell_types[c].ops.size()))
            throw ValidationError("supernet operator index out of range");
          if (k > 0 && e[k] <= e[k - 1]) throw ValidationError("supernet operators must be ascending");
        }
      }
    }
  }

  bool operator==(const Supernet&) const = default;
};

namespace detail {

// Graphs of a supernet, optionally with one operator instance left out.
// Leaving out the last operator of an edge is allowed here: the edge then
// contributes no nodes.
struct Removal {
  std::size_t cell;
  std::size_t edge;
  int op;
};

inline std::vector<CellGraph> supernet_graphs(const SearchSpace& space, const Supernet& net,
                                              std::optional<Removal> removed = std::nullopt) {
  std::vector<CellGraph> out;
  for (std::size_t c = 0; c < space.cell_types.size(); ++c) {
    const auto& ct = space.cell_types[c];
    std::vector<EdgeOperator> ops;
    for (std::size_t e = 0; e < ct.edges.size(); ++e)
      for (int k : net.retained[c][e]) {
        if (removed && removed->cell == c && removed->edge == e && removed->op == k) continue;
        ops.push_back({ct.edges[e].first, ct.edges[e].second, ct.ops[static_cast<std::size_t>(k)]});
      }
    out.push_back(build_node_graph(ct.num_nodes, ct.num_inputs, ops));
  }
  return out;
}

}  // namespace detail

/// Parallel operators on one edge become parallel nodes between the same
/// endpoints. Node count per cell = retained operators + inputs + output.
inline std::vector<CellGraph> supernet_to_graphs(const SearchSpace& space, const Supernet& net) {
  net.validate(space);
  return detail::supernet_graphs(space, net);
}

struct PruneStep {
  double full_score = 0.0;
  /// delta[c][e][k]: score lost by removing the k-th retained op of edge e.
  std::vector<std::vector<std::vector<double>>> delta;
  Supernet before;
  struct Decision {
    std::size_t cell;
    std::size_t edge;
    int op;
  };
  std::vector<Decision> pruned;
  std::size_t inferences = 0;
};

/// One pruning iteration: score the supernet once, then every retained
/// operator's leave-one-out variant; drop the argmin on each multi-op edge.
inline std::pair<Supernet, PruneStep> prune_step(const SearchSpace& space, const Supernet& net, const Scorer& scorer,
                                                 unsigned threads = 1) {
  net.validate(space);
  PruneStep step;
  step.before = net;

  std::vector<detail::Removal> jobs;
  for (std::size_t c = 0; c < net.retained.size(); ++c)
    for (std::size_t e = 0; e < net.retained[c].size(); ++e)
      for (int k : net.retained[c][e]) jobs.push_back({c, e, k});

  step.full_score = scorer.score(detail::supernet_graphs(space, net));
  std::vector<double> without(jobs.size());
  parallel_for(jobs.size(), threads,
               [&](std::size_t i) { without[i] = scorer.score(detail::supernet_graphs(space, net, jobs[i])); });
  step.inferences = 1 + jobs.size();

  step.delta.resize(net.retained.size());
  std::size_t j = 0;
  for (std::size_t c = 0; c < net.retained.size(); ++c) {
    step.delta[c].resize(net.retained[c].size());
    for (std::size_t e = 0; e < net.retained[c].size(); ++e)
      for (std::size_t k = 0; k < net.retained[c][e].size(); ++k)
        step.delta[c][e].push_back(step.full_score - without[j++]);
  }

  Supernet next = net;
  for (std::size_t c = 0; c < net.retained.size(); ++c)
    for (std::size_t e = 0; e < net.retained[c].size(); ++e) {
      const auto& ops = net.retained[c][e];
      if (ops.size() < 2) continue;
      std::size_t arg = 0;  // ops ascend, so strict < keeps the lowest index on ties
      for (std::size_t k = 1; k < ops.size(); ++k)
        if (step.delta[c][e][k] < step.delta[c][e][arg]) arg = k;
      step.pruned.push_back({c, e, ops[arg]});
      next.retained[c][e].erase(next.retained[c][e].begin() + static_cast<std::ptrdiff_t>(arg));
    }
  return {std::move(next), std::move(step)};
}

struct PruneResult {
  ArchChoice choice;
  Architecture arch;
  std::vector<PruneStep> trace;
  std::size_t inferences = 0;
};

inline PruneResult prune_search(const SearchSpace& space, const Scorer& scorer, unsigned threads = 1) {
  space.validate();
  PruneResult r;
  Supernet net = Supernet::full(space);
  while (!net.is_single_path()) {
    auto [next, step] = prune_step(space, net, scorer, threads);
    r.inferences += step.inferences;
    r.trace.push_back(std::move(step));
    net = std::move(next);
  }
  r.choice = net.choice();
  r.arch = make_architecture(space, r.choice);
  return r;
}

inline nlohmann::json trace_to_json(const SearchSpace& space, const std::vector<PruneStep>& trace) {
  nlohmann::json steps = nlohmann::json::array();
  for (std::size_t t = 0; t < trace.size(); ++t) {
    const auto& s = trace[t];
    nlohmann::json cells = nlohmann::json::array();
    for (std::size_t c = 0; c < s.delta.size(); ++c) {
      const auto& ct = space.cell_types[c];
      nlohmann::json edges = nlohmann::json::array();
      for (std::size_t e = 0; e < s.delta[c].size(); ++e) {
        nlohmann::json d = nlohmann::json::object();
        for (std::size_t k = 0; k < s.delta[c][e].size(); ++k)
          d[ct.ops[static_cast<std::size_t>(s.before.retained[c][e][k])]] = s.delta[c][e][k];
        edges.push_back({{"edge", {ct.edges[e].first, ct.edges[e].second}}, {"delta", d}});
      }
      cells.push_back({{"cell_type", ct.name}, {"edges", edges}});
    }
    nlohmann::json pruned = nlohmann::json::array();
    for (const auto& p : s.pruned) {
      const auto& ct = space.cell_types[p.cell];
      pruned.push_back({{"cell_type", ct.name},
                        {"edge", {ct.edges[p.edge].first, ct.edges[p.edge].second}},
                        {"op", ct.ops[static_cast<std::size_t>(p.op)]}});
    }
    steps.push_back({{"iteration", t},
                     {"full_score", s.full_score},
                     {"inferences", s.inferences},
                     {"cells", cells},
                     {"pruned", pruned}});
  }
  return steps;
}

// ---------------------------------------------------------------------------
// Differential evolution

struct EvoConfig {
  int population = 50;
  int generations = 100;
  double mutation = 0.5;   // F
  double crossover = 0.9;  // CR
  std::uint64_t seed = 0;

  void validate() const {
    if (population < 4) throw ValidationError("population size must be >= 4");
    if (generations < 1) throw ValidationError("generations must be >= 1");
    if (!(mutation > 0.0 && mutation < 2.0)) throw ValidationError("mutation factor must lie in (0, 2)");
    if (!(crossover >= 0.0 && crossover <= 1.0)) throw ValidationError("crossover rate must lie in [0, 1]");
  }
};

/// Maps a gene in [0, 1] onto one of `num_ops` equal-width bins; 1.0 falls
/// into the last bin.
inline int discretize_gene(double x, std::size_t num_ops) {
  if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("gene value outside [0, 1]");
  if (num_ops == 0) throw ValidationError("empty operator set");
  const auto k = static_cast<std::size_t>(std::floor(x * static_cast<double>(num_ops)));
  return static_cast<int>(std::min(k, num_ops - 1));
}

/// Decodes one cell type's genes into an EdgeOpCell.
inline EdgeOpCell discretize(std::span<const double> genes, const CellSpace& ct) {
  if (genes.size() != ct.edges.size()) throw ValidationError("gene count does not match edge count");
  EdgeOpCell cell{ct.num_nodes, ct.num_inputs, {}};
  for (std::size_t e = 0; e < genes.size(); ++e)
    cell.edge_ops[ct.edges[e]] = ct.ops[static_cast<std::size_t>(discretize_gene(genes[e], ct.ops.size()))];
  return cell;
}

/// Decodes the concatenated gene vector of all cell types.
inline ArchChoice discretize_choice(std::span<const double> genes, const SearchSpace& space) {
  if (genes.size() != space.total_edges()) throw ValidationError("gene count does not match the space");
  ArchChoice choice;
  std::size_t g = 0;
  for (const auto& ct : space.cell_types) {
    std::vector<int> cell;
    for (std::size_t e = 0; e < ct.edges.size(); ++e) cell.push_back(discretize_gene(genes[g++], ct.ops.size()));
    choice.push_back(std::move(cell));
  }
  return choice;
}

struct EvoResult {
  ArchChoice choice;
  Architecture arch;
  std::vector<double> genes;
  double score = 0.0;
  std::vector<double> history;  // best fitness: initial population, then after each generation
  std::size_t inferences = 0;
};

inline EvoResult evo_search(const SearchSpace& space, const Scorer& scorer, const EvoConfig& cfg,
                            unsigned threads = 1) {
  space.validate();
  cfg.validate();
  const std::size_t np = static_cast<std::size_t>(cfg.population);
  const std::size_t dims = space.total_edges();
  std::mt19937_64 rng(cfg.seed);

  auto evaluate = [&](const std::vector<std::vector<double>>& pop, std::vector<double>& fitness) {
    fitness.assign(pop.size(), 0.0);
    parallel_for(pop.size(), threads, [&](std::size_t i) {
      fitness[i] = scorer.score(to_graphs(make_architecture(space, discretize_choice(pop[i], space))));
    });
  };
  auto best_of = [](const std::vector<double>& f) {
    std::size_t b = 0;
    for (std::size_t i = 1; i < f.size(); ++i)
      if (f[i] > f[b]) b = i;
    return b;
  };

  EvoResult r;
  std::vector<std::vector<double>> pop(np, std::vector<double>(dims));
  for (auto& x : pop)
    for (auto& g : x) g = detail::unit_uniform(rng);
  std::vector<double> fitness;
  evaluate(pop, fitness);
  r.inferences = np;
  r.history.push_back(fitness[best_of(fitness)]);

  std::vector<std::vector<double>> trial(np, std::vector<double>(dims));
  std::vector<double> trial_fitness;
  for (int gen = 0; gen < cfg.generations; ++gen) {
    for (std::size_t i = 0; i < np; ++i) {
      std::size_t r1, r2, r3;
      do r1 = detail::uniform_index(rng, np); while (r1 == i);
      do r2 = detail::uniform_index(rng, np); while (r2 == i || r2 == r1);
      do r3 = detail::uniform_index(rng, np); while (r3 == i || r3 == r1 || r3 == r2);
      const std::size_t forced = detail::uniform_index(rng, dims);
      for (std::size_t d = 0; d < dims; ++d) {
        const double mutant = std::clamp(pop[r1][d] + cfg.mutation * (pop[r2][d] - pop[r3][d]), 0.0, 1.0);
        const bool take = detail::unit_uniform(rng) < cfg.crossover || d == forced;
        trial[i][d] = take ? mutant : pop[i][d];
      }
    }
    evaluate(trial, trial_fitness);
    r.inferences += np;
    for (std::size_t i = 0; i < np; ++i)
      if (trial_fitness[i] >= fitness[i]) {
        pop[i] = trial[i];
        fitness[i] = trial_fitness[i];
      }
    r.history.push_back(fitness[best_of(fitness)]);
  }

  const std::size_t b = best_of(fitness);
  r.genes = pop[b];
  r.score = fitness[b];
  r.choice = discretize_choice(r.genes, space);
  r.arch = make_architecture(space, r.choice);
  return r;
}

// ---------------------------------------------------------------------------
// Hybrid

struct HybridOptions {
  bool run_prune = true;
  bool run_evo = true;
  unsigned threads = 1;
};

struct HybridResult {
  Architecture best_arch;
  double best_score = 0.0;
  std::string winner;  // "prune" or "evo"
  std::optional<PruneResult> prune;
  std::optional<double> prune_score;
  std::optional<EvoResult> evo;
  std::uint64_t seed = 0;
  double elapsed_ms = 0.0;
};

/// Runs the enabled searches and returns the higher-scoring result; pruning
/// wins ties. The pruned architecture is scored once more after the search.
inline HybridResult hybrid_search(const SearchSpace& space, const Scorer& scorer, const EvoConfig& cfg,
                                  const HybridOptions& opts = {}) {
  if (!opts.run_prune && !opts.run_evo) throw ValidationError("nothing to search: both searches disabled");
  const auto start = std::chrono::steady_clock::now();
  HybridResult r;
  r.seed = cfg.seed;
  if (opts.run_prune) {
    r.prune = prune_search(space, scorer, opts.threads);
    r.prune_score = scorer.score(to_graphs(r.prune->arch));
    r.best_arch = r.prune->arch;
    r.best_score = *r.prune_score;
    r.winner = "prune";
  }
  if (opts.run_evo) {
    r.evo = evo_search(space, scorer, cfg, opts.threads);
    if (!opts.run_prune || r.evo->score > r.best_score) {
      r.best_arch = r.evo->arch;
      r.best_score = r.evo->score;
      r.winner = "evo";
    }
  }
  r.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

/// Report JSON. elapsed_ms is wall-clock and therefore the only field that
/// differs between runs with the same seed.
inline nlohmann::json report_to_json(const HybridResult& r, const std::string& trace_path = "") {
  nlohmann::json j;
  j["best_arch"] = arch_to_json(r.best_arch);
  j["best_score"] = r.best_score;
  j["winner"] = r.winner;
  if (r.prune) {
    j["prune"] = {{"arch", arch_to_json(r.prune->arch)},
                  {"score", *r.prune_score},
                  {"inferences", r.prune->inferences},
                  {"iterations", r.prune->trace.size()},
                  {"trace_path", trace_path}};
  }
  if (r.evo) {
    j["evo"] = {{"arch", arch_to_json(r.evo->arch)},
                {"score", r.evo->score},
                {"inferences", r.evo->inferences},
                {"history", r.evo->history}};
  }
  j["seed"] = r.seed;
  j["elapsed_ms"] = r.elapsed_ms;
  return j;
}

}  // namespace nasgraph
