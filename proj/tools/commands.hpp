#pragma once

// Command implementations behind the nasgraph executable. Each cmd_* takes
// fully parsed options, writes its artifacts plus resolved_config.json into
// the output directory, prints a short human summary and throws the
// library's exceptions on failure; main() maps those onto exit codes.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nasgraph.hpp"

namespace nasgraph::cli {

namespace fs = std::filesystem;
using nlohmann::json;

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::string out = "out";
  unsigned threads = 1;

  json to_json() const { return {{"seed", seed}, {"out", out}, {"threads", threads}}; }
};

// ---------------------------------------------------------------------------
// Shared plumbing

inline fs::path prepare_out(const GlobalOptions& g) {
  std::error_code ec;
  fs::create_directories(g.out, ec);
  if (ec) throw IoError("cannot create output directory '" + g.out + "': " + ec.message());
  return fs::path(g.out);
}

/// Keys mirror the long option names so the file can be fed back through
/// --config.
inline void write_resolved_config(const GlobalOptions& g, const std::string& command, const json& section) {
  json j = g.to_json();
  j[command] = section;
  detail::write_file((prepare_out(g) / "resolved_config.json").string(), j.dump(2) + "\n");
}

inline void write_json(const fs::path& path, const json& j) { detail::write_file(path.string(), j.dump(2) + "\n"); }

inline void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

inline json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

/// A table loaded from a file, or the deterministic hash embedder given as
/// "hash:DIM". Hash tables are materialized over whatever names are needed
/// and identified by the spec string itself, so a model trained on one
/// vocabulary keeps matching when scoring another.
struct TableSource {
  std::string spec;
  std::optional<int> hash_dim;
  OperatorEmbeddingTable file_table;

  static TableSource open(const std::string& spec) {
    require(!spec.empty(), "--table is required (a table file or hash:DIM)");
    TableSource s;
    s.spec = spec;
    if (spec.rfind("hash:", 0) == 0) {
      const std::string digits = spec.substr(5);
      int dim = 0;
      std::size_t used = 0;
      try {
        dim = std::stoi(digits, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      require(used == digits.size() && !digits.empty() && dim > 0, "bad table spec '" + spec + "': expected hash:DIM");
      s.hash_dim = dim;
    } else {
      s.file_table = load_table(spec);
    }
    return s;
  }

  int dim() const { return hash_dim ? *hash_dim : file_table.dim(); }

  std::string fingerprint() const { return hash_dim ? spec : table_fingerprint(file_table); }

  OperatorEmbeddingTable materialize(const std::set<std::string>& names) const {
    if (hash_dim) return fallback_table({names.begin(), names.end()}, *hash_dim);
    return file_table;
  }
};

inline void add_names(std::set<std::string>& names, std::span<const CellGraph> graphs) {
  for (const auto& g : graphs) names.insert(g.node_ops.begin(), g.node_ops.end());
}

inline void warn_on_fingerprint(const GcnModel& model, const TableSource& source) {
  if (!model.table_fingerprint.empty() && model.table_fingerprint != source.fingerprint())
    std::cerr << "warning: model was trained with table " << model.table_fingerprint << ", scoring with "
              << source.fingerprint() << "\n";
}

inline std::optional<SearchSpace> maybe_space(const std::string& name_or_path) {
  if (name_or_path.empty()) return std::nullopt;
  return load_space(name_or_path);
}

/// An architecture on the command line: one arch string per cell type,
/// separated by ';'. A space, when known, supplies vocabularies and input
/// counts.
inline Architecture parse_arch_spec(const std::string& spec, const SearchSpace* space) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ';')) parts.push_back(part);
  require(!parts.empty(), "empty architecture");
  if (space)
    require(parts.size() == space->cell_types.size(),
            "architecture has " + std::to_string(parts.size()) + " cells, space declares " +
                std::to_string(space->cell_types.size()));
  Architecture arch;
  for (std::size_t c = 0; c < parts.size(); ++c) {
    const CellSpace* ct = space ? &space->cell_types[c] : nullptr;
    arch.push_back(parse_arch_string(parts[c], ct ? &ct->ops : nullptr, ct ? ct->num_inputs : 1));
  }
  return arch;
}

inline std::string arch_id(const Architecture& arch) {
  std::string id;
  for (const auto& cell : arch) id += (id.empty() ? "" : ";") + format_arch_string(cell);
  return id;
}

/// Deterministic Fisher-Yates on the library's portable index draw.
inline void shuffle_indices(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[detail::uniform_index(rng, i)]);
}

// ---------------------------------------------------------------------------
// ingest

struct IngestOptions {
  std::string input;
  std::string space;

  json to_json() const { return {{"input", input}, {"space", space}}; }
};

inline void cmd_ingest(const GlobalOptions& g, const IngestOptions& o) {
  require(!o.input.empty(), "ingest needs an input file");
  const auto space = maybe_space(o.space);
  const auto ds = load_dataset(o.input, space ? &*space : nullptr);
  const auto out = prepare_out(g);
  write_resolved_config(g, "ingest", o.to_json());
  detail::write_file((out / "dataset.jsonl").string(), to_jsonl(ds));

  std::optional<double> lo, hi;
  std::size_t labelled = 0;
  for (const auto& r : ds.records)
    if (r.label) {
      ++labelled;
      lo = lo ? std::min(*lo, *r.label) : *r.label;
      hi = hi ? std::max(*hi, *r.label) : *r.label;
    }
  const json summary = {{"records", ds.size()},
                        {"from_arch_strings", ds.from_strings},
                        {"from_explicit_graphs", ds.from_explicit},
                        {"labelled", labelled},
                        {"label_min", optional_number(lo)},
                        {"label_max", optional_number(hi)},
                        {"vocabulary", ds.vocabulary()}};
  write_json(out / "ingest_summary.json", summary);
  std::cout << "ingested " << ds.size() << " records (" << ds.from_strings << " cells from arch strings, "
            << ds.from_explicit << " explicit), " << labelled << " labelled -> " << (out / "dataset.jsonl").string()
            << "\n";
}

// ---------------------------------------------------------------------------
// train

struct TrainOptions {
  std::string dataset;
  std::string table;
  std::string space;
  double split = 0.8;
  TrainConfig cfg;

  json to_json() const {
    return {{"dataset", dataset},
            {"table", table},
            {"space", space},
            {"split", split},
            {"epochs", cfg.epochs},
            {"learning-rate", cfg.learning_rate},
            {"weight-decay", cfg.weight_decay},
            {"batch-size", cfg.batch_size},
            {"hidden", cfg.hidden_dim},
            {"label-columns", cfg.label_columns}};
  }
};

/// Training-set size for a split fraction: ceil(fraction * n), at least one.
/// The small slack keeps 0.8 * 10 from rounding up to 9.
inline std::size_t split_size(double fraction, std::size_t n) {
  require(fraction > 0.0 && fraction <= 1.0, "--split must lie in (0, 1]");
  const auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  return std::clamp<std::size_t>(k, 1, n);
}

inline json rank_summary(const std::vector<double>& pred, const std::vector<double>& truth) {
  json j = {{"n", pred.size()}, {"kendall_tau", nullptr}, {"spearman_rho", nullptr}};
  if (pred.size() < 2) {
    j["note"] = "fewer than 2 items";
    return j;
  }
  try {
    j["kendall_tau"] = kendall_tau(pred, truth);
    j["spearman_rho"] = spearman_rho(pred, truth);
  } catch (const NumericError& e) {
    j["note"] = e.what();
  }
  return j;
}

inline void cmd_train(const GlobalOptions& g, TrainOptions o) {
  require(!o.dataset.empty(), "--dataset is required");
  o.cfg.seed = g.seed;
  o.cfg.validate();
  const auto source = TableSource::open(o.table);
  const auto space = maybe_space(o.space);
  const auto ds = load_dataset(o.dataset, space ? &*space : nullptr);
  const auto labels = resolve_labels(ds, o.cfg.label_columns);

  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (labels[i]) rows.push_back(i);
  require(!rows.empty(), "dataset has no labelled records");
  const std::size_t n_train = split_size(o.split, rows.size());
  std::mt19937_64 rng(g.seed);
  shuffle_indices(rows, rng);
  const std::vector<std::size_t> train_rows(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
  const std::vector<std::size_t> held_rows(rows.begin() + static_cast<std::ptrdiff_t>(n_train), rows.end());

  std::set<std::string> names;
  for (const auto& r : ds.records) add_names(names, r.cells);
  const auto table = source.materialize(names);

  std::vector<TrainItem> items;
  for (auto i : train_rows) items.push_back({prepare_arch(ds.records[i].cells, table), labels[i]});
  auto result = train(items, table.dim(), o.cfg);
  result.model.table_fingerprint = source.fingerprint();

  auto score_rows = [&](const std::vector<std::size_t>& which) {
    std::vector<std::vector<CellGraph>> archs;
    std::vector<double> truth;
    for (auto i : which) {
      archs.push_back(ds.records[i].cells);
      truth.push_back(*labels[i]);
    }
    return std::pair{predict_many(result.model, archs, table, g.threads), truth};
  };
  const auto [train_pred, train_truth] = score_rows(train_rows);
  const auto [held_pred, held_truth] = score_rows(held_rows);

  const auto out = prepare_out(g);
  write_resolved_config(g, "train", o.to_json());
  save_model(result.model, (out / "model.json").string());
  std::vector<std::string> held_ids;
  for (auto i : held_rows) held_ids.push_back(ds.records[i].id);
  const json report = {{"dataset", o.dataset},
                       {"table", source.fingerprint()},
                       {"records", ds.size()},
                       {"labelled", rows.size()},
                       {"split", o.split},
                       {"train_size", train_rows.size()},
                       {"held_out_size", held_rows.size()},
                       {"held_out_ids", held_ids},
                       {"initial_loss", result.initial_loss},
                       {"final_loss", result.history.back()},
                       {"loss_history", result.history},
                       {"train_fit", rank_summary(train_pred, train_truth)},
                       {"held_out", rank_summary(held_pred, held_truth)}};
  write_json(out / "train_report.json", report);

  std::cout << "trained on " << train_rows.size() << " of " << rows.size() << " labelled architectures, loss "
            << result.initial_loss << " -> " << result.history.back() << "\n";
  const auto& h = report["held_out"];
  if (!h["kendall_tau"].is_null())
    std::cout << "held-out (" << held_rows.size() << "): kendall tau " << h["kendall_tau"].get<double>()
              << ", spearman rho " << h["spearman_rho"].get<double>() << "\n";
  else
    std::cout << "held-out (" << held_rows.size() << "): correlation undefined\n";
}

// ---------------------------------------------------------------------------
// predict

struct PredictOptions {
  std::string model;
  std::string table;
  std::string dataset;
  std::string space;
  std::vector<std::string> archs;

  json to_json() const {
    return {{"model", model}, {"table", table}, {"dataset", dataset}, {"space", space}, {"arch", archs}};
  }
};

inline void cmd_predict(const GlobalOptions& g, const PredictOptions& o) {
  require(!o.model.empty(), "--model is required");
  require(!o.dataset.empty() || !o.archs.empty(), "predict needs --dataset or at least one --arch");
  const auto model = load_model(o.model);
  const auto source = TableSource::open(o.table);
  const auto space = maybe_space(o.space);

  std::vector<std::string> ids;
  std::vector<std::vector<CellGraph>> archs;
  if (!o.dataset.empty()) {
    const auto ds = load_dataset(o.dataset, space ? &*space : nullptr);
    for (const auto& r : ds.records) {
      ids.push_back(r.id);
      archs.push_back(r.cells);
    }
  }
  for (const auto& spec : o.archs) {
    const auto arch = parse_arch_spec(spec, space ? &*space : nullptr);
    ids.push_back(arch_id(arch));
    archs.push_back(to_graphs(arch));
  }
  std::set<std::string> names;
  for (const auto& a : archs) add_names(names, a);
  const auto table = source.materialize(names);
  check_table(model, table);
  warn_on_fingerprint(model, source);
  const auto scores = predict_many(model, archs, table, g.threads);

  const auto out = prepare_out(g);
  write_resolved_config(g, "predict", o.to_json());
  std::string csv = "arch_id,score\n";
  for (std::size_t i = 0; i < ids.size(); ++i) csv += ids[i] + "," + format_number(scores[i]) + "\n";
  detail::write_file((out / "predictions.csv").string(), csv);
  for (std::size_t i = 0; i < ids.size() && i < 10; ++i) std::cout << ids[i] << "  " << scores[i] << "\n";
  if (ids.size() > 10) std::cout << "... " << ids.size() - 10 << " more\n";
  std::cout << "wrote " << (out / "predictions.csv").string() << "\n";
}

// ---------------------------------------------------------------------------
// search

struct SearchOptions {
  std::string model;
  std::string table;
  std::string space = "nb201";
  EvoConfig evo;
  bool prune_only = false;
  bool evo_only = false;

  json to_json() const {
    return {{"model", model},
            {"table", table},
            {"space", space},
            {"population", evo.population},
            {"generations", evo.generations},
            {"mutation", evo.mutation},
            {"crossover", evo.crossover},
            {"prune-only", prune_only},
            {"evo-only", evo_only}};
  }
};

inline void cmd_search(const GlobalOptions& g, SearchOptions o) {
  require(!o.model.empty(), "--model is required");
  require(!(o.prune_only && o.evo_only), "--prune-only and --evo-only are mutually exclusive");
  o.evo.seed = g.seed;
  o.evo.validate();
  const auto model = load_model(o.model);
  const auto source = TableSource::open(o.table);
  const auto space = load_space(o.space);
  const auto vocab = space.vocabulary();
  const auto table = source.materialize({vocab.begin(), vocab.end()});
  space.validate(table);
  check_table(model, table);
  warn_on_fingerprint(model, source);

  const GcnScorer scorer(model, table);
  const auto r = hybrid_search(space, scorer, o.evo, {!o.evo_only, !o.prune_only, g.threads});

  const auto out = prepare_out(g);
  write_resolved_config(g, "search", o.to_json());
  std::string trace_path;
  if (r.prune) {
    trace_path = "prune_trace.json";
    write_json(out / trace_path, trace_to_json(space, r.prune->trace));
  }
  write_json(out / "search_report.json", report_to_json(r, trace_path));

  std::cout << "best (" << r.winner << "): " << arch_id(r.best_arch) << "\nscore " << r.best_score << "\n";
  if (r.prune)
    std::cout << "prune: " << r.prune->inferences << " inferences in " << r.prune->trace.size() << " iterations, score "
              << *r.prune_score << "\n";
  if (r.evo) std::cout << "evo: " << r.evo->inferences << " inferences, score " << r.evo->score << "\n";
  std::cout << "elapsed " << r.elapsed_ms << " ms\n";
}

// ---------------------------------------------------------------------------
// correlate

struct CorrelateOptions {
  std::string model;
  std::string table;
  std::string space = "nb201";
  std::string macro;
  std::string scores;
  std::string truth;
  std::size_t sample_size = 1000;

  json to_json() const {
    return {{"model", model}, {"table", table},   {"space", space},
            {"macro", macro}, {"scores", scores}, {"truth", truth},
            {"sample-size", sample_size}};
  }
};

/// Up to n distinct architectures: the whole space when it is no larger,
/// otherwise seeded uniform draws without repetition.
inline std::vector<ArchChoice> sample_choices(const SearchSpace& space, std::size_t n, std::mt19937_64& rng) {
  double total = 1.0;
  for (const auto& ct : space.cell_types)
    total *= std::pow(static_cast<double>(ct.ops.size()), static_cast<double>(ct.edges.size()));
  std::vector<ArchChoice> out;
  if (total <= static_cast<double>(n)) {
    enumerate_choices(space, [&](const ArchChoice& c) { out.push_back(c); });
    return out;
  }
  std::set<ArchChoice> seen;
  while (out.size() < n) {
    auto c = random_choice(space, rng);
    if (seen.insert(c).second) out.push_back(std::move(c));
  }
  return out;
}

inline void cmd_correlate(const GlobalOptions& g, const CorrelateOptions& o) {
  require(o.sample_size >= 2, "--sample-size must be at least 2");
  require(o.model.empty() || !o.table.empty(), "--model needs --table");
  require(o.truth.empty() || !o.scores.empty(), "--truth names a column of the --scores file");
  const auto space = load_space(o.space);
  std::mt19937_64 rng(g.seed);

  // Rows: the scores file when given (subsampled if larger), else a sample
  // of the space.
  std::vector<std::string> ids;
  std::vector<Architecture> archs;
  std::optional<ProxyScoreFrame> external;
  if (!o.scores.empty()) {
    external = load_scores_csv(o.scores);
    std::vector<std::size_t> rows(external->rows());
    std::iota(rows.begin(), rows.end(), 0);
    if (rows.size() > o.sample_size) {
      shuffle_indices(rows, rng);
      rows.resize(o.sample_size);
      std::sort(rows.begin(), rows.end());
    }
    for (auto r : rows) ids.push_back(external->ids()[r]);
    external = external->select(ids);
    for (const auto& id : ids) archs.push_back(parse_arch_spec(id, &space));
  } else {
    for (const auto& c : sample_choices(space, o.sample_size, rng)) {
      archs.push_back(make_architecture(space, c));
      ids.push_back(arch_id(archs.back()));
    }
  }
  require(ids.size() >= 2, "need at least 2 architectures to correlate");

  ProxyScoreFrame frame(ids);
  if (!o.model.empty()) {
    const auto model = load_model(o.model);
    const auto source = TableSource::open(o.table);
    std::vector<std::vector<CellGraph>> graphs;
    std::set<std::string> names;
    for (const auto& a : archs) {
      graphs.push_back(to_graphs(a));
      add_names(names, graphs.back());
    }
    const auto table = source.materialize(names);
    check_table(model, table);
    warn_on_fingerprint(model, source);
    frame.add_column("tg_score", predict_many(model, graphs, table, g.threads));
  }
  const std::string macro_name = o.macro.empty() ? space.macro : o.macro;
  const bool single_cell = space.cell_types.size() == 1;
  if (!macro_name.empty() && single_cell) {
    const auto macro = load_macro(macro_name);
    std::vector<double> params, flops;
    for (const auto& a : archs) {
      const auto c = network_cost(a.front(), macro);
      params.push_back(static_cast<double>(c.params));
      flops.push_back(static_cast<double>(c.flops));
    }
    frame.add_column("params", std::move(params));
    frame.add_column("flops", std::move(flops));
  }
  if (external)
    for (const auto& c : external->columns()) frame.add_column(c.name, c.values);
  if (!o.truth.empty()) frame.set_ground_truth(o.truth);

  const auto matrix = correlation_matrix(frame);
  const auto out = prepare_out(g);
  write_resolved_config(g, "correlate", o.to_json());
  detail::write_file((out / "correlation_matrix.csv").string(), to_csv(matrix));

  std::string scores_csv = "arch_id";
  for (const auto& c : frame.columns()) scores_csv += "," + c.name;
  scores_csv += "\n";
  for (std::size_t i = 0; i < frame.rows(); ++i) {
    scores_csv += frame.ids()[i];
    for (const auto& c : frame.columns()) scores_csv += "," + format_number(c.values[i]);
    scores_csv += "\n";
  }
  detail::write_file((out / "scores.csv").string(), scores_csv);

  json summary = {{"space", space.name},
                  {"sample_size", o.sample_size},
                  {"n", frame.rows()},
                  {"seed", g.seed},
                  {"macro", single_cell ? macro_name : std::string()},
                  {"flops_convention", "one multiply-accumulate counted as one FLOP"},
                  {"matrix", to_json(matrix)},
                  {"vs_truth", nullptr}};
  std::cout << "correlated " << frame.rows() << " architectures over " << frame.columns().size() << " columns\n";
  if (frame.ground_truth()) {
    json rows = json::array();
    std::string table_csv = "metric";
    std::string tau_row = "kendall_tau", rho_row = "spearman_rho";
    for (const auto& pc : correlate_with_truth(frame)) {
      rows.push_back({{"proxy", pc.name},
                      {"kendall_tau", optional_number(pc.kendall_tau)},
                      {"spearman_rho", optional_number(pc.spearman_rho)}});
      table_csv += "," + pc.name;
      tau_row += "," + (pc.kendall_tau ? format_number(*pc.kendall_tau) : std::string("null"));
      rho_row += "," + (pc.spearman_rho ? format_number(*pc.spearman_rho) : std::string("null"));
      std::cout << "  " << pc.name << ": tau " << (pc.kendall_tau ? format_number(*pc.kendall_tau) : "null")
                << ", rho " << (pc.spearman_rho ? format_number(*pc.spearman_rho) : "null") << "\n";
    }
    summary["truth"] = *frame.ground_truth();
    summary["vs_truth"] = rows;
    detail::write_file((out / "truth_table.csv").string(), table_csv + "\n" + tau_row + "\n" + rho_row + "\n");
  }
  if (frame.has_column("params")) {
    const auto at = [&](const std::string& name) {
      return static_cast<std::size_t>(std::find(matrix.labels.begin(), matrix.labels.end(), name) -
                                      matrix.labels.begin());
    };
    const auto& rho = matrix.rho[at("params")][at("flops")];
    summary["params_flops_rho"] = optional_number(rho);
    std::cout << "  rho(params, flops) = " << (rho ? format_number(*rho) : "null") << "\n";
  }
  write_json(out / "correlation_summary.json", summary);
}

// ---------------------------------------------------------------------------
// flops / params

struct CountOptions {
  std::vector<std::string> archs;
  std::string dataset;
  std::string macro = "nb201";
  std::string space;

  json to_json() const { return {{"arch", archs}, {"dataset", dataset}, {"macro", macro}, {"space", space}}; }
};

/// `what` is "flops" or "params".
inline void cmd_count(const GlobalOptions& g, const CountOptions& o, const std::string& what) {
  require(!o.archs.empty() || !o.dataset.empty(), what + " needs --arch or --dataset");
  const auto macro = load_macro(o.macro);
  const auto space = maybe_space(o.space);
  std::vector<std::pair<std::string, EdgeOpCell>> cells;
  for (const auto& spec : o.archs) {
    const auto arch = parse_arch_spec(spec, space ? &*space : nullptr);
    require(arch.size() == 1, "counters take single-cell architectures");
    cells.emplace_back(arch_id(arch), arch.front());
  }
  if (!o.dataset.empty()) {
    // Counting needs edge-operator cells, so dataset entries must be arch strings.
    const auto text = detail::read_file(o.dataset);
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw ParseError("line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
      }
      const auto& c = j.value("cells", json::array());
      require(c.size() == 1 && c[0].is_string(),
              "line " + std::to_string(line_no) + ": counters need a single cell given as an arch string");
      const auto arch = parse_arch_spec(c[0].get<std::string>(), space ? &*space : nullptr);
      cells.emplace_back(j.value("id", arch_id(arch)), arch.front());
    }
  }

  const auto out = prepare_out(g);
  write_resolved_config(g, what, o.to_json());
  std::string csv = "arch_id," + what + "\n";
  if (what == "flops") std::cout << "# one multiply-accumulate counted as one FLOP\n";
  for (const auto& [id, cell] : cells) {
    const auto cost = network_cost(cell, macro);
    const auto v = what == "flops" ? cost.flops : cost.params;
    csv += id + "," + std::to_string(v) + "\n";
    std::cout << id << "  " << v << "\n";
  }
  detail::write_file((out / (what + ".csv")).string(), csv);
}

// ---------------------------------------------------------------------------
// embed-info

struct EmbedInfoOptions {
  std::string table;
  std::vector<std::string> names;
  int pca = 0;

  json to_json() const { return {{"table", table}, {"names", names}, {"pca", pca}}; }
};

inline void cmd_embed_info(const GlobalOptions& g, const EmbedInfoOptions& o) {
  const auto source = TableSource::open(o.table);
  std::set<std::string> wanted(o.names.begin(), o.names.end());
  if (source.hash_dim && wanted.empty()) {
    const auto& ops = nb201_operators();
    wanted.insert(ops.begin(), ops.end());
  }
  auto table = source.materialize(wanted);
  require(o.pca >= 0, "--pca must be non-negative");
  const auto out = prepare_out(g);
  write_resolved_config(g, "embed-info", o.to_json());
  if (o.pca > 0) {
    table = pca_reduce(table, o.pca);
    save_table(table, (out / ("table_pca" + std::to_string(o.pca) + ".json")).string());
  }
  std::vector<std::string> names = o.names;
  if (names.empty())
    for (const auto& [name, v] : table.entries()) names.push_back(name);
  json cosine = json::array();
  for (const auto& a : names) {
    json row = json::array();
    for (const auto& b : names) row.push_back(cosine_similarity(table.embed(a), table.embed(b)));
    cosine.push_back(std::move(row));
  }
  json meta = to_json(table)["meta"];
  const json info = {{"source", source.spec},
                     {"dim", table.dim()},
                     {"entries", table.size()},
                     {"fingerprint", source.hash_dim ? source.spec : table_fingerprint(table)},
                     {"meta", meta},
                     {"names", names},
                     {"cosine", cosine}};
  write_json(out / "embed_info.json", info);
  std::cout << "dim " << table.dim() << ", " << table.size() << " entries, fingerprint "
            << info["fingerprint"].get<std::string>() << "\n";
  if (!table.meta().model_name.empty()) std::cout << "model " << table.meta().model_name << "\n";
  for (std::size_t i = 0; i < names.size(); ++i)
    for (std::size_t k = i + 1; k < names.size(); ++k)
      std::cout << "  cos(" << names[i] << ", " << names[k] << ") = " << cosine[i][k].get<double>() << "\n";
}

}  // namespace nasgraph::cli
