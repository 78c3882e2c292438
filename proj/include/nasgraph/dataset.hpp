#pragma once

// Architecture datasets: one JSON object per line,
//   {"id": "a1", "cells": ["|nor_conv_3x3~0|+...", {"node_ops": [...], "adjacency": [[...]]}],
//    "label": 0.93, "aux": {"cifar100": 71.2}}
// Cells may be arch strings (converted to node-operator graphs) or explicit
// graphs. Every graph is validated on load.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nasgraph/cellgraph.hpp"
#include "nasgraph/error.hpp"
#include "nasgraph/gcn.hpp"
#include "nasgraph/io.hpp"
#include "nasgraph/search.hpp"

namespace nasgraph {

struct ArchRecord {
  std::string id;
  std::vector<CellGraph> cells;
  std::optional<double> label;
  nlohmann::json aux = nlohmann::json::object();
};

struct ArchDataset {
  std::vector<ArchRecord> records;
  std::size_t from_strings = 0;   // cells given as arch strings
  std::size_t from_explicit = 0;  // cells given as explicit graphs

  std::size_t size() const noexcept { return records.size(); }

  std::vector<std::string> vocabulary() const {
    std::set<std::string> names;
    for (const auto& r : records)
      for (const auto& g : r.cells) names.insert(g.node_ops.begin(), g.node_ops.end());
    return {names.begin(), names.end()};
  }
};

/// Parses one dataset line. `space`, when given, supplies operator
/// vocabularies and input counts for arch strings, per cell position.
inline ArchRecord parse_record(const nlohmann::json& j, const SearchSpace* space, std::size_t* n_strings = nullptr,
                               std::size_t* n_explicit = nullptr) {
  if (!j.is_object()) throw ParseError("record is not a JSON object");
  ArchRecord r;
  if (!j.contains("id") || !j.at("id").is_string()) throw ParseError("record needs a string \"id\"");
  r.id = j.at("id").get<std::string>();
  if (!j.contains("cells") || !j.at("cells").is_array() || j.at("cells").empty())
    throw ParseError("record needs a nonempty \"cells\" array");
  const auto& cells = j.at("cells");
  if (space && cells.size() != space->cell_types.size())
    throw ValidationError("record has " + std::to_string(cells.size()) + " cells, space declares " +
                          std::to_string(space->cell_types.size()));
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& cell = cells[c];
    CellGraph g;
    if (cell.is_string()) {
      const CellSpace* ct = space ? &space->cell_types[c] : nullptr;
      const EdgeOpCell ec =
          parse_arch_string(cell.get<std::string>(), ct ? &ct->ops : nullptr, ct ? ct->num_inputs : 1);
      g = edge_to_node_transform(ec);
      if (n_strings) ++*n_strings;
    } else {
      g = cell_graph_from_json(cell);
      if (n_explicit) ++*n_explicit;
    }
    if (auto v = validate_dag(g)) throw ValidationError(v->kind + ": " + v->detail);
    r.cells.push_back(std::move(g));
  }
  if (j.contains("label") && !j.at("label").is_null()) {
    if (!j.at("label").is_number()) throw ParseError("\"label\" must be a number or null");
    const double label = j.at("label").get<double>();
    if (!std::isfinite(label)) throw ValidationError("label is not finite");
    r.label = label;
  }
  if (j.contains("aux") && !j.at("aux").is_null()) {
    if (!j.at("aux").is_object()) throw ParseError("\"aux\" must be an object");
    r.aux = j.at("aux");
  }
  return r;
}

/// Reads a JSONL dataset. Errors name the 1-based line number; duplicate
/// ids are rejected.
inline ArchDataset parse_dataset(const std::string& text, const SearchSpace* space = nullptr) {
  ArchDataset ds;
  std::set<std::string> ids;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (std::all_of(line.begin(), line.end(), [](unsigned char ch) { return std::isspace(ch); })) continue;
    try {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
      }
      ArchRecord r = parse_record(j, space, &ds.from_strings, &ds.from_explicit);
      if (!ids.insert(r.id).second) throw ValidationError("duplicate id '" + r.id + "'");
      ds.records.push_back(std::move(r));
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return ds;
}

inline ArchDataset load_dataset(const std::string& path, const SearchSpace* space = nullptr) {
  return parse_dataset(detail::read_file(path), space);
}

/// Canonical form: explicit graphs only, one record per line.
inline std::string to_jsonl(const ArchDataset& ds) {
  std::string out;
  for (const auto& r : ds.records) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& g : r.cells) cells.push_back(to_json(g));
    nlohmann::json j = {{"id", r.id},
                        {"cells", cells},
                        {"label", r.label ? nlohmann::json(*r.label) : nlohmann::json(nullptr)},
                        {"aux", r.aux}};
    out += j.dump() + "\n";
  }
  return out;
}

/// Labels per record: the label field, or the named aux accuracy columns
/// min-max normalized and averaged. Records lacking a column get no label.
inline std::vector<std::optional<double>> resolve_labels(const ArchDataset& ds,
                                                         const std::vector<std::string>& columns) {
  std::vector<std::optional<double>> out(ds.size());
  if (columns.empty()) {
    for (std::size_t i = 0; i < ds.size(); ++i) out[i] = ds.records[i].label;
    return out;
  }
  std::vector<std::size_t> rows;
  std::vector<std::vector<double>> cols(columns.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& aux = ds.records[i].aux;
    bool complete = true;
    for (const auto& c : columns) complete = complete && aux.contains(c) && aux.at(c).is_number();
    if (!complete) continue;
    rows.push_back(i);
    for (std::size_t c = 0; c < columns.size(); ++c) cols[c].push_back(aux.at(columns[c]).get<double>());
  }
  if (rows.empty()) throw ValidationError("no record has all label columns");
  const auto combined = normalize_labels(cols);
  for (std::size_t k = 0; k < rows.size(); ++k) out[rows[k]] = combined[k];
  return out;
}

}  // namespace nasgraph
