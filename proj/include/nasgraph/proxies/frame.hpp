#pragma once

// Per-architecture proxy scores and their pairwise rank correlations.
//
// External zero-cost proxies enter through CSV files of the form
//   arch_id,snip,synflow,...
//   |nor_conv_3x3~0|+...,0.13,2.4e5,...

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "nasgraph/error.hpp"
#include "nasgraph/io.hpp"
#include "nasgraph/proxies/rank.hpp"

namespace nasgraph {

struct ScoreColumn {
  std::string name;
  std::vector<double> values;
};

class ProxyScoreFrame {
 public:
  ProxyScoreFrame() = default;
  explicit ProxyScoreFrame(std::vector<std::string> ids) : ids_(std::move(ids)) {
    std::set<std::string> seen;
    for (const auto& id : ids_)
      if (!seen.insert(id).second) throw ValidationError("duplicate arch id '" + id + "'");
  }

  const std::vector<std::string>& ids() const noexcept { return ids_; }
  std::size_t rows() const noexcept { return ids_.size(); }
  const std::vector<ScoreColumn>& columns() const noexcept { return columns_; }

  void add_column(std::string name, std::vector<double> values) {
    if (values.size() != ids_.size())
      throw DimensionMismatchError("column '" + name + "' has " + std::to_string(values.size()) + " values, frame has " +
                                   std::to_string(ids_.size()) + " rows");
    if (has_column(name)) throw ValidationError("duplicate column '" + name + "'");
    columns_.push_back({std::move(name), std::move(values)});
  }

  bool has_column(const std::string& name) const {
    for (const auto& c : columns_)
      if (c.name == name) return true;
    return false;
  }

  const std::vector<double>& column(const std::string& name) const {
    for (const auto& c : columns_)
      if (c.name == name) return c.values;
    throw ValidationError("no column named '" + name + "'");
  }

  void set_ground_truth(const std::string& column_name) {
    column(column_name);
    truth_ = column_name;
  }
  const std::optional<std::string>& ground_truth() const noexcept { return truth_; }

  /// Keeps rows whose id is in `keep`, in this frame's order.
  ProxyScoreFrame select(const std::vector<std::string>& keep) const {
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < ids_.size(); ++i) pos[ids_[i]] = i;
    std::vector<std::size_t> rows;
    for (const auto& id : keep) {
      auto it = pos.find(id);
      if (it == pos.end()) throw ValidationError("arch id '" + id + "' not in frame");
      rows.push_back(it->second);
    }
    std::vector<std::string> ids;
    for (auto r : rows) ids.push_back(ids_[r]);
    ProxyScoreFrame out(std::move(ids));
    for (const auto& c : columns_) {
      std::vector<double> v;
      for (auto r : rows) v.push_back(c.values[r]);
      out.add_column(c.name, std::move(v));
    }
    out.truth_ = truth_;
    return out;
  }

 private:
  std::vector<std::string> ids_;
  std::vector<ScoreColumn> columns_;
  std::optional<std::string> truth_;
};

inline ProxyScoreFrame parse_scores_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(s);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  auto strip_cr = [](std::string& s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
  };
  if (!std::getline(in, line)) throw ParseError("scores CSV is empty");
  ++line_no;
  strip_cr(line);
  const auto header = split(line);
  if (header.empty() || header.front() != "arch_id") throw ParseError("scores CSV header must start with arch_id");
  std::vector<std::string> ids;
  std::vector<std::vector<double>> cols(header.size() - 1);
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw ParseError("scores CSV line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                       " fields, got " + std::to_string(cells.size()));
    ids.push_back(cells[0]);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      const char* begin = cells[c].c_str();
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (cells[c].empty() || end != begin + cells[c].size() || !std::isfinite(v))
        throw ParseError("scores CSV line " + std::to_string(line_no) + ": bad number '" + cells[c] + "'");
      cols[c - 1].push_back(v);
    }
  }
  ProxyScoreFrame frame(std::move(ids));
  for (std::size_t c = 1; c < header.size(); ++c) frame.add_column(header[c], std::move(cols[c - 1]));
  return frame;
}

inline ProxyScoreFrame load_scores_csv(const std::string& path) { return parse_scores_csv(detail::read_file(path)); }

// ---------------------------------------------------------------------------
// Correlation

struct CorrelationMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<std::optional<double>>> rho;  // null where a column is degenerate
};

/// Pairwise Spearman rho of all columns (ground truth included if present).
inline CorrelationMatrix correlation_matrix(const ProxyScoreFrame& frame) {
  const auto& cols = frame.columns();
  if (cols.size() < 2) throw ValidationError("correlation matrix needs at least 2 columns");
  CorrelationMatrix m;
  const std::size_t k = cols.size();
  m.rho.assign(k, std::vector<std::optional<double>>(k));
  std::vector<bool> degenerate(k, false);
  for (std::size_t i = 0; i < k; ++i) {
    m.labels.push_back(cols[i].name);
    const auto& v = cols[i].values;
    degenerate[i] = v.size() < 2 || std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (!degenerate[i]) m.rho[i][i] = 1.0;
    for (std::size_t j = i + 1; j < k; ++j) {
      if (degenerate[i] || degenerate[j]) continue;
      const double r = spearman_rho(cols[i].values, cols[j].values);
      m.rho[i][j] = m.rho[j][i] = r;
    }
  }
  return m;
}

inline std::string format_number(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

inline std::string to_csv(const CorrelationMatrix& m) {
  std::string out = "proxy";
  for (const auto& l : m.labels) out += "," + l;
  out += "\n";
  for (std::size_t i = 0; i < m.labels.size(); ++i) {
    out += m.labels[i];
    for (const auto& cell : m.rho[i]) out += "," + (cell ? format_number(*cell) : std::string("null"));
    out += "\n";
  }
  return out;
}

struct ProxyCorrelation {
  std::string name;
  std::optional<double> kendall_tau;
  std::optional<double> spearman_rho;
};

/// Kendall tau and Spearman rho of every non-truth column against the
/// ground-truth column. Undefined statistics are reported as empty.
inline std::vector<ProxyCorrelation> correlate_with_truth(const ProxyScoreFrame& frame) {
  if (!frame.ground_truth()) throw ValidationError("frame has no ground-truth column");
  const auto& truth = frame.column(*frame.ground_truth());
  std::vector<ProxyCorrelation> out;
  for (const auto& c : frame.columns()) {
    if (c.name == *frame.ground_truth()) continue;
    ProxyCorrelation pc{c.name, std::nullopt, std::nullopt};
    try {
      pc.kendall_tau = kendall_tau(c.values, truth);
      pc.spearman_rho = spearman_rho(c.values, truth);
    } catch (const NumericError&) {
    }
    out.push_back(std::move(pc));
  }
  return out;
}

inline nlohmann::json to_json(const CorrelationMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : m.rho) {
    nlohmann::json row = nlohmann::json::array();
    for (const auto& c : r) row.push_back(c ? nlohmann::json(*c) : nlohmann::json(nullptr));
    rows.push_back(std::move(row));
  }
  return {{"labels", m.labels}, {"spearman_rho", rows}};
}

}  // namespace nasgraph
