#pragma once

// Operator embedding tables and vector utilities.
//
// Tables are produced by an external exporter (sentence-transformer over
// operator descriptions) and consumed here read-only. The file format is
//
//   {"dim": 384,
//    "meta": {"model_name": "...", "sentence_length_class": "short",
//             "pca_from": null, ...},
//    "entries": {"nor_conv_3x3": [0.01, ...], ...}}
//
// Unknown meta keys are preserved so exporter provenance survives a
// load/save cycle.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "nasgraph/error.hpp"
#include "nasgraph/io.hpp"

namespace nasgraph {

using Vector = std::vector<double>;

enum class SentenceLength { kShort, kMedium, kLong };

inline std::string_view to_string(SentenceLength s) {
  switch (s) {
    case SentenceLength::kShort: return "short";
    case SentenceLength::kMedium: return "medium";
    case SentenceLength::kLong: return "long";
  }
  return "short";
}

inline SentenceLength parse_sentence_length(std::string_view s) {
  if (s == "short") return SentenceLength::kShort;
  if (s == "medium") return SentenceLength::kMedium;
  if (s == "long") return SentenceLength::kLong;
  throw ValidationError("sentence_length_class must be short|medium|long, got '" + std::string(s) + "'");
}

struct TableMeta {
  std::string model_name;
  SentenceLength sentence_length_class = SentenceLength::kShort;
  std::optional<int> pca_from;
  nlohmann::json extra = nlohmann::json::object();  // exporter keys we do not interpret

  bool operator==(const TableMeta&) const = default;
};

/// Map from operator name to a fixed-length vector. Immutable once built;
/// use the static constructors so the invariants are checked.
class OperatorEmbeddingTable {
 public:
  OperatorEmbeddingTable() = default;

  /// Validates: dim > 0, every vector has length dim, is finite and nonzero.
  static OperatorEmbeddingTable create(int dim, std::map<std::string, Vector> entries, TableMeta meta = {}) {
    if (dim <= 0) throw ValidationError("embedding dim must be positive");
    for (const auto& [name, v] : entries) {
      if (name.empty()) throw ValidationError("empty operator name in embedding table");
      if (static_cast<int>(v.size()) != dim)
        throw DimensionMismatchError("entry '" + name + "' has length " + std::to_string(v.size()) +
                                     ", table dim is " + std::to_string(dim));
      bool nonzero = false;
      for (double x : v) {
        if (!std::isfinite(x)) throw ValidationError("entry '" + name + "' has a non-finite value");
        nonzero = nonzero || x != 0.0;
      }
      if (!nonzero) throw ValidationError("entry '" + name + "' is the zero vector");
    }
    OperatorEmbeddingTable t;
    t.dim_ = dim;
    t.entries_ = std::move(entries);
    t.meta_ = std::move(meta);
    return t;
  }

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const TableMeta& meta() const noexcept { return meta_; }
  const std::map<std::string, Vector>& entries() const noexcept { return entries_; }
  bool contains(const std::string& name) const { return entries_.count(name) != 0; }

  /// Exact, case-sensitive lookup. Unknown names are an error: an unseen
  /// operator is handled by regenerating the table, never by guessing.
  const Vector& embed(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw UnknownOperatorError(name);
    return it->second;
  }

  bool operator==(const OperatorEmbeddingTable&) const = default;

 private:
  int dim_ = 0;
  std::map<std::string, Vector> entries_;
  TableMeta meta_;
};

inline const Vector& embed(const OperatorEmbeddingTable& table, const std::string& op_name) {
  return table.embed(op_name);
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json to_json(const OperatorEmbeddingTable& t) {
  nlohmann::json meta = t.meta().extra;
  meta["model_name"] = t.meta().model_name;
  meta["sentence_length_class"] = std::string(to_string(t.meta().sentence_length_class));
  meta["pca_from"] = t.meta().pca_from ? nlohmann::json(*t.meta().pca_from) : nlohmann::json(nullptr);
  nlohmann::json entries = nlohmann::json::object();
  for (const auto& [name, v] : t.entries()) entries[name] = v;
  return {{"dim", t.dim()}, {"meta", std::move(meta)}, {"entries", std::move(entries)}};
}

inline OperatorEmbeddingTable table_from_json(const nlohmann::json& j) try {
  if (!j.is_object() || !j.contains("dim") || !j.contains("entries"))
    throw ParseError("embedding table needs \"dim\" and \"entries\"");
  if (!j.at("dim").is_number_integer()) throw ParseError("\"dim\" must be an integer");
  const int dim = j.at("dim").get<int>();

  TableMeta meta;
  if (j.contains("meta") && !j.at("meta").is_null()) {
    const auto& m = j.at("meta");
    if (!m.is_object()) throw ParseError("\"meta\" must be an object");
    for (const auto& [key, value] : m.items()) {
      if (key == "model_name") {
        meta.model_name = value.get<std::string>();
      } else if (key == "sentence_length_class") {
        meta.sentence_length_class = parse_sentence_length(value.get<std::string>());
      } else if (key == "pca_from") {
        if (!value.is_null()) meta.pca_from = value.get<int>();
      } else {
        meta.extra[key] = value;
      }
    }
  }

  const auto& e = j.at("entries");
  if (!e.is_object()) throw ParseError("\"entries\" must be an object");
  std::map<std::string, Vector> entries;
  for (const auto& [name, value] : e.items()) {
    if (!value.is_array()) throw ParseError("entry '" + name + "' is not an array");
    Vector v;
    v.reserve(value.size());
    for (const auto& x : value) {
      if (!x.is_number()) throw ParseError("entry '" + name + "' has a non-numeric value");
      v.push_back(x.get<double>());
    }
    if (!entries.emplace(name, std::move(v)).second) throw ValidationError("duplicate operator '" + name + "'");
  }
  return OperatorEmbeddingTable::create(dim, std::move(entries), std::move(meta));
} catch (const nlohmann::json::exception& e) {
  throw ParseError(std::string("malformed embedding table: ") + e.what());
}

namespace detail {

// nlohmann::json silently keeps the last of duplicate object keys, so
// duplicates in "entries" are detected with a SAX pass before parsing.
class DuplicateKeyScan : public nlohmann::json_sax<nlohmann::json> {
 public:
  std::optional<std::string> duplicate;

  bool null() override { return true; }
  bool boolean(bool) override { return true; }
  bool number_integer(number_integer_t) override { return true; }
  bool number_unsigned(number_unsigned_t) override { return true; }
  bool number_float(number_float_t, const string_t&) override { return true; }
  bool string(string_t&) override { return true; }
  bool binary(binary_t&) override { return true; }
  bool start_object(std::size_t) override {
    keys_.emplace_back();
    return true;
  }
  bool key(string_t& k) override {
    if (!keys_.back().insert(k).second && !duplicate) duplicate = k;
    return true;
  }
  bool end_object() override {
    keys_.pop_back();
    return true;
  }
  bool start_array(std::size_t) override { return true; }
  bool end_array() override { return true; }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) override { return false; }

 private:
  std::vector<std::set<std::string>> keys_;
};

}  // namespace detail

inline OperatorEmbeddingTable parse_table(const std::string& text) {
  detail::DuplicateKeyScan scan;
  if (!nlohmann::json::sax_parse(text, &scan)) throw ParseError("embedding table is not valid JSON");
  if (scan.duplicate) throw ValidationError("duplicate key '" + *scan.duplicate + "' in embedding table");
  return table_from_json(nlohmann::json::parse(text));
}

inline OperatorEmbeddingTable load_table(const std::string& path) {
  return parse_table(detail::read_file(path));
}

inline void save_table(const OperatorEmbeddingTable& table, const std::string& path) {
  detail::write_file(path, to_json(table).dump(1) + "\n");
}

/// FNV-1a over the canonical serialization. Stable across platforms since
/// the JSON dump is locale-independent and entries are ordered.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string table_fingerprint(const OperatorEmbeddingTable& table) {
  nlohmann::json j = to_json(table);
  j.erase("meta");  // provenance does not change what the model sees
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(j.dump());
  return ss.str();
}

// ---------------------------------------------------------------------------
// Vector utilities

inline double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatchError("vector lengths differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatchError("vector lengths differ");
  const double na = norm2(a), nb = norm2(b);
  if (na == 0.0 || nb == 0.0) throw NumericError("cosine similarity of a zero vector");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return std::clamp(dot / (na * nb), -1.0, 1.0);
}

struct TripletConfig {
  double margin = 1.0;
};

/// Hinged triplet objective with Euclidean distance:
///   max(|a - p| - |a - n| + margin, 0).
inline double triplet_loss(std::span<const double> anchor, std::span<const double> positive,
                           std::span<const double> negative, const TripletConfig& cfg = {}) {
  if (cfg.margin < 0.0) throw ValidationError("triplet margin must be nonnegative");
  if (anchor.size() != positive.size() || anchor.size() != negative.size())
    throw DimensionMismatchError("triplet vectors differ in length");
  const double loss = euclidean_distance(anchor, positive) - euclidean_distance(anchor, negative) + cfg.margin;
  return std::max(loss, 0.0);
}

/// Projects the entries onto the top-k principal components of the
/// mean-centred entry set. Components are ordered by descending eigenvalue
/// and signed so that each one's largest-magnitude coordinate is positive.
inline OperatorEmbeddingTable pca_reduce(const OperatorEmbeddingTable& table, int k) {
  if (k <= 0) throw ValidationError("PCA target dimension must be positive");
  if (k > table.dim())
    throw ValidationError("PCA target dimension " + std::to_string(k) + " exceeds table dim " +
                          std::to_string(table.dim()));
  if (table.size() < 2) throw ValidationError("PCA needs at least 2 entries");

  const auto n = static_cast<Eigen::Index>(table.size());
  const Eigen::Index d = table.dim();
  Eigen::MatrixXd x(n, d);
  Eigen::Index row = 0;
  for (const auto& [name, v] : table.entries()) x.row(row++) = Eigen::Map<const Eigen::RowVectorXd>(v.data(), d);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw NumericError("PCA eigendecomposition failed");
  // Eigen returns ascending eigenvalues.
  Eigen::MatrixXd components(d, k);
  for (int c = 0; c < k; ++c) {
    Eigen::VectorXd axis = solver.eigenvectors().col(d - 1 - c);
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < d; ++i)
      if (std::abs(axis(i)) > std::abs(axis(arg))) arg = i;
    if (axis(arg) < 0) axis = -axis;
    components.col(c) = axis;
  }
  const Eigen::MatrixXd projected = x * components;

  std::map<std::string, Vector> entries;
  row = 0;
  for (const auto& [name, v] : table.entries()) {
    Vector out(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) out[static_cast<std::size_t>(c)] = projected(row, c);
    if (std::all_of(out.begin(), out.end(), [](double v) { return v == 0.0; }))
      throw NumericError("entry '" + name + "' coincides with the table mean and projects to the zero vector");
    entries.emplace(name, std::move(out));
    ++row;
  }
  TableMeta meta = table.meta();
  meta.pca_from = table.dim();
  return OperatorEmbeddingTable::create(k, std::move(entries), std::move(meta));
}

/// Deterministic unit-norm vector seeded from a stable hash of the name.
/// Stand-in for exporter output in tests and offline runs.
inline Vector fallback_hash_embedder(std::string_view op_name, int dim) {
  if (dim < 1) throw ValidationError("embedding dim must be >= 1");
  std::mt19937_64 rng(fnv1a64(op_name));
  Vector v(static_cast<std::size_t>(dim));
  double s = 0.0;
  do {
    s = 0.0;
    for (auto& x : v) {
      // 53 random mantissa bits mapped onto [-1, 1); std distributions are
      // implementation-defined, raw engine output is not.
      x = static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
      s += x * x;
    }
  } while (s == 0.0);
  const double inv = 1.0 / std::sqrt(s);
  for (auto& x : v) x *= inv;
  return v;
}

/// Table of fallback embeddings for the given operator names.
inline OperatorEmbeddingTable fallback_table(const std::vector<std::string>& names, int dim) {
  std::map<std::string, Vector> entries;
  for (const auto& n : names) entries.emplace(n, fallback_hash_embedder(n, dim));
  TableMeta meta;
  meta.model_name = "fallback-hash";
  return OperatorEmbeddingTable::create(dim, std::move(entries), std::move(meta));
}

}  // namespace nasgraph
