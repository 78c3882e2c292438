#pragma once

// Two-layer graph convolution surrogate.
//
//   H_k   = relu(graph_norm(Abar * H_{k-1} * Theta_k))      k = 1, 2
//   score = w . mean_rows(H_2) + b
//
// with Abar = D^-1/2 (A_sym + I) D^-1/2 and H_0 the operator embeddings.
// Architectures with several cell types average the pooled vectors of their
// cells before the readout.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "nasgraph/cellgraph.hpp"
#include "nasgraph/embeddings.hpp"
#include "nasgraph/error.hpp"
#include "nasgraph/parallel.hpp"

namespace nasgraph {

inline constexpr int kModelFormatVersion = 1;
inline constexpr double kGraphNormEps = 1e-5;

/// Symmetrized, self-loop augmented, degree normalized adjacency.
inline Eigen::MatrixXd normalize_adjacency(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw DimensionMismatchError("adjacency must be square");
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd at = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && (a(i, j) != 0.0 || a(j, i) != 0.0)) at(i, j) = 1.0;
  const Eigen::VectorXd deg = at.rowwise().sum();
  // a_ij / sqrt(d_i d_j) rather than a product of two rsqrt factors: exact
  // on the diagonal (1/d_i) and symmetric bit for bit.
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (at(i, j) != 0.0) at(i, j) = 1.0 / std::sqrt(deg(i) * deg(j));
  return at;
}

inline Eigen::MatrixXd adjacency_matrix(const CellGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (g.has_edge(static_cast<std::size_t>(i), static_cast<std::size_t>(j))) a(i, j) = 1.0;
  return a;
}

inline Eigen::MatrixXd normalize_adjacency(const CellGraph& g) { return normalize_adjacency(adjacency_matrix(g)); }

/// Per-column standardization over the nodes of one graph followed by the
/// affine map gamma * x + beta.
inline Eigen::MatrixXd graph_norm(const Eigen::MatrixXd& h, const Eigen::VectorXd& gamma, const Eigen::VectorXd& beta,
                                  double eps = kGraphNormEps) {
  if (h.rows() < 1) throw ValidationError("graph_norm needs at least one node");
  if (gamma.size() != h.cols() || beta.size() != h.cols())
    throw DimensionMismatchError("graph_norm affine parameters do not match feature count");
  const Eigen::RowVectorXd mean = h.colwise().mean();
  const Eigen::MatrixXd centred = h.rowwise() - mean;
  const Eigen::RowVectorXd var = centred.array().square().colwise().mean();
  const Eigen::RowVectorXd inv_std = (var.array() + eps).rsqrt();
  Eigen::MatrixXd out = centred.array().rowwise() * (inv_std.array() * gamma.transpose().array());
  out.rowwise() += beta.transpose();
  return out;
}

/// Trainable parameters. Also used as the gradient container.
struct GcnParams {
  Eigen::MatrixXd theta1;  // dim_in x dim_h
  Eigen::MatrixXd theta2;  // dim_h x dim_h
  Eigen::VectorXd gamma1, beta1, gamma2, beta2;
  Eigen::VectorXd readout_w;
  double readout_b = 0.0;

  static GcnParams zeros(int dim_in, int dim_h) {
    GcnParams p;
    p.theta1 = Eigen::MatrixXd::Zero(dim_in, dim_h);
    p.theta2 = Eigen::MatrixXd::Zero(dim_h, dim_h);
    p.gamma1 = p.beta1 = p.gamma2 = p.beta2 = p.readout_w = Eigen::VectorXd::Zero(dim_h);
    return p;
  }

  std::size_t count() const {
    return static_cast<std::size_t>(theta1.size() + theta2.size() + 4 * gamma1.size() + readout_w.size() + 1);
  }

  /// Visits every scalar parameter in a fixed order:
  /// theta1, theta2, gamma1, beta1, gamma2, beta2, readout_w, readout_b.
  template <class Fn>
  void for_each(Fn&& fn) {
    for (auto* m : {&theta1, &theta2})
      for (Eigen::Index i = 0; i < m->size(); ++i) fn(m->data()[i]);
    for (auto* v : {&gamma1, &beta1, &gamma2, &beta2, &readout_w})
      for (Eigen::Index i = 0; i < v->size(); ++i) fn((*v)(i));
    fn(readout_b);
  }

  std::vector<double> flatten() const {
    std::vector<double> out;
    out.reserve(count());
    const_cast<GcnParams*>(this)->for_each([&](double& x) { out.push_back(x); });
    return out;
  }

  void assign(std::span<const double> values) {
    if (values.size() != count()) throw DimensionMismatchError("parameter vector has the wrong length");
    std::size_t k = 0;
    for_each([&](double& x) { x = values[k++]; });
  }

  /// Sum of squares of the decayed weights (theta1, theta2, readout_w).
  double decay_norm() const { return theta1.squaredNorm() + theta2.squaredNorm() + readout_w.squaredNorm(); }

  bool all_finite() const {
    const auto v = flatten();
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  }

  bool operator==(const GcnParams& o) const {
    return theta1 == o.theta1 && theta2 == o.theta2 && gamma1 == o.gamma1 && beta1 == o.beta1 && gamma2 == o.gamma2 &&
           beta2 == o.beta2 && readout_w == o.readout_w && readout_b == o.readout_b;
  }
};

struct GcnModel {
  int dim_in = 0;
  int dim_h = 0;
  std::uint64_t seed = 0;
  std::string table_fingerprint;
  GcnParams params;

  static GcnModel zeros(int dim_in, int dim_h) {
    if (dim_in <= 0 || dim_h <= 0) throw ValidationError("model dimensions must be positive");
    GcnModel m;
    m.dim_in = dim_in;
    m.dim_h = dim_h;
    m.params = GcnParams::zeros(dim_in, dim_h);
    return m;
  }

  bool operator==(const GcnModel&) const = default;
};

// ---------------------------------------------------------------------------
// Forward / backward

/// A cell ready for the network: normalized adjacency and node features.
struct PreparedCell {
  Eigen::MatrixXd abar;      // N x N
  Eigen::MatrixXd features;  // N x dim_in
  Eigen::MatrixXd abar_x;    // abar * features, constant across training
};

inline PreparedCell prepare_cell(const CellGraph& g, const OperatorEmbeddingTable& table) {
  const auto n = static_cast<Eigen::Index>(g.size());
  if (n == 0) throw ValidationError("cannot score an empty graph");
  if (g.adjacency.size() != g.size() * g.size()) throw ValidationError("adjacency has the wrong shape");
  PreparedCell c;
  c.abar = normalize_adjacency(g);
  c.features.resize(n, table.dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector& v = table.embed(g.node_ops[static_cast<std::size_t>(i)]);
    c.features.row(i) = Eigen::Map<const Eigen::RowVectorXd>(v.data(), table.dim());
  }
  c.abar_x = c.abar * c.features;
  return c;
}

using PreparedArch = std::vector<PreparedCell>;

inline PreparedArch prepare_arch(std::span<const CellGraph> graphs, const OperatorEmbeddingTable& table) {
  if (graphs.empty()) throw ValidationError("architecture has no cells");
  PreparedArch out;
  out.reserve(graphs.size());
  for (const auto& g : graphs) out.push_back(prepare_cell(g, table));
  return out;
}

namespace detail {

struct NormCache {
  Eigen::MatrixXd xhat;
  Eigen::RowVectorXd inv_std;
};

inline Eigen::MatrixXd graph_norm_cached(const Eigen::MatrixXd& z, const Eigen::VectorXd& gamma,
                                         const Eigen::VectorXd& beta, NormCache& cache) {
  const Eigen::RowVectorXd mean = z.colwise().mean();
  const Eigen::MatrixXd centred = z.rowwise() - mean;
  cache.inv_std = (centred.array().square().colwise().mean() + kGraphNormEps).rsqrt();
  cache.xhat = centred.array().rowwise() * cache.inv_std.array();
  Eigen::MatrixXd out = cache.xhat.array().rowwise() * gamma.transpose().array();
  out.rowwise() += beta.transpose();
  return out;
}

// Backward of y = gamma * xhat + beta with per-column batch statistics.
inline Eigen::MatrixXd graph_norm_backward(const Eigen::MatrixXd& dy, const Eigen::VectorXd& gamma,
                                           const NormCache& cache, Eigen::VectorXd& dgamma, Eigen::VectorXd& dbeta) {
  const double n = static_cast<double>(dy.rows());
  dgamma += (dy.array() * cache.xhat.array()).colwise().sum().transpose().matrix();
  dbeta += dy.colwise().sum().transpose();
  const Eigen::MatrixXd dxhat = dy.array().rowwise() * gamma.transpose().array();
  const Eigen::RowVectorXd sum_dxhat = dxhat.colwise().sum();
  const Eigen::RowVectorXd sum_dxhat_xhat = (dxhat.array() * cache.xhat.array()).colwise().sum();
  Eigen::MatrixXd dz = (n * dxhat).rowwise() - sum_dxhat;
  dz -= (cache.xhat.array().rowwise() * sum_dxhat_xhat.array()).matrix();
  return (dz.array().rowwise() * (cache.inv_std.array() / n)).matrix();
}

struct CellCache {
  NormCache norm1, norm2;
  Eigen::MatrixXd g1, h1, abar_h1, g2, h2;
};

}  // namespace detail

inline void check_dims(const GcnModel& model, const PreparedArch& arch) {
  for (const auto& c : arch)
    if (c.features.cols() != model.dim_in)
      throw DimensionMismatchError("embedding dim " + std::to_string(c.features.cols()) +
                                   " does not match model dim_in " + std::to_string(model.dim_in));
}

/// Score of a prepared architecture. When `grad` is given, accumulates
/// d(score)/d(params) scaled by `grad_scale` into it.
inline double forward_prepared(const GcnModel& model, const PreparedArch& arch, GcnParams* grad = nullptr,
                               double grad_scale = 1.0) {
  check_dims(model, arch);
  const auto& p = model.params;
  const double cells = static_cast<double>(arch.size());
  std::vector<detail::CellCache> caches(arch.size());
  Eigen::VectorXd pooled = Eigen::VectorXd::Zero(model.dim_h);
  for (std::size_t c = 0; c < arch.size(); ++c) {
    auto& k = caches[c];
    k.g1 = detail::graph_norm_cached(arch[c].abar_x * p.theta1, p.gamma1, p.beta1, k.norm1);
    k.h1 = k.g1.cwiseMax(0.0);
    k.abar_h1 = arch[c].abar * k.h1;
    k.g2 = detail::graph_norm_cached(k.abar_h1 * p.theta2, p.gamma2, p.beta2, k.norm2);
    k.h2 = k.g2.cwiseMax(0.0);
    pooled += k.h2.colwise().mean().transpose();
  }
  pooled /= cells;
  const double score = p.readout_w.dot(pooled) + p.readout_b;

  if (grad) {
    grad->readout_b += grad_scale;
    grad->readout_w += grad_scale * pooled;
    for (std::size_t c = 0; c < arch.size(); ++c) {
      auto& k = caches[c];
      const double rows = static_cast<double>(k.h2.rows());
      const Eigen::RowVectorXd dpool = (grad_scale / (cells * rows)) * p.readout_w.transpose();
      Eigen::MatrixXd dg2 = dpool.replicate(k.h2.rows(), 1);
      dg2 = (k.g2.array() > 0.0).select(dg2, 0.0);
      const Eigen::MatrixXd dz2 = detail::graph_norm_backward(dg2, p.gamma2, k.norm2, grad->gamma2, grad->beta2);
      grad->theta2 += k.abar_h1.transpose() * dz2;
      Eigen::MatrixXd dg1 = arch[c].abar.transpose() * dz2 * p.theta2.transpose();
      dg1 = (k.g1.array() > 0.0).select(dg1, 0.0);
      const Eigen::MatrixXd dz1 = detail::graph_norm_backward(dg1, p.gamma1, k.norm1, grad->gamma1, grad->beta1);
      grad->theta1 += arch[c].abar_x.transpose() * dz1;
    }
  }
  return score;
}

/// Score of an architecture given as one graph per cell type.
inline double forward(const GcnModel& model, std::span<const CellGraph> graphs, const OperatorEmbeddingTable& table) {
  if (table.dim() != model.dim_in)
    throw DimensionMismatchError("embedding table dim " + std::to_string(table.dim()) + " does not match model dim_in " +
                                 std::to_string(model.dim_in));
  const double s = forward_prepared(model, prepare_arch(graphs, table));
  if (!std::isfinite(s)) throw NumericError("non-finite score");
  return s;
}

inline double forward(const GcnModel& model, const CellGraph& graph, const OperatorEmbeddingTable& table) {
  return forward(model, std::span<const CellGraph>(&graph, 1), table);
}

/// Scores many architectures; the result does not depend on `threads`.
inline std::vector<double> predict_many(const GcnModel& model, const std::vector<std::vector<CellGraph>>& archs,
                                        const OperatorEmbeddingTable& table, unsigned threads = 1) {
  std::vector<double> out(archs.size());
  parallel_for(archs.size(), threads, [&](std::size_t i) { out[i] = forward(model, archs[i], table); });
  return out;
}

// ---------------------------------------------------------------------------
// Loss and training

struct TrainItem {
  PreparedArch arch;
  std::optional<double> label;
};

/// Mean squared error plus weight_decay * (|theta1|^2 + |theta2|^2 + |w|^2).
/// When `grad` is given it receives the full gradient of that loss.
inline double loss(const GcnModel& model, std::span<const TrainItem> batch, double weight_decay,
                   GcnParams* grad = nullptr) {
  if (batch.empty()) throw ValidationError("loss over an empty batch");
  if (grad) *grad = GcnParams::zeros(model.dim_in, model.dim_h);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  double sse = 0.0;
  for (const auto& item : batch) {
    if (!item.label) throw ValidationError("training item without a label");
    // Two passes when differentiating: the residual sets the scale.
    const double pred = forward_prepared(model, item.arch);
    const double r = pred - *item.label;
    sse += r * r;
    if (grad) forward_prepared(model, item.arch, grad, 2.0 * r * inv_n);
  }
  const auto& p = model.params;
  if (grad && weight_decay != 0.0) {
    grad->theta1 += 2.0 * weight_decay * p.theta1;
    grad->theta2 += 2.0 * weight_decay * p.theta2;
    grad->readout_w += 2.0 * weight_decay * p.readout_w;
  }
  return sse * inv_n + weight_decay * p.decay_norm();
}

struct TrainConfig {
  double learning_rate = 0.05;
  double weight_decay = 0.0;
  int epochs = 200;
  int batch_size = 8;
  int hidden_dim = 32;
  std::uint64_t seed = 0;
  /// aux columns combined into the label (min-max each, then average);
  /// empty means the dataset's own label field is used.
  std::vector<std::string> label_columns;

  void validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ValidationError("learning_rate must be positive");
    if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) throw ValidationError("weight_decay must be >= 0");
    if (epochs <= 0) throw ValidationError("epochs must be positive");
    if (batch_size <= 0) throw ValidationError("batch_size must be positive");
    if (hidden_dim <= 0) throw ValidationError("hidden_dim must be positive");
  }
};

struct TrainResult {
  GcnModel model;
  double initial_loss = 0.0;
  std::vector<double> history;  // full training-set loss after each epoch
};

namespace detail {

// Uniform double in [0, 1) from raw engine bits, so results do not depend on
// the standard library's distribution implementations.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(unit_uniform(rng) * static_cast<double>(n));
}

}  // namespace detail

/// Glorot-uniform weights, unit gamma, zero shifts and bias.
inline GcnModel init_model(int dim_in, int dim_h, std::uint64_t seed) {
  GcnModel m = GcnModel::zeros(dim_in, dim_h);
  m.seed = seed;
  std::mt19937_64 rng(seed);
  auto fill = [&](double* data, Eigen::Index size, double fan_in, double fan_out) {
    const double s = std::sqrt(6.0 / (fan_in + fan_out));
    for (Eigen::Index i = 0; i < size; ++i) data[i] = (2.0 * detail::unit_uniform(rng) - 1.0) * s;
  };
  fill(m.params.theta1.data(), m.params.theta1.size(), dim_in, dim_h);
  fill(m.params.theta2.data(), m.params.theta2.size(), dim_h, dim_h);
  fill(m.params.readout_w.data(), m.params.readout_w.size(), dim_h, 1);
  m.params.gamma1.setOnes();
  m.params.gamma2.setOnes();
  return m;
}

/// Minibatch SGD on loss(). Deterministic given cfg.seed.
inline TrainResult train(std::span<const TrainItem> items, int dim_in, const TrainConfig& cfg) {
  cfg.validate();
  if (items.empty()) throw ValidationError("training dataset is empty");
  for (const auto& it : items)
    if (!it.label) throw ValidationError("training item without a label");

  TrainResult result;
  result.model = init_model(dim_in, cfg.hidden_dim, cfg.seed);
  auto& model = result.model;
  for (const auto& it : items) check_dims(model, it.arch);

  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<TrainItem> batch;
  GcnParams grad;

  result.initial_loss = loss(model, items, cfg.weight_decay);
  result.history.reserve(static_cast<std::size_t>(cfg.epochs));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[detail::uniform_index(rng, i)]);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      batch.clear();
      for (std::size_t k = start; k < end; ++k) batch.push_back(items[order[k]]);
      loss(model, batch, cfg.weight_decay, &grad);
      std::vector<double> theta = model.params.flatten();
      const std::vector<double> g = grad.flatten();
      for (std::size_t k = 0; k < theta.size(); ++k) theta[k] -= cfg.learning_rate * g[k];
      model.params.assign(theta);
    }
    const double l = loss(model, items, cfg.weight_decay);
    if (!std::isfinite(l)) throw NumericError("non-finite training loss at epoch " + std::to_string(epoch + 1));
    result.history.push_back(l);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Labels

/// Min-max scales every column to [0, 1] independently, then averages the
/// columns per architecture. Result is clipped to [0, 1].
inline std::vector<double> normalize_labels(const std::vector<std::vector<double>>& columns) {
  if (columns.empty()) throw ValidationError("no label columns");
  const std::size_t n = columns.front().size();
  std::vector<double> out(n, 0.0);
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const auto& col = columns[c];
    if (col.size() != n) throw DimensionMismatchError("label columns differ in length");
    if (n == 0) throw ValidationError("label column is empty");
    for (double x : col)
      if (!std::isfinite(x)) throw NumericError("non-finite label in column " + std::to_string(c));
    const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
    if (*lo == *hi) throw ValidationError("label column " + std::to_string(c) + " is constant");
    const double span = *hi - *lo;
    for (std::size_t i = 0; i < n; ++i) out[i] += (col[i] - *lo) / span;
  }
  for (auto& x : out) x = std::clamp(x / static_cast<double>(columns.size()), 0.0, 1.0);
  return out;
}

// ---------------------------------------------------------------------------
// Persistence

namespace detail {

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) a.push_back(m(i, j));
  return a;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const char* name, Eigen::Index rows,
                                        Eigen::Index cols) {
  if (!j.contains(name) || !j.at(name).is_array()) throw CorruptFileError(std::string("model file lacks '") + name + "'");
  const auto& a = j.at(name);
  if (static_cast<Eigen::Index>(a.size()) != rows * cols)
    throw CorruptFileError(std::string("model array '") + name + "' has the wrong size");
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& x = a[k++];
      if (!x.is_number()) throw CorruptFileError(std::string("model array '") + name + "' has a non-number");
      m(i, c) = x.get<double>();
    }
  return m;
}

}  // namespace detail

inline nlohmann::json to_json(const GcnModel& m) {
  nlohmann::json j;
  j["format_version"] = kModelFormatVersion;
  j["dim_in"] = m.dim_in;
  j["dim_h"] = m.dim_h;
  j["seed"] = m.seed;
  j["table_fingerprint"] = m.table_fingerprint;
  j["activation"] = "relu";
  j["graph_norm_eps"] = kGraphNormEps;
  const auto& p = m.params;
  j["theta1"] = detail::matrix_to_json(p.theta1);
  j["theta2"] = detail::matrix_to_json(p.theta2);
  j["gnorm1_gamma"] = detail::matrix_to_json(p.gamma1);
  j["gnorm1_beta"] = detail::matrix_to_json(p.beta1);
  j["gnorm2_gamma"] = detail::matrix_to_json(p.gamma2);
  j["gnorm2_beta"] = detail::matrix_to_json(p.beta2);
  j["readout_w"] = detail::matrix_to_json(p.readout_w);
  j["readout_b"] = p.readout_b;
  return j;
}

inline GcnModel model_from_json(const nlohmann::json& j) try {
  if (!j.is_object() || !j.contains("format_version")) throw CorruptFileError("model file has no header");
  if (!j.at("format_version").is_number_integer() || j.at("format_version").get<int>() != kModelFormatVersion)
    throw ValidationError("model format version mismatch: file has " + j.at("format_version").dump() +
                          ", reader supports " + std::to_string(kModelFormatVersion));
  for (const char* key : {"dim_in", "dim_h", "seed"})
    if (!j.contains(key) || !j.at(key).is_number_integer()) throw CorruptFileError(std::string("bad header field ") + key);
  if (j.contains("activation") && j.at("activation") != "relu") throw ValidationError("unsupported activation");
  if (j.contains("graph_norm_eps") && j.at("graph_norm_eps").get<double>() != kGraphNormEps)
    throw ValidationError("unsupported graph_norm_eps");
  GcnModel m = GcnModel::zeros(j.at("dim_in").get<int>(), j.at("dim_h").get<int>());
  m.seed = j.at("seed").get<std::uint64_t>();
  m.table_fingerprint = j.value("table_fingerprint", std::string{});
  auto& p = m.params;
  p.theta1 = detail::matrix_from_json(j, "theta1", m.dim_in, m.dim_h);
  p.theta2 = detail::matrix_from_json(j, "theta2", m.dim_h, m.dim_h);
  p.gamma1 = detail::matrix_from_json(j, "gnorm1_gamma", m.dim_h, 1);
  p.beta1 = detail::matrix_from_json(j, "gnorm1_beta", m.dim_h, 1);
  p.gamma2 = detail::matrix_from_json(j, "gnorm2_gamma", m.dim_h, 1);
  p.beta2 = detail::matrix_from_json(j, "gnorm2_beta", m.dim_h, 1);
  p.readout_w = detail::matrix_from_json(j, "readout_w", m.dim_h, 1);
  if (!j.contains("readout_b") || !j.at("readout_b").is_number()) throw CorruptFileError("model file lacks readout_b");
  p.readout_b = j.at("readout_b").get<double>();
  if (!p.all_finite()) throw CorruptFileError("model file contains non-finite weights");
  return m;
} catch (const nlohmann::json::exception& e) {
  throw CorruptFileError(std::string("malformed model file: ") + e.what());
}

inline std::string serialize_model(const GcnModel& m) { return to_json(m).dump() + "\n"; }

inline void save_model(const GcnModel& m, const std::string& path) { detail::write_file(path, serialize_model(m)); }

inline GcnModel load_model(const std::string& path) {
  const std::string text = detail::read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw CorruptFileError("model file '" + path + "' is corrupt: " + e.what());
  }
  return model_from_json(j);
}

/// Throws DimensionMismatchError when the table cannot feed the model.
inline void check_table(const GcnModel& m, const OperatorEmbeddingTable& table) {
  if (table.dim() != m.dim_in)
    throw DimensionMismatchError("embedding table dim " + std::to_string(table.dim()) + " does not match model dim_in " +
                                 std::to_string(m.dim_in));
}

}  // namespace nasgraph
