#pragma once

// Analytic parameter and FLOP counts for a cell stacked into a macro network.
//
// Layer conventions:
//   conv kxk + BN, Cin -> Cout:  params k^2*Cin*Cout + 2*Cout,
//                                MACs   k^2*Cin*Cout*Hout*Wout
//   plain conv (no BN):          params k^2*Cin*Cout
//   pooling kxk over C channels: k^2*C*Hout*Wout additions, no params
//   linear in -> out:            params in*out + out, MACs in*out
//   identity, zero:              nothing
// One multiply-accumulate is counted as one FLOP.
//
// The macro network is a stem conv, then stages of identical cells joined
// by ResNet basic blocks (stride-2 conv pair with an avg-pool + 1x1 shortcut),
// then BN, global average pooling and a linear classifier. With widths
// 16/32/64 and five cells per stage this is the NAS-Bench-201 network.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nasgraph/cellgraph.hpp"
#include "nasgraph/error.hpp"
#include "nasgraph/io.hpp"

namespace nasgraph {

struct OpFormula {
  enum class Kind { kZero, kIdentity, kConv, kPool };
  Kind kind = Kind::kZero;
  int kernel = 1;
};

class OperatorFormulas {
 public:
  /// Operators of the NAS-Bench-201 cell.
  static OperatorFormulas nb201() {
    OperatorFormulas f;
    f.add("none", {OpFormula::Kind::kZero, 1});
    f.add("skip_connect", {OpFormula::Kind::kIdentity, 1});
    f.add("nor_conv_1x1", {OpFormula::Kind::kConv, 1});
    f.add("nor_conv_3x3", {OpFormula::Kind::kConv, 3});
    f.add("avg_pool_3x3", {OpFormula::Kind::kPool, 3});
    return f;
  }

  void add(const std::string& name, OpFormula formula) {
    if (formula.kernel <= 0) throw ValidationError("kernel size must be positive for '" + name + "'");
    formulas_[name] = formula;
  }

  const OpFormula& at(const std::string& name) const {
    auto it = formulas_.find(name);
    if (it == formulas_.end()) throw ValidationError("operator '" + name + "' has no registered layer formula");
    return it->second;
  }

  const std::map<std::string, OpFormula>& all() const noexcept { return formulas_; }

 private:
  std::map<std::string, OpFormula> formulas_;
};

struct Stage {
  int width = 16;
  int cells = 5;
};

struct MacroConfig {
  int input_h = 32;
  int input_w = 32;
  int input_channels = 3;
  int stem_channels = 16;
  std::vector<Stage> stages;
  int num_classes = 10;
  OperatorFormulas formulas = OperatorFormulas::nb201();

  static MacroConfig nb201() {
    MacroConfig m;
    m.stages = {{16, 5}, {32, 5}, {64, 5}};
    return m;
  }

  void validate() const {
    if (input_h <= 0 || input_w <= 0 || input_channels <= 0 || stem_channels <= 0 || num_classes <= 0)
      throw ValidationError("macro dimensions must be positive");
    if (stages.empty()) throw ValidationError("macro config needs at least one stage");
    for (const auto& s : stages)
      if (s.width <= 0 || s.cells < 0) throw ValidationError("stage widths must be positive");
    if (stages.front().width != stem_channels) throw ValidationError("first stage width must equal stem channels");
    int h = input_h, w = input_w;
    for (std::size_t i = 1; i < stages.size(); ++i) {
      if (h % 2 != 0 || w % 2 != 0) throw ValidationError("resolution not divisible by 2 at a reduction");
      h /= 2;
      w /= 2;
    }
  }
};

struct Cost {
  std::uint64_t params = 0;
  std::uint64_t flops = 0;

  Cost& operator+=(const Cost& o) {
    params += o.params;
    flops += o.flops;
    return *this;
  }
  friend Cost operator+(Cost a, const Cost& b) { return a += b; }
  friend Cost operator*(std::uint64_t k, const Cost& c) { return {k * c.params, k * c.flops}; }
  bool operator==(const Cost&) const = default;
};

namespace layers {

inline Cost conv_bn(std::uint64_t k, std::uint64_t cin, std::uint64_t cout, std::uint64_t h, std::uint64_t w) {
  return {k * k * cin * cout + 2 * cout, k * k * cin * cout * h * w};
}
inline Cost conv(std::uint64_t k, std::uint64_t cin, std::uint64_t cout, std::uint64_t h, std::uint64_t w) {
  return {k * k * cin * cout, k * k * cin * cout * h * w};
}
inline Cost pool(std::uint64_t k, std::uint64_t c, std::uint64_t h, std::uint64_t w) { return {0, k * k * c * h * w}; }
inline Cost batch_norm(std::uint64_t c) { return {2 * c, 0}; }
inline Cost linear(std::uint64_t in, std::uint64_t out) { return {in * out + out, in * out}; }

}  // namespace layers

inline Cost op_cost(const OpFormula& f, std::uint64_t c, std::uint64_t h, std::uint64_t w) {
  switch (f.kind) {
    case OpFormula::Kind::kConv: return layers::conv_bn(static_cast<std::uint64_t>(f.kernel), c, c, h, w);
    case OpFormula::Kind::kPool: return layers::pool(static_cast<std::uint64_t>(f.kernel), c, h, w);
    case OpFormula::Kind::kIdentity:
    case OpFormula::Kind::kZero: return {};
  }
  return {};
}

/// Cost of one cell at width c and resolution h x w.
inline Cost cell_cost(const EdgeOpCell& cell, const OperatorFormulas& formulas, std::uint64_t c, std::uint64_t h,
                      std::uint64_t w) {
  Cost total;
  for (const auto& [edge, op] : cell.edge_ops) total += op_cost(formulas.at(op), c, h, w);
  return total;
}

/// Everything in the macro network except the searched cells.
inline Cost fixed_cost(const MacroConfig& m) {
  m.validate();
  std::uint64_t h = static_cast<std::uint64_t>(m.input_h), w = static_cast<std::uint64_t>(m.input_w);
  Cost total = layers::conv_bn(3, static_cast<std::uint64_t>(m.input_channels),
                               static_cast<std::uint64_t>(m.stem_channels), h, w);
  for (std::size_t s = 1; s < m.stages.size(); ++s) {
    const auto cin = static_cast<std::uint64_t>(m.stages[s - 1].width);
    const auto cout = static_cast<std::uint64_t>(m.stages[s].width);
    h /= 2;
    w /= 2;
    total += layers::conv_bn(3, cin, cout, h, w);
    total += layers::conv_bn(3, cout, cout, h, w);
    total += layers::pool(2, cin, h, w);
    total += layers::conv(1, cin, cout, h, w);
  }
  const auto last = static_cast<std::uint64_t>(m.stages.back().width);
  total += layers::batch_norm(last);
  total += Cost{0, last * h * w};  // global average pooling
  total += layers::linear(last, static_cast<std::uint64_t>(m.num_classes));
  return total;
}

/// Full-network cost with `cell` repeated in every stage.
inline Cost network_cost(const EdgeOpCell& cell, const MacroConfig& m) {
  Cost total = fixed_cost(m);
  std::uint64_t h = static_cast<std::uint64_t>(m.input_h), w = static_cast<std::uint64_t>(m.input_w);
  for (std::size_t s = 0; s < m.stages.size(); ++s) {
    if (s > 0) {
      h /= 2;
      w /= 2;
    }
    total += static_cast<std::uint64_t>(m.stages[s].cells) *
             cell_cost(cell, m.formulas, static_cast<std::uint64_t>(m.stages[s].width), h, w);
  }
  return total;
}

inline std::uint64_t count_params(const EdgeOpCell& cell, const MacroConfig& m) { return network_cost(cell, m).params; }
inline std::uint64_t count_flops(const EdgeOpCell& cell, const MacroConfig& m) { return network_cost(cell, m).flops; }

inline MacroConfig macro_from_json(const nlohmann::json& j) {
  try {
    MacroConfig m;
    m.input_h = j.value("input_h", 32);
    m.input_w = j.value("input_w", 32);
    m.input_channels = j.value("input_channels", 3);
    m.stem_channels = j.value("stem_channels", 16);
    m.num_classes = j.value("num_classes", 10);
    for (const auto& s : j.at("stages")) m.stages.push_back({s.at("width").get<int>(), s.at("cells").get<int>()});
    if (j.contains("custom_ops")) {
      for (const auto& [name, spec] : j.at("custom_ops").items()) {
        const auto kind = spec.at("kind").get<std::string>();
        OpFormula f;
        f.kernel = spec.value("kernel", 1);
        if (kind == "conv") f.kind = OpFormula::Kind::kConv;
        else if (kind == "pool") f.kind = OpFormula::Kind::kPool;
        else if (kind == "identity") f.kind = OpFormula::Kind::kIdentity;
        else if (kind == "zero") f.kind = OpFormula::Kind::kZero;
        else throw ValidationError("unknown layer kind '" + kind + "' for '" + name + "'");
        m.formulas.add(name, f);
      }
    }
    m.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad macro config: ") + e.what());
  }
}

inline MacroConfig load_macro(const std::string& name_or_path) {
  if (name_or_path == "nb201") return MacroConfig::nb201();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(detail::read_file(name_or_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("macro config '" + name_or_path + "' is not valid JSON: " + e.what());
  }
  return macro_from_json(j);
}

}  // namespace nasgraph
