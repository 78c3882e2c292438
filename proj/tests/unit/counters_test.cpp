#include <gtest/gtest.h>

#include <random>

#include "nasgraph.hpp"
#include "support/oracles.hpp"
#include "support/tempdir.hpp"

using namespace nasgraph;

namespace {

EdgeOpCell uniform_cell(const std::string& op) {
  EdgeOpCell c{4, 1, {}};
  for (const auto& e : complete_edges(4, 1)) c.edge_ops[e] = op;
  return c;
}

// NB201 macro network without cells, layer by layer:
//   stem   conv3x3 3->16 + BN at 32x32
//   red 1  conv3x3 16->32 + BN, conv3x3 32->32 + BN, avgpool2 on 16 ch, conv1x1 16->32, all at 16x16
//   red 2  same pattern 32->64 at 8x8
//   head   BN(64), global pool over 8x8, linear 64->10
constexpr std::uint64_t kFixedParams = (27 * 16 + 32) + (144 * 32 + 64) + (288 * 32 + 64) + 16 * 32 +
                                       (288 * 64 + 128) + (576 * 64 + 128) + 32 * 64 + 128 + (640 + 10);
constexpr std::uint64_t kFixedFlops = 27 * 16 * 1024 + 144 * 32 * 256 + 288 * 32 * 256 + 4 * 16 * 256 +
                                      16 * 32 * 256 + 288 * 64 * 64 + 576 * 64 * 64 + 4 * 32 * 64 +
                                      32 * 64 * 64 + 64 * 64 + 640;

}  // namespace

TEST(Counters, SingleConvParams) {
  const auto c = op_cost({OpFormula::Kind::kConv, 3}, 16, 32, 32);
  EXPECT_EQ(c.params, 2336u);
  EXPECT_EQ(c.flops, 9u * 16 * 16 * 32 * 32);
  EXPECT_EQ(op_cost({OpFormula::Kind::kPool, 3}, 16, 32, 32), (Cost{0, 9u * 16 * 1024}));
  EXPECT_EQ(op_cost({OpFormula::Kind::kIdentity, 1}, 16, 32, 32), Cost{});
  EXPECT_EQ(op_cost({OpFormula::Kind::kZero, 1}, 16, 32, 32), Cost{});
}

TEST(Counters, AllNoneIsClosedForm) {
  const auto m = MacroConfig::nb201();
  EXPECT_EQ(kFixedParams, 73306u);
  EXPECT_EQ(count_params(uniform_cell("none"), m), kFixedParams);
  EXPECT_EQ(count_flops(uniform_cell("none"), m), kFixedFlops);
  EXPECT_EQ(network_cost(uniform_cell("skip_connect"), m), (Cost{kFixedParams, kFixedFlops}));
}

TEST(Counters, Nb201ReferenceAnchors) {
  const auto m = MacroConfig::nb201();
  const auto cell = parse_arch_string(oracle::kNb201BestCell);
  const double params = static_cast<double>(count_params(cell, m));
  const double flops = static_cast<double>(count_flops(cell, m));
  EXPECT_NEAR(params / 1.073e6, 1.0, 0.02) << params;
  EXPECT_NEAR(flops / 153.27e6, 1.0, 0.02) << flops;
  // Exact value from the per-stage sums: 15 cells' worth of 4 conv3x3 + 1 conv1x1.
  std::uint64_t cells = 0;
  for (std::uint64_t c : {16u, 32u, 64u}) cells += 5 * (4 * (9 * c * c + 2 * c) + (c * c + 2 * c));
  EXPECT_EQ(count_params(cell, m), kFixedParams + cells);
}

TEST(Counters, ChannelDoublingQuadruplesConvMacs) {
  auto m = MacroConfig::nb201();
  auto wide = m;
  wide.stem_channels *= 2;
  for (auto& s : wide.stages) s.width *= 2;
  for (const char* op : {"nor_conv_3x3", "nor_conv_1x1"}) {
    const auto cell = uniform_cell(op);
    for (std::uint64_t c : {8u, 16u, 24u}) {
      EXPECT_EQ(cell_cost(cell, m.formulas, 2 * c, 8, 8).flops, 4 * cell_cost(cell, m.formulas, c, 8, 8).flops);
    }
    const auto base = count_flops(cell, m) - fixed_cost(m).flops;
    const auto doubled = count_flops(cell, wide) - fixed_cost(wide).flops;
    EXPECT_EQ(doubled, 4 * base) << op;
  }
}

TEST(Counters, AdditiveOverCellsAndEdges) {
  const auto m = MacroConfig::nb201();
  const auto fixed = fixed_cost(m);
  std::mt19937_64 rng(21);
  for (int t = 0; t < 50; ++t) {
    const auto cell = oracle::random_cell(rng, 4, nb201_operators());
    Cost per_edge;
    for (const auto& [edge, op] : cell.edge_ops) {
      EdgeOpCell single{4, 1, {}};
      for (const auto& e : complete_edges(4, 1)) single.edge_ops[e] = "none";
      single.edge_ops[edge] = op;
      const auto c = network_cost(single, m);
      per_edge += Cost{c.params - fixed.params, c.flops - fixed.flops};
    }
    EXPECT_EQ(network_cost(cell, m), fixed + per_edge);
  }
  // Cell count scales the cell contribution linearly.
  auto more = m;
  for (auto& s : more.stages) s.cells *= 3;
  const auto cell = parse_arch_string(oracle::kNb201BestCell);
  const auto one = network_cost(cell, m);
  const auto three = network_cost(cell, more);
  EXPECT_EQ(three.params - fixed.params, 3 * (one.params - fixed.params));
  EXPECT_EQ(three.flops - fixed.flops, 3 * (one.flops - fixed.flops));
}

TEST(Counters, UnregisteredOperatorThrows) {
  const auto m = MacroConfig::nb201();
  EdgeOpCell cell = uniform_cell("none");
  cell.edge_ops[{0, 1}] = "mystery_op";
  try {
    count_params(cell, m);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("mystery_op"), std::string::npos);
  }
  EXPECT_THROW(count_flops(cell, m), ValidationError);
}

TEST(Counters, MacroValidation) {
  auto m = MacroConfig::nb201();
  m.stages.clear();
  EXPECT_THROW(m.validate(), ValidationError);
  m = MacroConfig::nb201();
  m.input_h = 0;
  EXPECT_THROW(m.validate(), ValidationError);
  m = MacroConfig::nb201();
  m.input_h = 30;  // 30 -> 15 -> odd at the second reduction
  EXPECT_THROW(m.validate(), ValidationError);
  m = MacroConfig::nb201();
  m.stem_channels = 8;
  EXPECT_THROW(m.validate(), ValidationError);
}

TEST(Counters, MacroJsonWithCustomOps) {
  const auto j = nlohmann::json::parse(R"({
    "input_h": 32, "input_w": 32, "stem_channels": 16,
    "stages": [{"width": 16, "cells": 5}, {"width": 32, "cells": 5}, {"width": 64, "cells": 5}],
    "custom_ops": {"conv_5x5": {"kind": "conv", "kernel": 5}, "max_pool_3x3": {"kind": "pool", "kernel": 3}}
  })");
  const auto m = macro_from_json(j);
  EXPECT_EQ(fixed_cost(m), fixed_cost(MacroConfig::nb201()));
  EdgeOpCell cell = uniform_cell("none");
  cell.edge_ops[{0, 1}] = "conv_5x5";
  std::uint64_t expected = kFixedParams;
  for (std::uint64_t c : {16u, 32u, 64u}) expected += 5 * (25 * c * c + 2 * c);
  EXPECT_EQ(count_params(cell, m), expected);

  EXPECT_THROW(macro_from_json(nlohmann::json::parse(R"({"stages": [{"width": 16, "cells": 1}],
      "custom_ops": {"x": {"kind": "warp"}}})")),
               ValidationError);
  EXPECT_THROW(macro_from_json(nlohmann::json::parse(R"({"stages": 3})")), ParseError);
  EXPECT_THROW(macro_from_json(nlohmann::json::parse(R"({"input_h": 32})")), ParseError);

  testing_support::TempDir dir;
  testing_support::spit(dir.file("macro.json"), j.dump());
  EXPECT_EQ(fixed_cost(load_macro(dir.file("macro.json"))), fixed_cost(m));
  testing_support::spit(dir.file("bad.json"), "{");
  EXPECT_THROW(load_macro(dir.file("bad.json")), ParseError);
  EXPECT_THROW(load_macro(dir.file("missing.json")), IoError);
}
