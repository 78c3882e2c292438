#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "nasgraph.hpp"
#include "support/oracles.hpp"
#include "support/process.hpp"
#include "support/tempdir.hpp"

using namespace nasgraph;
using nlohmann::json;
using testing_support::run_program;
using testing_support::slurp;
using testing_support::spit;
using testing_support::TempDir;

namespace {

testing_support::RunResult cli(const std::vector<std::string>& args) { return run_program(NASGRAPH_CLI_PATH, args); }

json read_json(const std::string& path) { return json::parse(slurp(path)); }

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

// Trains a small model on the toy dataset into dir/name.
std::string train_toy(TempDir& dir, const std::string& name, const std::vector<std::string>& extra = {}) {
  if (!std::filesystem::exists(dir.file("toy.jsonl"))) spit(dir.file("toy.jsonl"), oracle::toy_dataset_jsonl());
  std::vector<std::string> args{"--seed", "3", "--out", dir.file(name), "train", "--dataset", dir.file("toy.jsonl"),
                                "--table", "hash:8", "--epochs", "60"};
  args.insert(args.end(), extra.begin(), extra.end());
  const auto r = cli(args);
  EXPECT_EQ(r.exit_code, 0) << r.output;
  return dir.file(name);
}

}  // namespace

TEST(CliIngest, CountsRecordsAndWritesCanonicalForm) {
  TempDir dir;
  spit(dir.file("in.jsonl"),
       R"({"id": "a", "cells": ["|nor_conv_3x3~0|+|skip_connect~0|none~1|"], "label": 0.5})"
       "\n"
       R"({"id": "b", "cells": [{"node_ops": ["input", "nor_conv_1x1", "output"], "adjacency": [[0,1,0],[0,0,1],[0,0,0]]}]})"
       "\n"
       R"({"id": "c", "cells": ["|avg_pool_3x3~0|+|none~0|skip_connect~1|"], "label": 0.25})"
       "\n");
  const auto r = cli({"--out", dir.file("o"), "ingest", dir.file("in.jsonl")});
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const auto s = read_json(dir.file("o/ingest_summary.json"));
  EXPECT_EQ(s["records"], 3);
  EXPECT_EQ(s["from_arch_strings"], 2);
  EXPECT_EQ(s["from_explicit_graphs"], 1);
  EXPECT_EQ(s["labelled"], 2);
  EXPECT_EQ(s["label_min"], 0.25);
  const auto canonical = load_dataset(dir.file("o/dataset.jsonl"));
  EXPECT_EQ(canonical.size(), 3u);
  EXPECT_EQ(canonical.from_explicit, 3u);
}

TEST(CliIngest, CyclicRecordNamesLine) {
  TempDir dir;
  spit(dir.file("in.jsonl"),
       R"({"id": "a", "cells": ["|nor_conv_3x3~0|+|skip_connect~0|none~1|"]})"
       "\n"
       R"({"id": "b", "cells": [{"node_ops": ["input", "x", "y", "output"], "adjacency": [[0,1,0,0],[0,0,1,0],[0,1,0,1],[0,0,0,0]]}]})"
       "\n");
  const auto r = cli({"--out", dir.file("o"), "ingest", dir.file("in.jsonl")});
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.output.find("line 2"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("cycle"), std::string::npos) << r.output;
}

TEST(CliTrain, ReportsHeldOutRankMetrics) {
  TempDir dir;
  const auto out = train_toy(dir, "t");
  const auto rep = read_json(out + "/train_report.json");
  EXPECT_EQ(rep["labelled"], 27);
  EXPECT_EQ(rep["train_size"], 22);  // ceil(0.8 * 27)
  EXPECT_EQ(rep["held_out_size"], 5);
  EXPECT_TRUE(rep["held_out"]["kendall_tau"].is_number());
  EXPECT_TRUE(rep["held_out"]["spearman_rho"].is_number());
  EXPECT_EQ(rep["loss_history"].size(), 60u);
  EXPECT_LT(rep["final_loss"].get<double>(), rep["initial_loss"].get<double>());
  EXPECT_NO_THROW(load_model(out + "/model.json"));
}

TEST(CliTrain, TinySplitKeepsOneTrainingArch) {
  TempDir dir;
  const auto rep = read_json(train_toy(dir, "t", {"--split", "0.01"}) + "/train_report.json");
  EXPECT_EQ(rep["train_size"], 1);
  EXPECT_EQ(rep["held_out_size"], 26);
}

TEST(CliTrain, SameSeedSameModelAndConfigReplay) {
  TempDir dir;
  const auto a = train_toy(dir, "a");
  const auto b = train_toy(dir, "b");
  EXPECT_EQ(slurp(a + "/model.json"), slurp(b + "/model.json"));
  const auto r = cli({"--config", a + "/resolved_config.json", "--out", dir.file("c"), "train"});
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(slurp(a + "/model.json"), slurp(dir.file("c/model.json")));
}

TEST(CliTrain, DivergenceExitsThree) {
  TempDir dir;
  spit(dir.file("toy.jsonl"), oracle::toy_dataset_jsonl());
  const auto r = cli({"--out", dir.file("o"), "train", "--dataset", dir.file("toy.jsonl"), "--table", "hash:8",
                      "--learning-rate", "1e12", "--epochs", "50"});
  EXPECT_EQ(r.exit_code, 3) << r.output;
}

TEST(CliSearch, Nb201ProducesValidArchitecture) {
  TempDir dir;
  const auto model = train_toy(dir, "t") + "/model.json";
  const auto r = cli({"--out", dir.file("s"), "search", "--model", model, "--table", "hash:8", "--space", "nb201",
                      "--population", "10", "--generations", "5"});
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const auto rep = read_json(dir.file("s/search_report.json"));
  const auto cell = parse_arch_string(rep["best_arch"].get<std::string>());
  EXPECT_EQ(cell.num_nodes, 4);
  EXPECT_EQ(cell.edge_ops.size(), 6u);
  EXPECT_EQ(rep["prune"]["inferences"], 88);
  EXPECT_TRUE(rep.contains("evo"));
  const auto trace = read_json(dir.file("s/prune_trace.json"));
  EXPECT_FALSE(trace.empty());
}

TEST(CliSearch, SingleModeFlags) {
  TempDir dir;
  const auto model = train_toy(dir, "t") + "/model.json";
  ASSERT_EQ(cli({"--out", dir.file("p"), "search", "--model", model, "--table", "hash:8", "--prune-only"}).exit_code,
            0);
  const auto p = read_json(dir.file("p/search_report.json"));
  EXPECT_TRUE(p.contains("prune"));
  EXPECT_FALSE(p.contains("evo"));
  ASSERT_EQ(cli({"--out", dir.file("e"), "search", "--model", model, "--table", "hash:8", "--evo-only",
                 "--population", "10", "--generations", "3"})
                .exit_code,
            0);
  const auto e = read_json(dir.file("e/search_report.json"));
  EXPECT_FALSE(e.contains("prune"));
  EXPECT_TRUE(e.contains("evo"));
  EXPECT_FALSE(std::filesystem::exists(dir.file("e/prune_trace.json")));
  EXPECT_EQ(cli({"--out", dir.file("x"), "search", "--model", model, "--table", "hash:8", "--prune-only",
                 "--evo-only"})
                .exit_code,
            2);
}

TEST(CliSearch, ToySpaceMatchesBruteForceArgmax) {
  TempDir dir;
  const auto model_path = train_toy(dir, "t") + "/model.json";
  const auto r = cli({"--out", dir.file("s"), "search", "--model", model_path, "--table", "hash:8", "--space",
                      "toy27", "--population", "20", "--generations", "50"});
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const auto rep = read_json(dir.file("s/search_report.json"));

  const auto space = toy_space();
  const auto table = fallback_table(space.vocabulary(), 8);
  const auto model = load_model(model_path);
  const GcnScorer scorer(model, table);
  const auto all = oracle::enumerate_scores(space, scorer);
  EXPECT_DOUBLE_EQ(rep["best_score"].get<double>(), all.scores[all.argmax]);
}

TEST(CliCorrelate, SelfTruthAndCostCoupling) {
  TempDir dir;
  const auto model = train_toy(dir, "t") + "/model.json";
  ASSERT_EQ(cli({"--out", dir.file("c"), "correlate", "--model", model, "--table", "hash:8", "--sample-size", "400"})
                .exit_code,
            0);
  const auto summary = read_json(dir.file("c/correlation_summary.json"));
  EXPECT_EQ(summary["sample_size"], 400);
  EXPECT_EQ(summary["n"], 400);
  EXPECT_GT(summary["params_flops_rho"].get<double>(), 0.9);

  // Feed the tool's own score back as an external column and ground truth.
  auto rows = read_csv(dir.file("c/scores.csv"));
  ASSERT_EQ(rows[0][1], "tg_score");
  std::string csv = "arch_id,copy\n";
  for (std::size_t i = 1; i < rows.size(); ++i) csv += rows[i][0] + "," + rows[i][1] + "\n";
  spit(dir.file("self.csv"), csv);
  const auto r = cli({"--out", dir.file("d"), "correlate", "--model", model, "--table", "hash:8", "--scores",
                      dir.file("self.csv"), "--truth", "copy"});
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const auto s2 = read_json(dir.file("d/correlation_summary.json"));
  bool found = false;
  for (const auto& row : s2["vs_truth"])
    if (row["proxy"] == "tg_score") {
      found = true;
      EXPECT_DOUBLE_EQ(row["kendall_tau"].get<double>(), 1.0);
      EXPECT_DOUBLE_EQ(row["spearman_rho"].get<double>(), 1.0);
    }
  EXPECT_TRUE(found) << s2.dump();
  EXPECT_TRUE(std::filesystem::exists(dir.file("d/truth_table.csv")));
}

TEST(CliCorrelate, DefaultSampleSizeAndRerunIdentical) {
  TempDir dir;
  ASSERT_EQ(cli({"--out", dir.file("a"), "correlate"}).exit_code, 0);
  ASSERT_EQ(cli({"--out", dir.file("b"), "correlate"}).exit_code, 0);
  const auto s = read_json(dir.file("a/correlation_summary.json"));
  EXPECT_EQ(s["sample_size"], 1000);
  EXPECT_EQ(s["n"], 1000);
  EXPECT_EQ(s["flops_convention"], "one multiply-accumulate counted as one FLOP");
  for (const char* f : {"correlation_matrix.csv", "scores.csv", "correlation_summary.json"})
    EXPECT_EQ(slurp(dir.file(std::string("a/") + f)), slurp(dir.file(std::string("b/") + f))) << f;
}

TEST(CliCount, ReferenceCellAnchors) {
  TempDir dir;
  const auto f = cli({"--out", dir.file("o"), "flops", "--arch", oracle::kNb201BestCell});
  ASSERT_EQ(f.exit_code, 0) << f.output;
  EXPECT_NE(f.output.find("multiply-accumulate"), std::string::npos);
  auto rows = read_csv(dir.file("o/flops.csv"));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1][1], "153301632");
  ASSERT_EQ(cli({"--out", dir.file("o"), "params", "--arch", oracle::kNb201BestCell}).exit_code, 0);
  rows = read_csv(dir.file("o/params.csv"));
  EXPECT_EQ(rows[1][1], "1073466");
}

TEST(CliErrors, ExitCodes) {
  TempDir dir;
  EXPECT_EQ(cli({"--out", dir.file("o"), "ingest", dir.file("missing.jsonl")}).exit_code, 2);
  EXPECT_EQ(cli({"--out", dir.file("o"), "flops", "--arch", "|warp_drive~0|+|none~0|none~1|+|none~0|none~1|none~2|"})
                .exit_code,
            2);
  EXPECT_EQ(cli({"--out", dir.file("o"), "bogus-command"}).exit_code, 2);
  EXPECT_EQ(cli({"--help"}).exit_code, 0);
  const auto model = train_toy(dir, "t") + "/model.json";
  EXPECT_EQ(cli({"--out", dir.file("o"), "search", "--model", model, "--table", "hash:16"}).exit_code, 2);
}

TEST(CliEmbedInfo, ExporterTableAndPca) {
  TempDir dir;
  const std::string table = NASGRAPH_TEST_DATA_DIR "/exporter_table_384.json";
  const auto r = cli({"--out", dir.file("o"), "embed-info", "--table", table, "--pca", "4"});
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(load_table(table).dim(), 384);
  const auto info = read_json(dir.file("o/embed_info.json"));
  EXPECT_EQ(info["dim"], 4);
  const auto reduced = load_table(dir.file("o/table_pca4.json"));
  EXPECT_EQ(reduced.dim(), 4);
  EXPECT_EQ(reduced.meta().pca_from, 384);
}
