#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "commands.hpp"

namespace {

using nlohmann::json;

// Reads --config files as JSON: top-level keys are global options, nested
// objects are subcommand sections. Keys are long option names.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    try {
      j = json::parse(input);
    } catch (const json::parse_error& e) {
      throw CLI::ConversionError("config is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
    std::vector<CLI::ConfigItem> items;
    collect(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

  static void collect(const json& j, const std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        auto nested = parents;
        nested.push_back(key);
        collect(value, nested, items);
        continue;
      }
      // Empty values stand for "not given"; emitting them would trip the
      // file validators.
      if (value.is_null() || (value.is_string() && value.get<std::string>().empty()) ||
          (value.is_array() && value.empty()))
        continue;
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }
};

const CLI::Validator kTableSpec(
    [](std::string& s) -> std::string {
      if (s.rfind("hash:", 0) == 0) return {};
      return CLI::ExistingFile(s);
    },
    "TABLE|hash:DIM", "embedding table");

CLI::Validator preset_or_file(std::vector<std::string> presets) {
  return CLI::Validator(
      [presets](std::string& s) -> std::string {
        for (const auto& p : presets)
          if (s == p) return {};
        return CLI::ExistingFile(s);
      },
      "PRESET|FILE", "preset or file");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace nasgraph::cli;
  CLI::App app{"nasgraph: GCN-scored neural architecture search"};
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON config; command-line flags take precedence");
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.add_option("--out", g.out, "output directory")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::Range(1u, 1024u))->capture_default_str();

  const auto space_check = preset_or_file({"nb201", "toy27", "darts"});

  IngestOptions ingest;
  auto* c_ingest = app.add_subcommand("ingest", "validate a JSONL dataset and write its canonical form");
  c_ingest->add_option("input", ingest.input, "dataset file")->check(CLI::ExistingFile);
  c_ingest->add_option("--space", ingest.space, "space preset or descriptor for arch strings")->check(space_check);

  TrainOptions train;
  auto* c_train = app.add_subcommand("train", "train the GCN predictor");
  c_train->add_option("--dataset", train.dataset, "dataset file")->check(CLI::ExistingFile);
  c_train->add_option("--table", train.table, "embedding table file or hash:DIM")->check(kTableSpec);
  c_train->add_option("--space", train.space, "space preset or descriptor")->check(space_check);
  c_train->add_option("--split", train.split, "training fraction; train size = ceil(fraction * N)")
      ->capture_default_str();
  c_train->add_option("--epochs", train.cfg.epochs)->capture_default_str();
  c_train->add_option("--learning-rate", train.cfg.learning_rate)->capture_default_str();
  c_train->add_option("--weight-decay", train.cfg.weight_decay)->capture_default_str();
  c_train->add_option("--batch-size", train.cfg.batch_size)->capture_default_str();
  c_train->add_option("--hidden", train.cfg.hidden_dim, "hidden width")->capture_default_str();
  c_train->add_option("--label-columns", train.cfg.label_columns,
                      "aux columns min-max normalized and averaged into the label");

  PredictOptions predict;
  auto* c_predict = app.add_subcommand("predict", "score architectures with a trained model");
  c_predict->add_option("--model", predict.model)->check(CLI::ExistingFile);
  c_predict->add_option("--table", predict.table)->check(kTableSpec);
  c_predict->add_option("--dataset", predict.dataset)->check(CLI::ExistingFile);
  c_predict->add_option("--space", predict.space)->check(space_check);
  c_predict->add_option("--arch", predict.archs, "arch string; cells separated by ';'");

  SearchOptions search;
  auto* c_search = app.add_subcommand("search", "hybrid pruning + evolutionary search");
  c_search->add_option("--model", search.model)->check(CLI::ExistingFile);
  c_search->add_option("--table", search.table)->check(kTableSpec);
  c_search->add_option("--space", search.space)->check(space_check)->capture_default_str();
  c_search->add_option("--population", search.evo.population)->capture_default_str();
  c_search->add_option("--generations", search.evo.generations)->capture_default_str();
  c_search->add_option("--mutation", search.evo.mutation)->capture_default_str();
  c_search->add_option("--crossover", search.evo.crossover)->capture_default_str();
  c_search->add_flag("--prune-only", search.prune_only);
  c_search->add_flag("--evo-only", search.evo_only);

  CorrelateOptions correlate;
  auto* c_correlate = app.add_subcommand("correlate", "rank correlations between proxies");
  c_correlate->add_option("--model", correlate.model)->check(CLI::ExistingFile);
  c_correlate->add_option("--table", correlate.table)->check(kTableSpec);
  c_correlate->add_option("--space", correlate.space)->check(space_check)->capture_default_str();
  c_correlate->add_option("--macro", correlate.macro, "macro preset or file; defaults to the space's")
      ->check(preset_or_file({"nb201"}));
  c_correlate->add_option("--scores", correlate.scores, "CSV of external proxy scores")->check(CLI::ExistingFile);
  c_correlate->add_option("--truth", correlate.truth, "ground-truth column of the scores file");
  c_correlate->add_option("--sample-size", correlate.sample_size)->capture_default_str();

  CountOptions flops, params;
  auto add_count = [&](const char* name, const char* help, CountOptions& o) {
    auto* c = app.add_subcommand(name, help);
    c->add_option("--arch", o.archs);
    c->add_option("--dataset", o.dataset)->check(CLI::ExistingFile);
    c->add_option("--macro", o.macro)->check(preset_or_file({"nb201"}))->capture_default_str();
    c->add_option("--space", o.space)->check(space_check);
    return c;
  };
  auto* c_flops = add_count("flops", "analytic FLOPs (1 MAC = 1 FLOP)", flops);
  auto* c_params = add_count("params", "analytic parameter count", params);

  EmbedInfoOptions embed;
  auto* c_embed = app.add_subcommand("embed-info", "inspect an embedding table");
  c_embed->add_option("--table", embed.table)->check(kTableSpec);
  c_embed->add_option("--names", embed.names, "entries to compare");
  c_embed->add_option("--pca", embed.pca, "reduce to k dimensions and save the table")->capture_default_str();

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*c_ingest) cmd_ingest(g, ingest);
    if (*c_train) cmd_train(g, train);
    if (*c_predict) cmd_predict(g, predict);
    if (*c_search) cmd_search(g, search);
    if (*c_correlate) cmd_correlate(g, correlate);
    if (*c_flops) cmd_count(g, flops, "flops");
    if (*c_params) cmd_count(g, params, "params");
    if (*c_embed) cmd_embed_info(g, embed);
  } catch (const nasgraph::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const nasgraph::ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const nasgraph::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
