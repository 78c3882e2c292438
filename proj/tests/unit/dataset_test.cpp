#include <gtest/gtest.h>

#include "nasgraph.hpp"
#include "support/tempdir.hpp"

using namespace nasgraph;

namespace {

const char* kMixed =
    R"({"id": "s1", "cells": ["|nor_conv_3x3~0|+|skip_connect~0|none~1|"], "label": 0.9, "aux": {"c10": 90, "c100": 70}})"
    "\n"
    R"({"id": "e1", "cells": [{"node_ops": ["input", "nor_conv_1x1", "output"], "adjacency": [[0,1,0],[0,0,1],[0,0,0]]}], "label": null, "aux": {"c10": 94, "c100": 60}})"
    "\n\n"
    R"({"id": "s2", "cells": ["|avg_pool_3x3~0|+|none~0|skip_connect~1|"], "aux": {"c10": 92}})"
    "\n";

}  // namespace

TEST(Dataset, MixedFormats) {
  const auto ds = parse_dataset(kMixed);
  ASSERT_EQ(ds.size(), 3u);
  EXPECT_EQ(ds.from_strings, 2u);
  EXPECT_EQ(ds.from_explicit, 1u);
  EXPECT_EQ(ds.records[0].cells[0],
            edge_to_node_transform(parse_arch_string("|nor_conv_3x3~0|+|skip_connect~0|none~1|")));
  EXPECT_EQ(ds.records[1].cells[0].node_ops, (std::vector<std::string>{"input", "nor_conv_1x1", "output"}));
  EXPECT_EQ(ds.records[0].label, 0.9);
  EXPECT_FALSE(ds.records[1].label.has_value());
  EXPECT_FALSE(ds.records[2].label.has_value());
  const auto vocab = ds.vocabulary();
  EXPECT_TRUE(std::find(vocab.begin(), vocab.end(), "avg_pool_3x3") != vocab.end());
  EXPECT_TRUE(std::find(vocab.begin(), vocab.end(), "output") != vocab.end());
}

TEST(Dataset, CanonicalRoundTrip) {
  const auto ds = parse_dataset(kMixed);
  const auto text = to_jsonl(ds);
  const auto back = parse_dataset(text);
  EXPECT_EQ(back.from_strings, 0u);
  EXPECT_EQ(back.from_explicit, 3u);
  ASSERT_EQ(back.size(), ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    EXPECT_EQ(back.records[i].id, ds.records[i].id);
    EXPECT_EQ(back.records[i].cells, ds.records[i].cells);
    EXPECT_EQ(back.records[i].label, ds.records[i].label);
    EXPECT_EQ(back.records[i].aux, ds.records[i].aux);
  }
  EXPECT_EQ(to_jsonl(back), text);
}

TEST(Dataset, CycleNamesLine) {
  const std::string text = std::string(kMixed) +
                           R"({"id": "bad", "cells": [{"node_ops": ["input", "a", "b", "output"], )"
                           R"("adjacency": [[0,1,0,0],[0,0,1,0],[0,1,0,1],[0,0,0,0]]}]})"
                           "\n";
  try {
    parse_dataset(text);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("line 5"), std::string::npos) << msg;
    EXPECT_NE(msg.find("cycle"), std::string::npos) << msg;
  }
}

TEST(Dataset, RejectsBadRecords) {
  EXPECT_THROW(parse_dataset(R"({"id": "a", "cells": ["|nor_conv_3x3~0|"]})"
                             "\n"
                             R"({"id": "a", "cells": ["|skip_connect~0|"]})"),
               ValidationError);
  try {
    parse_dataset("\n{\"id\": \"a\", \"cells\": [\"|nor_conv_3x3~0|\"]}\n{not json}\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_dataset(R"({"cells": ["|nor_conv_3x3~0|"]})"), ParseError);
  EXPECT_THROW(parse_dataset(R"({"id": "a", "cells": []})"), ParseError);
  EXPECT_THROW(parse_dataset(R"({"id": "a", "cells": ["|nor_conv_3x3~0|"], "label": "high"})"), ParseError);
  EXPECT_THROW(parse_dataset(R"({"id": "a", "cells": ["|nor_conv_3x3~0|"], "aux": [1]})"), ParseError);
  EXPECT_THROW(parse_dataset(R"([1, 2])"), ParseError);
  EXPECT_THROW(parse_dataset(R"({"id": "a", "cells": ["|nor_conv_3x3~1|"]})"), ValidationError);
  EXPECT_THROW(load_dataset("/nonexistent/data.jsonl"), IoError);
}

TEST(Dataset, SpaceConstrainsVocabularyAndCellCount) {
  const auto space = nb201_space();
  const std::string ok = R"({"id": "a", "cells": ["|nor_conv_3x3~0|+|none~0|none~1|+|skip_connect~0|none~1|none~2|"]})";
  EXPECT_EQ(parse_dataset(ok, &space).size(), 1u);
  EXPECT_THROW(parse_dataset(R"({"id": "a", "cells": ["|sep_conv_3x3~0|+|none~0|none~1|+|none~0|none~1|none~2|"]})",
                             &space),
               ValidationError);
  EXPECT_THROW(parse_dataset(R"({"id": "a", "cells": ["|skip_connect~0|", "|skip_connect~0|"]})", &space),
               ValidationError);
  const auto darts = darts_space();
  const std::string two =
      R"({"id": "d", "cells": ["|sep_conv_3x3~0|skip_connect~1|+|none~0|none~1|max_pool_3x3~2|+|none~0|none~1|none~2|none~3|+|none~0|none~1|none~2|none~3|none~4|",)"
      R"( "|avg_pool_3x3~0|none~1|+|none~0|none~1|none~2|+|none~0|none~1|none~2|none~3|+|none~0|none~1|none~2|none~3|dil_conv_5x5~4|"]})";
  const auto ds = parse_dataset(two, &darts);
  ASSERT_EQ(ds.records[0].cells.size(), 2u);
  EXPECT_EQ(ds.records[0].cells[0].node_ops.front(), "input0");
}

TEST(Dataset, ResolveLabels) {
  const auto ds = parse_dataset(kMixed);
  const auto own = resolve_labels(ds, {});
  EXPECT_EQ(own[0], 0.9);
  EXPECT_FALSE(own[1].has_value());
  // c10: 90, 94 -> 0, 1; c100: 70, 60 -> 1, 0; average -> 0.5, 0.5. s2 lacks c100.
  const auto combined = resolve_labels(ds, {"c10", "c100"});
  EXPECT_EQ(combined[0], 0.5);
  EXPECT_EQ(combined[1], 0.5);
  EXPECT_FALSE(combined[2].has_value());
  const auto single = resolve_labels(ds, {"c10"});
  EXPECT_EQ(single[0], 0.0);
  EXPECT_EQ(single[1], 1.0);
  EXPECT_EQ(single[2], 0.5);
  EXPECT_THROW(resolve_labels(ds, {"imagenet"}), ValidationError);
}

TEST(Dataset, LoadsFromFile) {
  testing_support::TempDir dir;
  testing_support::spit(dir.file("d.jsonl"), kMixed);
  EXPECT_EQ(load_dataset(dir.file("d.jsonl")).size(), 3u);
}
