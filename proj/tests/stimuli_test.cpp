// Copyright 2026 The wugbench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "wugbench/stimuli.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "wugbench/error.hpp"

namespace wugbench {
namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kBatteryPath = WUGBENCH_DATA_DIR "/battery.json";

const char* kOneEntry = R"([{
  "id": "x", "name": "X", "levin_label": "1-1",
  "frame_a": {"label": "X.1", "items": ["the", "[MASK]", "will", "[V]"], "tense": "future-will"},
  "frame_b": {"label": "X.2", "items": ["the", "[MASK]", "will", "[V]", "the", "[MASK]"],
              "tense": "future-will"},
  "inclass_verbs": ["broke"], "distractor_verbs": ["cut"]}])";

std::string with(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return text.replace(pos, from.size(), to);
}

TEST(Battery, ShippedFileHas28ValidEntries) {
  const auto battery = load_battery_file(kBatteryPath);
  ASSERT_EQ(battery.size(), 28u);
  std::set<std::string> ids;
  for (const auto& s : battery) {
    EXPECT_TRUE(ids.insert(s.id).second);
    EXPECT_NO_THROW(validate_spec(s));
  }
}

TEST(Battery, DativeFrame) {
  const auto battery = load_battery_file(kBatteryPath);
  const auto& dative = battery[spec_index(battery, "dative")];
  EXPECT_EQ(dative.name, "Dative");
  std::vector<std::string> items;
  for (const auto& it : dative.frame_a.items) items.push_back(it.encoded());
  EXPECT_EQ(items, (std::vector<std::string>{"the", "[MASK]", "will", "[V]", "a", "[MASK]", "to",
                                             "the", "[MASK]"}));
  EXPECT_EQ(render(dative.frame_a, "V7.1").str(), "the [MASK] will V7.1 a [MASK] to the [MASK]");
}

TEST(Battery, RoundTripIsByteExact) {
  const std::string text = read_file(kBatteryPath);
  EXPECT_EQ(serialize_battery(load_battery(text)), text);
  const auto again = load_battery(serialize_battery(load_battery(kOneEntry)));
  EXPECT_EQ(serialize_battery(again), serialize_battery(load_battery(kOneEntry)));
}

TEST(Battery, EmptyArray) { EXPECT_TRUE(load_battery("[]").empty()); }

TEST(Battery, ErrorsNameTheEntry) {
  auto expect_error = [](const std::string& text, const std::string& needle) {
    try {
      load_battery(text);
      ADD_FAILURE() << "no error for " << needle;
    } catch (const InputError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  const std::string one = kOneEntry;
  const std::string body = one.substr(1, one.size() - 2);
  expect_error("[" + body + "," + body + "]", "'x'");  // duplicate id
  expect_error(with(one, R"(["broke"])", "[]"), "'x'");
  expect_error(with(one, R"("will", "[V]"])", R"("[V]", "[V]"])"), "'x'");
  expect_error(with(one, R"("will", "[V]"])", R"("will"])"), "'x'");
  expect_error(with(one, R"("name": "X")", R"("nme": "X")"), "'x'");
  expect_error(with(one, R"(["cut"])", R"(["broke"])"), "'x'");
  expect_error(with(one, R"("tense": "future-will"},)", R"("tense": "past-ed"},)"), "'x'");
  EXPECT_THROW(load_battery("{"), InputError);
  EXPECT_THROW(load_battery("{}"), InputError);
}

TEST(Render, Examples) {
  const auto battery = load_battery_file(kBatteryPath);
  const auto& rec = battery[spec_index(battery, "understood_reciprocal_object")];
  EXPECT_EQ(render(rec.frame_b, "V4.2").str(), "the [MASK] and the [MASK] will V4.2");
  const auto seq = render(battery[0].frame_a, "dax");
  EXPECT_EQ(seq.masked_positions, (std::vector<std::size_t>{1, 5}));
  for (std::size_t p : seq.masked_positions) EXPECT_EQ(seq.tokens[p], kMaskToken);

  FrameTemplate bare{"B", {TemplateItem::function("the"), TemplateItem::novel()}, Tense::kPresent};
  EXPECT_TRUE(render(bare, "dax").masked_positions.empty());
}

TEST(Render, NameCollisions) {
  const auto battery = load_battery_file(kBatteryPath);
  Vocabulary v;
  for (const char* w : {"[MASK]", "[CLS]", "[SEP]", "[UNK]", "the", "will", "dog"}) v.add(w);
  EXPECT_THROW(render(battery[0].frame_a, "dog", &v), InputError);
  EXPECT_THROW(render(battery[0].frame_a, "[MASK]"), InputError);
  EXPECT_THROW(render(battery[0].frame_a, ""), UsageError);
  EXPECT_NO_THROW(render(battery[0].frame_a, "wug", &v));
}

TEST(Render, NovelNameOccursOnce) {
  for (const auto& s : load_battery_file(kBatteryPath)) {
    for (auto side : {FrameSide::kA, FrameSide::kB}) {
      const auto seq = render(s.frame(side), "wug");
      EXPECT_EQ(std::count(seq.tokens.begin(), seq.tokens.end(), "wug"), 1);
    }
  }
}

TEST(OutClassFrames, IndependentScanOverShippedBattery) {
  const auto battery = load_battery_file(kBatteryPath);
  std::size_t total = 0;
  for (const auto& spec : battery) {
    for (auto side : {FrameSide::kA, FrameSide::kB}) {
      // Oracle: every frame of every other entry whose surface differs from
      // both of spec's frames.
      std::vector<std::string> expected;
      for (const auto& other : battery) {
        if (other.id == spec.id) continue;
        for (const auto* f : {&other.frame_a, &other.frame_b}) {
          if (f->surface() != spec.frame_a.surface() && f->surface() != spec.frame_b.surface())
            expected.push_back(f->label);
        }
      }
      std::vector<std::string> got;
      for (const auto& f : out_class_frames(battery, spec.id, side)) {
        got.push_back(f.label);
        EXPECT_NE(f.items, spec.frame_a.items);
        EXPECT_NE(f.items, spec.frame_b.items);
      }
      EXPECT_EQ(got, expected) << spec.id;
      EXPECT_LE(got.size(), 54u);
      total += got.size();
    }
  }
  // Surface duplicates exist in the shipped battery, so pruning bites.
  EXPECT_LT(total, 28u * 2u * 54u);
}

TEST(OutClassFrames, SmallCases) {
  auto one = load_battery(kOneEntry);
  EXPECT_TRUE(out_class_frames(one, "x", FrameSide::kA).empty());
  EXPECT_THROW(out_class_frames(one, "missing", FrameSide::kA), InputError);

  // A second entry whose frame_a duplicates x's sister frame is pruned.
  auto two = one;
  two.push_back(one[0]);
  two[1].id = "y";
  two[1].frame_a = parse_frame("Y.1", "the [MASK] will [V] the [MASK]", Tense::kFutureWill);
  two[1].frame_b = parse_frame("Y.2", "the [MASK] will [V] to the [MASK]", Tense::kFutureWill);
  const auto frames = out_class_frames(two, "x", FrameSide::kA);
  ASSERT_EQ(frames.size(), 1u);
  EXPECT_EQ(frames[0].label, "Y.2");
}

TEST(Selectional, ConditionSizes) {
  const auto net = default_selectional_network();
  EXPECT_EQ(net.pairs(SelectionalCondition::kAttestedIn).size(), 12u);
  EXPECT_EQ(net.pairs(SelectionalCondition::kUnattestedIn).size(), 6u);
  EXPECT_EQ(net.pairs(SelectionalCondition::kUnattestedOut).size(), 18u);
  EXPECT_EQ(selectional_sentences(net, SelectionalCondition::kAttestedIn).size(), 12u);
  EXPECT_EQ(selectional_sentences(net, SelectionalCondition::kUnattestedIn).size(), 6u);
  EXPECT_EQ(selectional_sentences(net, SelectionalCondition::kUnattestedOut).size(), 18u);
}

TEST(Selectional, ConditionsPartitionAllPairs) {
  const auto net = default_selectional_network();
  std::set<std::pair<std::string, std::string>> all;
  std::size_t count = 0;
  for (auto c : kSelectionalConditions) {
    for (const auto& p : net.pairs(c)) {
      all.insert(p);
      ++count;
    }
  }
  EXPECT_EQ(count, 36u);
  EXPECT_EQ(all.size(), 36u);
}

TEST(Selectional, NetworkInvariants) {
  const auto net = default_selectional_network();
  ASSERT_EQ(net.verbs.size(), 6u);
  ASSERT_EQ(net.nouns.size(), 6u);
  std::map<std::string, int> degree;
  for (const auto& [v, n] : net.attested) {
    EXPECT_EQ(net.class_of.at(v), net.class_of.at(n));
    ++degree[v];
    ++degree[n];
  }
  for (const auto& w : net.verbs) EXPECT_EQ(degree[w], 2);
  for (const auto& w : net.nouns) EXPECT_EQ(degree[w], 2);
  auto broken = net;
  broken.attested.erase(broken.attested.begin());
  EXPECT_THROW(validate_network(broken), InputError);
}

TEST(Selectional, SentenceShape) {
  const auto net = default_selectional_network();
  for (const auto& s : selectional_sentences(net, SelectionalCondition::kAttestedIn)) {
    ASSERT_EQ(s.tokens.size(), 5u);
    EXPECT_EQ(s.tokens[0], "the");
    EXPECT_EQ(s.tokens[1], kMaskToken);
    EXPECT_EQ(s.tokens[3], "the");
    EXPECT_EQ(s.masked_positions, (std::vector<std::size_t>{1}));
    EXPECT_EQ(net.class_of.count(s.tokens[kSelectionalVerbPosition]), 1u);
    EXPECT_EQ(net.class_of.count(s.tokens[kSelectionalNounPosition]), 1u);
  }
}

TEST(FrameSideParsing, Values) {
  EXPECT_EQ(frame_side_from_string("a"), FrameSide::kA);
  EXPECT_EQ(sister(FrameSide::kA), FrameSide::kB);
  EXPECT_THROW(frame_side_from_string("c"), UsageError);
}

}  // namespace
}  // namespace wugbench
