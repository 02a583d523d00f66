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


#include "wugbench/report.hpp"

#include <gtest/gtest.h>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "wugbench/error.hpp"

namespace wugbench::report {
namespace {

namespace pt = boost::property_tree;

pt::ptree parse_svg(const std::string& svg) {
  std::istringstream in(svg);
  pt::ptree tree;
  pt::read_xml(in, tree);
  return tree;
}

std::vector<ChartBar> sample_bars() {
  return {{"V1.1", "Levin 1", 0.82, 0.76, 0.87},
          {"V1.2", "Levin 1", 0.25, 0.19, 0.31},
          {"V7.1", "Levin 2", 0.5, 0.43, 0.57},
          {"a<b&c", "Levin 3", 1.0, 0.98, 1.0},
          {"zero", "Levin 3", 0.0, 0.0, 0.02}};
}

TEST(Format, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 1.7763568394002489e-15, 12345.678, -2.5, 1e-300}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_EQ(format_double(-0.0), "0");
}

TEST(Digest, KnownVector) {
  EXPECT_EQ(sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(AtomicWrite, ReplacesContentAndLeavesNoTemp) {
  const auto dir = std::filesystem::path(::testing::TempDir()) / "wug_atomic";
  std::filesystem::create_directories(dir);
  const auto path = dir / "out.txt";
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  std::ifstream in(path);
  std::string s;
  std::getline(in, s);
  EXPECT_EQ(s, "second");
  EXPECT_FALSE(std::filesystem::exists(dir / "out.txt.tmp"));
  EXPECT_EQ(sha256_file(path), sha256_hex("second"));
  EXPECT_THROW(write_file_atomic(dir / "missing" / "x.txt", "x"), InputError);
  std::filesystem::remove_all(dir);
}

TEST(Csv, HeadersAreExact) {
  EXPECT_EQ(trials_csv("alternations", {}),
            "experiment,alternation_id,frame,seed,p_in,p_out_mean,correct\n");
  EXPECT_EQ(selectional_trials_csv({}),
            "seed,surprisal_attested_in,surprisal_unattested_in,surprisal_unattested_out,"
            "flag_ai_ui,flag_ai_uo,flag_ui_uo\n");
  EXPECT_EQ(summary_csv({}), "experiment,group,successes,n,proportion,ci_low,ci_high,p_value\n");
}

TEST(Csv, Rows) {
  AlternationTrial t{"dative", FrameSide::kB, 3, 0.25, 0.125, true};
  EXPECT_EQ(trials_csv("alternations", {t}),
            std::string(kTrialsHeader) + "\nalternations,dative,b,3,0.25,0.125,1\n");
  SelectionalTrial s{7, {1.5, 2.0, 2.5}, {true, false, true}};
  EXPECT_EQ(selectional_trials_csv({s}),
            std::string(kSelectionalTrialsHeader) + "\n7,1.5,2,2.5,1,0,1\n");
  AsymmetryRow a{"refl", FrameSide::kA, 1, 4, 0.25, -1.0, true};
  EXPECT_EQ(asymmetry_csv({a}), std::string(kAsymmetryHeader) + "\nrefl,a,1,4,0.25,NA,1\n");
}

TEST(Csv, SummaryRoundTrip) {
  std::vector<SummaryRow> rows = {{"alternations", "x:a", stats::summarize(41, 50)},
                                  {"alternations", "pooled", stats::summarize(100, 200)}};
  const auto text = summary_csv(rows);
  const auto back = parse_summary_csv(text);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(summary_csv(back), text);
  EXPECT_THROW(parse_summary_csv("bad,header\n"), InputError);
  EXPECT_THROW(parse_summary_csv(std::string(kSummaryHeader) + "\na,b,1\n"), InputError);
}

TEST(Chart, WellFormedAndGeometricallyFaithful) {
  const auto bars = sample_bars();
  const std::string svg = emit_chart(bars, {"Test chart", "accuracy", 1.0, true});
  const auto tree = parse_svg(svg);
  const auto& root = tree.get_child("svg");
  std::vector<double> values;
  std::vector<std::pair<double, double>> errs;
  std::optional<double> baseline_y;
  for (const auto& [tag, node] : root) {
    if (tag == "rect" && node.get<std::string>("<xmlattr>.class", "") == "bar") {
      const double h = node.get<double>("<xmlattr>.height");
      const double y = node.get<double>("<xmlattr>.y");
      EXPECT_NEAR(y + h, kPlotTop + kPlotHeight, 1e-6);
      values.push_back(h / kPlotHeight);
    }
    if (tag == "line" && node.get<std::string>("<xmlattr>.class", "") == "err") {
      auto to_value = [](double y) { return 1.0 - (y - kPlotTop) / kPlotHeight; };
      errs.emplace_back(to_value(node.get<double>("<xmlattr>.y1")),
                        to_value(node.get<double>("<xmlattr>.y2")));
    }
    if (tag == "line" && node.get<std::string>("<xmlattr>.class", "") == "baseline") {
      EXPECT_FALSE(node.get<std::string>("<xmlattr>.stroke-dasharray", "").empty());
      baseline_y = node.get<double>("<xmlattr>.y1");
    }
  }
  ASSERT_EQ(values.size(), bars.size());
  ASSERT_EQ(errs.size(), bars.size());
  for (std::size_t i = 0; i < bars.size(); ++i) {
    EXPECT_NEAR(values[i], bars[i].value, 1e-3);
    EXPECT_NEAR(errs[i].first, bars[i].err_low, 1e-3);
    EXPECT_NEAR(errs[i].second, bars[i].err_high, 1e-3);
  }
  ASSERT_TRUE(baseline_y.has_value());
  EXPECT_NEAR(*baseline_y, kPlotTop + 0.5 * kPlotHeight, 1e-6);
  EXPECT_NE(svg.find("a&lt;b&amp;c"), std::string::npos);
}

TEST(Chart, ColoursFollowCategories) {
  const std::string svg = emit_chart(sample_bars(), {});
  const auto root = parse_svg(svg).get_child("svg");
  std::vector<std::string> fills;
  for (const auto& [tag, node] : root)
    if (tag == "rect" && node.get<std::string>("<xmlattr>.class", "") == "bar")
      fills.push_back(node.get<std::string>("<xmlattr>.fill"));
  ASSERT_EQ(fills.size(), 5u);
  EXPECT_EQ(fills[0], fills[1]);
  EXPECT_NE(fills[1], fills[2]);
  EXPECT_EQ(fills[3], fills[4]);
  EXPECT_NE(fills[2], fills[3]);
}

TEST(Chart, AutoScaleWithoutBaselineAndErrors) {
  const std::vector<ChartBar> bars = {{"x", "c", 3.2, 3.0, 3.4}, {"y", "c", 1.1, 1.0, 1.2}};
  const std::string svg = emit_chart(bars, {"s", "nats", 0.0, false});
  EXPECT_NO_THROW(parse_svg(svg));
  EXPECT_EQ(svg.find("baseline"), std::string::npos);
  EXPECT_THROW(emit_chart({}, {}), UsageError);
  EXPECT_EQ(emit_chart(bars, {}), emit_chart(bars, {}));
}

}  // namespace
}  // namespace wugbench::report
