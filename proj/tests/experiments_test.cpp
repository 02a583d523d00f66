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


#include "wugbench/experiments.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <set>

#include "synth_fixture.hpp"
#include "wugbench/error.hpp"

namespace wugbench {
namespace {

using testing::synth_fixture;

TEST(DeriveSeed, StableAndFieldSensitive) {
  const auto base = derive_seed(7, "alternations", "dative", "a", 3);
  EXPECT_EQ(base, derive_seed(7, "alternations", "dative", "a", 3));
  std::set<std::uint64_t> seen = {base};
  seen.insert(derive_seed(8, "alternations", "dative", "a", 3));
  seen.insert(derive_seed(7, "probe", "dative", "a", 3));
  seen.insert(derive_seed(7, "alternations", "benefactive", "a", 3));
  seen.insert(derive_seed(7, "alternations", "dative", "b", 3));
  seen.insert(derive_seed(7, "alternations", "dative", "a", 4));
  EXPECT_EQ(seen.size(), 6u);
  EXPECT_NE(derive_seed(0, "ab", "c", "", 0), derive_seed(0, "a", "bc", "", 0));
}

TEST(Workers, EnvironmentCap) {
  ::setenv("WUGBENCH_THREADS", "2", 1);
  EXPECT_EQ(worker_count(8), 2u);
  EXPECT_EQ(worker_count(1), 1u);
  ::setenv("WUGBENCH_THREADS", "junk", 1);
  EXPECT_EQ(worker_count(8), 8u);
  ::unsetenv("WUGBENCH_THREADS");
  EXPECT_EQ(worker_count(5), 5u);
  EXPECT_GE(worker_count(0), 1u);
}

TEST(ParallelFor, CoversEveryIndexOnce) {
  for (std::size_t workers : {1, 3, 8}) {
    std::vector<std::atomic<int>> hits(100);
    parallel_for(100, workers, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
  parallel_for(0, 4, [](std::size_t) { FAIL(); });
}

TEST(ParallelFor, RethrowsLowestFailingIndex) {
  try {
    parallel_for(50, 1, [](std::size_t i) {
      if (i == 7 || i == 30) throw InputError("at " + std::to_string(i));
    });
    FAIL();
  } catch (const InputError& e) {
    EXPECT_STREQ(e.what(), "at 7");
  }
}

ExperimentOptions small_options(std::size_t threads) {
  ExperimentOptions o;
  o.seeds = 3;
  o.master_seed = 11;
  o.threads = threads;
  return o;
}

TEST(RunAlternations, ShapeAndWorkerIndependence) {
  const auto& f = synth_fixture();
  const auto battery = f.grammar.battery();
  const auto one = run_alternations(f.model, battery, small_options(1));
  const auto four = run_alternations(f.model, battery, small_options(4));
  EXPECT_EQ(one.trials.size(), battery.size() * 2 * 3);
  EXPECT_EQ(one.summary.size(), battery.size() * 2 + 1);
  EXPECT_EQ(one.summary.back().group, "pooled");
  EXPECT_EQ(one.asymmetry.size(), battery.size() * 2);
  EXPECT_EQ(report::trials_csv("alternations", one.trials),
            report::trials_csv("alternations", four.trials));
  EXPECT_EQ(report::summary_csv(one.summary), report::summary_csv(four.summary));
  EXPECT_EQ(one.chart, four.chart);
  for (std::size_t i = 0; i < one.trials.size(); ++i) EXPECT_EQ(one.trials[i].seed_index, i % 3);

  auto other = small_options(1);
  other.master_seed = 12;
  EXPECT_NE(report::trials_csv("alternations", run_alternations(f.model, battery, other).trials),
            report::trials_csv("alternations", one.trials));
}

TEST(RunAlternations, Validation) {
  const auto& f = synth_fixture();
  auto o = small_options(1);
  o.seeds = 0;
  EXPECT_THROW(run_alternations(f.model, f.grammar.battery(), o), UsageError);
  EXPECT_THROW(run_alternations(f.model, {}, small_options(1)), InputError);
}

TEST(RunAlternations, SingleSeedGivesZeroOrOne) {
  const auto& f = synth_fixture();
  auto o = small_options(1);
  o.seeds = 1;
  for (const auto& r : run_alternations(f.model, f.grammar.battery(), o).summary) {
    if (r.group != "pooled")
      EXPECT_TRUE(r.summary.proportion == 0.0 || r.summary.proportion == 1.0);
  }
}

TEST(RunSelectional, Shape) {
  const auto& f = synth_fixture();
  const auto run = run_selectional(f.model, default_selectional_network(), small_options(2));
  EXPECT_EQ(run.trials.size(), 3u);
  ASSERT_EQ(run.summary.size(), 3u);
  ASSERT_EQ(run.conditions.size(), 3u);
  EXPECT_EQ(run.conditions[0].n_sentences, 12u);
  EXPECT_EQ(run.conditions[1].n_sentences, 6u);
  EXPECT_EQ(run.conditions[2].n_sentences, 18u);
  EXPECT_EQ(run.summary[2].group, "ui_vs_uo");
  const auto again = run_selectional(f.model, default_selectional_network(), small_options(1));
  EXPECT_EQ(report::selectional_trials_csv(run.trials),
            report::selectional_trials_csv(again.trials));
}

TEST(RunProbe, BothSourcesAndCorrelation) {
  const auto& f = synth_fixture();
  const auto battery = f.grammar.battery();
  const auto d = run_probe(f.model, battery, {}, small_options(2));
  EXPECT_EQ(d.trials.size(), battery.size() * 2 * 3);
  EXPECT_EQ(d.trials[0].outclass, "distractor");
  OutClassSource list{OutClassSource::Kind::kWordList, f.grammar.filler_verbs()};
  const auto w = run_probe(f.model, battery, list, small_options(2));
  EXPECT_EQ(w.trials[0].outclass, "wordlist");

  // Self-correlation is 1 whenever the column is not constant.
  std::vector<report::SummaryRow> rows;
  for (std::size_t k = 0; k < 4; ++k)
    rows.push_back({"x", "g" + std::to_string(k), stats::summarize(k, 5)});
  rows.push_back({"x", "pooled", stats::summarize(6, 20)});
  const auto corr = correlate_summaries(rows, rows);
  ASSERT_EQ(corr.size(), 2u);
  EXPECT_NEAR(corr[0].value, 1.0, 1e-12);
  EXPECT_EQ(corr[0].n, 4u);
  EXPECT_NEAR(corr[1].value, 1.0, 1e-12);
  std::vector<report::SummaryRow> flat(rows.begin(), rows.begin() + 1);
  EXPECT_FALSE(correlate_summaries(flat, flat)[0].defined);
}

TEST(WriteOutputs, AllOrNothing) {
  const auto dir = std::filesystem::path(::testing::TempDir()) / "wug_outputs";
  std::filesystem::remove_all(dir);
  write_outputs(dir, {{"a.csv", "1\n"}, {"b.csv", "2\n"}});
  EXPECT_TRUE(std::filesystem::exists(dir / "b.csv"));
  std::filesystem::remove_all(dir);
  EXPECT_THROW(write_outputs(dir, {{"a.csv", "1\n"}, {"missing/b.csv", "2\n"}}), InputError);
  EXPECT_FALSE(std::filesystem::exists(dir / "a.csv"));
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace wugbench
