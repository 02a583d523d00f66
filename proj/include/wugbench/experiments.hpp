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


#ifndef WUGBENCH_EXPERIMENTS_HPP_
#define WUGBENCH_EXPERIMENTS_HPP_

// Seed-parallel experiment drivers. Trials run on a worker pool over a shared
// read-only model; results land in fixed slots, so outputs do not depend on
// the worker count or scheduling.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wugbench/eval.hpp"
#include "wugbench/finetune.hpp"
#include "wugbench/model.hpp"
#include "wugbench/probe.hpp"
#include "wugbench/report.hpp"
#include "wugbench/stats.hpp"
#include "wugbench/stimuli.hpp"

namespace wugbench {

// Stable 64-bit trial seed from (master, experiment, alternation, frame, index).
std::uint64_t derive_seed(std::uint64_t master, std::string_view experiment,
                          std::string_view alternation_id, std::string_view frame,
                          std::size_t seed_index);

// requested == 0 means "hardware concurrency". WUGBENCH_THREADS, when set to a
// positive integer, caps the result. Never returns 0.
std::size_t worker_count(std::size_t requested = 0);

// Runs body(i) for i in [0, n). If any calls throw, the exception from the
// lowest index is rethrown after all workers stop.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& body);

struct ExperimentOptions {
  std::size_t seeds = 200;
  std::uint64_t master_seed = 0;
  std::size_t threads = 0;
  FineTuneConfig finetune;
  ProbeConfig probe;
  stats::IntervalMethod interval = stats::IntervalMethod::kWilson;
  double level = 0.95;

  void validate() const;
};

struct AlternationsRun {
  std::vector<AlternationTrial> trials;  // battery order, frame a then b, then seed
  std::vector<report::SummaryRow> summary;
  std::vector<AsymmetryRow> asymmetry;
  std::string chart;
};

AlternationsRun run_alternations(const MaskedLM& model, const std::vector<AlternationSpec>& battery,
                                 const ExperimentOptions& opts);

struct SelectionalRun {
  std::vector<SelectionalTrial> trials;
  std::vector<report::SummaryRow> summary;  // one row per contrast
  std::vector<report::ConditionRow> conditions;
  std::string contrast_chart;
  std::string surprisal_chart;
};

SelectionalRun run_selectional(const MaskedLM& model, const SelectionalNetwork& net,
                               const ExperimentOptions& opts);

struct ProbeRun {
  std::vector<report::ProbeTrialRow> trials;
  std::vector<report::SummaryRow> summary;
  std::string chart;
};

ProbeRun run_probe(const MaskedLM& model, const std::vector<AlternationSpec>& battery,
                   const OutClassSource& source, const ExperimentOptions& opts);

// Pearson and Spearman between matching non-pooled groups of two summaries.
std::vector<report::CorrelationRow> correlate_summaries(const std::vector<report::SummaryRow>& a,
                                                        const std::vector<report::SummaryRow>& b);

// Group key used in summaries: "<alternation id>:<frame>".
std::string group_key(std::string_view alternation_id, FrameSide frame);

// Writes every (file name, content) pair into `dir`, each atomically. If any
// write fails, files already written by this call are removed.
void write_outputs(const std::filesystem::path& dir,
                   const std::vector<std::pair<std::string, std::string>>& files);

}  // namespace wugbench

#endif  // WUGBENCH_EXPERIMENTS_HPP_
