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


#ifndef WUGBENCH_REPORT_HPP_
#define WUGBENCH_REPORT_HPP_

// Output tables (CSV), bar charts (SVG) and run manifests. All number
// formatting is locale-free and shortest-round-trip, so identical results
// always serialize to identical bytes.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "wugbench/eval.hpp"
#include "wugbench/stats.hpp"

namespace wugbench::report {

std::string format_double(double v);

// Writes `content` to `path` via a temporary sibling and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

inline constexpr std::string_view kTrialsHeader =
    "experiment,alternation_id,frame,seed,p_in,p_out_mean,correct";
inline constexpr std::string_view kSelectionalTrialsHeader =
    "seed,surprisal_attested_in,surprisal_unattested_in,surprisal_unattested_out,"
    "flag_ai_ui,flag_ai_uo,flag_ui_uo";
inline constexpr std::string_view kSummaryHeader =
    "experiment,group,successes,n,proportion,ci_low,ci_high,p_value";
inline constexpr std::string_view kAsymmetryHeader =
    "alternation_id,frame,successes,n,accuracy,sister_accuracy,below_baseline";
inline constexpr std::string_view kConditionsHeader =
    "condition,n_sentences,n_seeds,mean_surprisal,sd_surprisal";
inline constexpr std::string_view kProbeTrialsHeader =
    "experiment,alternation_id,frame,seed,outclass,train_accuracy,label,score";
inline constexpr std::string_view kCorrelationHeader = "measure,n,value";

struct SummaryRow {
  std::string experiment;
  std::string group;
  stats::AccuracySummary summary;
};

struct ConditionRow {
  std::string condition;
  std::size_t n_sentences = 0;
  std::size_t n_seeds = 0;
  double mean = 0.0;
  double sd = 0.0;
};

struct ProbeTrialRow {
  std::string alternation_id;
  FrameSide train_frame = FrameSide::kA;
  std::size_t seed_index = 0;
  std::string outclass;
  double train_accuracy = 0.0;
  int label = 0;
  double score = 0.0;
};

struct CorrelationRow {
  std::string measure;
  std::size_t n = 0;
  double value = 0.0;
  bool defined = true;  // false prints "NA"
};

std::string trials_csv(std::string_view experiment, const std::vector<AlternationTrial>& trials);
std::string selectional_trials_csv(const std::vector<SelectionalTrial>& trials);
std::string summary_csv(const std::vector<SummaryRow>& rows);
std::string asymmetry_csv(const std::vector<AsymmetryRow>& rows);
std::string conditions_csv(const std::vector<ConditionRow>& rows);
std::string probe_trials_csv(std::string_view experiment, const std::vector<ProbeTrialRow>& rows);
std::string correlation_csv(const std::vector<CorrelationRow>& rows);

// Minimal CSV reader for files this module writes (no quoting).
std::vector<std::vector<std::string>> parse_csv(std::string_view text);
std::vector<SummaryRow> parse_summary_csv(std::string_view text);

struct ChartBar {
  std::string label;
  std::string category;  // colour group
  double value = 0.0;
  double err_low = 0.0;
  double err_high = 0.0;
};

struct ChartStyle {
  std::string title;
  std::string y_label = "accuracy";
  double y_max = 1.0;        // <= 0 picks a bound from the data
  bool baseline = true;      // dashed line at 0.5
};

// Chart geometry, exposed so tests can map values back from coordinates.
inline constexpr double kPlotTop = 40.0;
inline constexpr double kPlotHeight = 300.0;
inline constexpr double kPlotLeft = 60.0;

std::string emit_chart(const std::vector<ChartBar>& bars, const ChartStyle& style);

}  // namespace wugbench::report

#endif  // WUGBENCH_REPORT_HPP_
