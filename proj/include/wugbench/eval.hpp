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

#ifndef WUGBENCH_EVAL_HPP_
#define WUGBENCH_EVAL_HPP_

// Psycholinguistic generalization tests over fine-tuned novel tokens.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "wugbench/finetune.hpp"
#include "wugbench/model.hpp"
#include "wugbench/stimuli.hpp"

namespace wugbench {

// -ln p in nats.
double surprisal(const ExtendedModel& model, const TokenSequence& seq, std::size_t position,
                 std::string_view token);

struct AlternationTrial {
  std::string alternation_id;
  FrameSide train_frame = FrameSide::kA;
  std::size_t seed_index = 0;
  double p_in = 0.0;        // novel verb in the sister frame
  double p_out_mean = 0.0;  // mean over out-class frames
  bool correct = false;     // p_in > p_out_mean, ties incorrect
};

// Fine-tunes one novel verb on the rendered training frame, then compares its
// probability in the sister frame with the mean over out_class_frames. The
// novel token is named after the training frame's label. `cfg.seed` seeds the
// novel row.
AlternationTrial alternation_trial(const MaskedLM& model, const std::vector<AlternationSpec>& battery,
                                   std::string_view spec_id, FrameSide train_frame,
                                   const FineTuneConfig& cfg);

struct SelectionalTrial {
  std::size_t seed_index = 0;
  // Mean verb surprisal per condition (attested-in, unattested-in, unattested-out).
  std::array<double, 3> surprisal{};
  // attested-in < unattested-in, attested-in < unattested-out,
  // unattested-in < unattested-out.
  std::array<bool, 3> flags{};
};

inline constexpr std::array<std::string_view, 3> kContrastNames = {"ai_vs_ui", "ai_vs_uo",
                                                                   "ui_vs_uo"};

// Mean surprisal per verb within a condition, then averaged over verbs.
double condition_surprisal(const ExtendedModel& model, const SelectionalNetwork& net,
                           SelectionalCondition condition);

std::array<bool, 3> contrast_flags(const std::array<double, 3>& surprisal);

// Extends with all 12 network tokens, fine-tunes on the attested sentences,
// and scores the three conditions.
SelectionalTrial selectional_trial(const MaskedLM& model, const SelectionalNetwork& net,
                                   const FineTuneConfig& cfg);

struct AsymmetryRow {
  std::string alternation_id;
  FrameSide train_frame = FrameSide::kA;
  std::size_t successes = 0;
  std::size_t n = 0;
  double accuracy = 0.0;
  double sister_accuracy = -1.0;  // accuracy when training on the other frame; -1 if absent
  bool below_baseline = false;    // accuracy < 0.5
};

// Groups trials by (alternation, training frame) in first-seen alternation
// order, frame a before b.
std::vector<AsymmetryRow> asymmetry_report(const std::vector<AlternationTrial>& trials);

}  // namespace wugbench

#endif  // WUGBENCH_EVAL_HPP_
