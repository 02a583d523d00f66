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

#ifndef WUGBENCH_STIMULI_HPP_
#define WUGBENCH_STIMULI_HPP_

// Stimulus material: frame templates, the alternation battery, and the
// verb/noun selectional network used for the few-shot word learning tests.

#include <array>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wugbench/vocabulary.hpp"

namespace wugbench {

// Placeholder for the novel-token slot in battery files.
inline constexpr std::string_view kNovelSlot = "[V]";

enum class ItemKind { kFunction, kMask, kNovel };

struct TemplateItem {
  ItemKind kind = ItemKind::kFunction;
  std::string word;  // only meaningful for kFunction

  static TemplateItem function(std::string w) { return {ItemKind::kFunction, std::move(w)}; }
  static TemplateItem mask() { return {ItemKind::kMask, {}}; }
  static TemplateItem novel() { return {ItemKind::kNovel, {}}; }

  // Battery-file spelling: "[MASK]", "[V]", or the function word.
  std::string encoded() const;
  static TemplateItem decode(std::string_view s);

  friend bool operator==(const TemplateItem&, const TemplateItem&) = default;
};

enum class Tense { kFutureWill, kPastEd, kPresent };

std::string_view to_string(Tense t);
Tense tense_from_string(std::string_view s);

struct FrameTemplate {
  std::string label;
  std::vector<TemplateItem> items;
  Tense tense = Tense::kFutureWill;

  // Space-joined encoded items; two frames are surface-identical iff equal.
  std::string surface() const;
  std::size_t novel_count() const;
  std::size_t mask_count() const;
};

// Parses "the [MASK] will [V] the [MASK]" into a template.
FrameTemplate parse_frame(std::string label, std::string_view text,
                          Tense tense = Tense::kFutureWill);

enum class FrameSide { kA, kB };

inline FrameSide sister(FrameSide s) { return s == FrameSide::kA ? FrameSide::kB : FrameSide::kA; }
std::string_view to_string(FrameSide s);  // "a" / "b"
FrameSide frame_side_from_string(std::string_view s);

struct AlternationSpec {
  std::string id;
  std::string name;
  std::string levin_label;  // "S-s"
  FrameTemplate frame_a;
  FrameTemplate frame_b;
  std::vector<std::string> inclass_verbs;
  std::vector<std::string> distractor_verbs;

  const FrameTemplate& frame(FrameSide s) const { return s == FrameSide::kA ? frame_a : frame_b; }
};

// A sentence as submitted to a model, without start/end tokens.
struct TokenSequence {
  std::vector<std::string> tokens;
  std::vector<std::size_t> masked_positions;

  std::string str() const;  // space-joined tokens
  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

// Builds a sequence from tokens and records every "[MASK]" position.
TokenSequence make_sequence(std::vector<std::string> tokens);

// Throws InputError if a template has != 1 NOVEL item, an empty item list, or
// a malformed FUNCTION word.
void validate_frame(const FrameTemplate& frame, std::string_view context);
// Checks every AlternationSpec invariant; messages carry the entry id.
void validate_spec(const AlternationSpec& spec);
// FUNCTION words must be known to `vocab`.
void check_function_words(const FrameTemplate& frame, const Vocabulary& vocab);

std::vector<AlternationSpec> load_battery(std::string_view json_text);
std::vector<AlternationSpec> load_battery_file(const std::string& path);
std::string serialize_battery(const std::vector<AlternationSpec>& battery);

// Substitutes the novel token for NOVEL and "[MASK]" for MASK items. When
// `vocab` is given, a name already in it is rejected.
TokenSequence render(const FrameTemplate& frame, std::string_view novel_name,
                     const Vocabulary* vocab = nullptr);

// Every frame of every other battery entry, in battery order (a before b),
// minus any frame surface-identical to either frame of `spec_id`. Surface
// duplicates of the sister frame would contaminate the out-class contrast.
std::vector<FrameTemplate> out_class_frames(const std::vector<AlternationSpec>& battery,
                                            std::string_view spec_id, FrameSide train_frame);

const AlternationSpec& find_spec(const std::vector<AlternationSpec>& battery,
                                 std::string_view spec_id);
std::size_t spec_index(const std::vector<AlternationSpec>& battery, std::string_view spec_id);

// ---------------------------------------------------------------------------
// Selectional network: 6 novel verbs and 6 novel nouns in two classes of
// three. Attested pairs are the fine-tuning evidence; the remaining pairs
// split into unattested in-class and unattested out-class.

enum class SelectionalCondition { kAttestedIn, kUnattestedIn, kUnattestedOut };

inline constexpr std::array<SelectionalCondition, 3> kSelectionalConditions = {
    SelectionalCondition::kAttestedIn, SelectionalCondition::kUnattestedIn,
    SelectionalCondition::kUnattestedOut};

std::string_view to_string(SelectionalCondition c);

using VerbNounPair = std::pair<std::string, std::string>;

struct SelectionalNetwork {
  std::vector<std::string> verbs;
  std::vector<std::string> nouns;
  std::map<std::string, int> class_of;  // token -> 1 or 2
  std::set<VerbNounPair> attested;

  // Pairs in `condition`, in verb order then noun order.
  std::vector<VerbNounPair> pairs(SelectionalCondition condition) const;
};

void validate_network(const SelectionalNetwork& net);
SelectionalNetwork default_selectional_network();

// "the [MASK] <verb> the <noun>" for each pair of the condition.
std::vector<TokenSequence> selectional_sentences(const SelectionalNetwork& net,
                                                 SelectionalCondition condition);

// Position of the verb inside a selectional sentence.
inline constexpr std::size_t kSelectionalVerbPosition = 2;
inline constexpr std::size_t kSelectionalNounPosition = 4;

}  // namespace wugbench

#endif  // WUGBENCH_STIMULI_HPP_
