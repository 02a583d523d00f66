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

#ifndef WUGBENCH_SYNTHCORPUS_HPP_
#define WUGBENCH_SYNTHCORPUS_HPP_

// Seeded synthetic grammar with alternation families, distractor verbs,
// filler verbs, and selectional noun classes, plus a corpus sampler.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "wugbench/stimuli.hpp"

namespace wugbench {

struct FamilyFrames {
  std::string name;
  std::string levin_label;
  FrameTemplate frame_a;
  FrameTemplate frame_b;
  // The one family frame distractor verbs are licensed in.
  FrameSide distractor_side = FrameSide::kA;
};

struct GrammarSpec {
  std::size_t n_alternation_families = 3;
  std::size_t verbs_per_family = 8;
  std::size_t distractors_per_family = 6;
  std::size_t n_noun_classes = 4;
  std::size_t nouns_per_class = 6;
  std::size_t fillers_per_frame = 4;
  // Fraction of productions realized without "will" before the verb.
  double past_rate = 0.3;
  std::vector<FamilyFrames> family_frames;
  std::vector<FrameTemplate> singleton_frames;
  std::vector<std::string> closed_class_words;

  void validate() const;
};

GrammarSpec grammar_spec_from_json(std::string_view text);
GrammarSpec load_grammar_spec(const std::string& path);
std::string grammar_spec_to_json(const GrammarSpec& spec);

enum class VerbRole { kInClass, kDistractor, kFiller };

struct VerbEntry {
  std::string word;
  VerbRole role = VerbRole::kInClass;
  std::size_t group = 0;            // family index, or singleton frame index for fillers
  std::vector<std::size_t> frames;  // indices into Grammar::frames
  std::size_t noun_class = 0;
};

struct Grammar {
  GrammarSpec spec;
  // Family i owns frames 2i (a) and 2i+1 (b); singleton frames follow.
  std::vector<FrameTemplate> frames;
  std::vector<VerbEntry> verbs;
  std::vector<std::vector<std::string>> nouns;  // by class

  // Reserved tokens, closed-class words, verbs, nouns.
  std::vector<std::string> vocabulary() const;
  // One AlternationSpec per family (distractors as out-class verbs).
  std::vector<AlternationSpec> battery() const;
  // Filler verbs: the reference high-frequency out-class list.
  std::vector<std::string> filler_verbs() const;
  // Frame of family `family` that no distractor is licensed in.
  FrameSide consistent_probe_frame(std::size_t family) const;

  // True when `sentence` is a production this grammar licenses.
  bool licenses(const TokenSequence& sentence) const;
};

Grammar build_grammar(const GrammarSpec& spec, std::uint64_t seed);

// Uniform over verbs, then over the verb's licensed frames, then over nouns of
// its class for each noun slot.
std::vector<TokenSequence> sample_corpus(const Grammar& grammar, std::size_t n_sentences,
                                         std::uint64_t seed);

// One sentence per line, space-separated tokens.
std::string dump_corpus(const std::vector<TokenSequence>& corpus);

// Three families (transitivity, argument realization, oblique subject) built
// from battery frames, five filler frames, and every battery function word.
GrammarSpec default_grammar_spec();

}  // namespace wugbench

#endif  // WUGBENCH_SYNTHCORPUS_HPP_
