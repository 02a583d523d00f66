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

#include "wugbench/synthcorpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "wugbench/error.hpp"

namespace wugbench {
namespace {

using json = nlohmann::ordered_json;

void reject_unknown(const json& obj, std::initializer_list<std::string_view> keys,
                    std::string_view where) {
  if (!obj.is_object()) throw InputError("grammar spec: " + std::string(where) + " must be an object");
  for (const auto& [k, v] : obj.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      throw InputError("grammar spec: unknown key '" + k + "' in " + std::string(where));
    }
  }
}

// Index of the item just before the verb slot if it is "will".
std::optional<std::size_t> will_before_verb(const FrameTemplate& f) {
  for (std::size_t i = 1; i < f.items.size(); ++i) {
    if (f.items[i].kind == ItemKind::kNovel && f.items[i - 1].kind == ItemKind::kFunction &&
        f.items[i - 1].word == "will") {
      return i - 1;
    }
  }
  return std::nullopt;
}

}  // namespace

void GrammarSpec::validate() const {
  if (n_alternation_families < 1 || verbs_per_family < 1 || distractors_per_family < 1 ||
      n_noun_classes < 1 || nouns_per_class < 1) {
    throw InputError("grammar spec: all counts must be >= 1");
  }
  if (family_frames.size() < n_alternation_families) {
    throw InputError("grammar spec: frame inventory has " + std::to_string(family_frames.size()) +
                     " alternating pairs but " + std::to_string(n_alternation_families) +
                     " families were requested");
  }
  if (!(past_rate >= 0.0 && past_rate <= 1.0)) throw InputError("grammar spec: past_rate must lie in [0, 1]");
  std::set<std::string> closed(closed_class_words.begin(), closed_class_words.end());
  auto check = [&](const FrameTemplate& f, const std::string& ctx) {
    validate_frame(f, ctx);
    for (const auto& it : f.items) {
      if (it.kind == ItemKind::kFunction && !closed.contains(it.word)) {
        throw InputError("grammar spec: frame '" + f.surface() + "' uses '" + it.word +
                         "', which is not a closed-class word");
      }
    }
  };
  for (std::size_t i = 0; i < n_alternation_families; ++i) {
    const auto& fam = family_frames[i];
    check(fam.frame_a, fam.name);
    check(fam.frame_b, fam.name);
    if (fam.frame_a.items == fam.frame_b.items) {
      throw InputError("grammar spec: family '" + fam.name + "' has identical frames");
    }
  }
  for (const auto& f : singleton_frames) check(f, "singleton frame");
}

GrammarSpec grammar_spec_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("grammar spec: invalid JSON: ") + e.what());
  }
  reject_unknown(doc,
                 {"n_alternation_families", "verbs_per_family", "distractors_per_family",
                  "n_noun_classes", "nouns_per_class", "fillers_per_frame", "past_rate",
                  "families", "singleton_frames", "closed_class_words"},
                 "top level");
  GrammarSpec s;
  try {
    auto count = [&](const char* key, std::size_t& dst) {
      if (doc.contains(key)) dst = doc.at(key).get<std::size_t>();
    };
    count("n_alternation_families", s.n_alternation_families);
    count("verbs_per_family", s.verbs_per_family);
    count("distractors_per_family", s.distractors_per_family);
    count("n_noun_classes", s.n_noun_classes);
    count("nouns_per_class", s.nouns_per_class);
    count("fillers_per_frame", s.fillers_per_frame);
    if (doc.contains("past_rate")) s.past_rate = doc.at("past_rate").get<double>();
    for (const auto& f : doc.at("families")) {
      reject_unknown(f, {"name", "levin_label", "frame_a", "frame_b", "distractor_frame"},
                     "family");
      FamilyFrames fam;
      fam.name = f.at("name").get<std::string>();
      fam.levin_label = f.at("levin_label").get<std::string>();
      fam.frame_a = parse_frame(fam.name + ".a", f.at("frame_a").get<std::string>());
      fam.frame_b = parse_frame(fam.name + ".b", f.at("frame_b").get<std::string>());
      fam.distractor_side = frame_side_from_string(f.value("distractor_frame", std::string("a")));
      s.family_frames.push_back(std::move(fam));
    }
    if (doc.contains("singleton_frames")) {
      std::size_t i = 0;
      for (const auto& f : doc.at("singleton_frames")) {
        s.singleton_frames.push_back(
            parse_frame("filler" + std::to_string(++i), f.get<std::string>()));
      }
    }
    s.closed_class_words = doc.at("closed_class_words").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("grammar spec: ") + e.what());
  } catch (const UsageError& e) {
    throw InputError(std::string("grammar spec: ") + e.what());
  }
  s.validate();
  return s;
}

GrammarSpec load_grammar_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open grammar file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return grammar_spec_from_json(ss.str());
}

std::string grammar_spec_to_json(const GrammarSpec& s) {
  json doc;
  doc["n_alternation_families"] = s.n_alternation_families;
  doc["verbs_per_family"] = s.verbs_per_family;
  doc["distractors_per_family"] = s.distractors_per_family;
  doc["n_noun_classes"] = s.n_noun_classes;
  doc["nouns_per_class"] = s.nouns_per_class;
  doc["fillers_per_frame"] = s.fillers_per_frame;
  doc["past_rate"] = s.past_rate;
  doc["families"] = json::array();
  for (const auto& f : s.family_frames) {
    json fam;
    fam["name"] = f.name;
    fam["levin_label"] = f.levin_label;
    fam["frame_a"] = f.frame_a.surface();
    fam["frame_b"] = f.frame_b.surface();
    fam["distractor_frame"] = std::string(to_string(f.distractor_side));
    doc["families"].push_back(std::move(fam));
  }
  doc["singleton_frames"] = json::array();
  for (const auto& f : s.singleton_frames) doc["singleton_frames"].push_back(f.surface());
  doc["closed_class_words"] = s.closed_class_words;
  return doc.dump(2) + "\n";
}

// ----------------------------------------------------------------------------

Grammar build_grammar(const GrammarSpec& spec, std::uint64_t seed) {
  spec.validate();
  Grammar g;
  g.spec = spec;
  for (std::size_t f = 0; f < spec.n_alternation_families; ++f) {
    g.frames.push_back(spec.family_frames[f].frame_a);
    g.frames.push_back(spec.family_frames[f].frame_b);
  }
  const std::size_t first_singleton = g.frames.size();
  for (const auto& f : spec.singleton_frames) g.frames.push_back(f);

  for (std::size_t c = 0; c < spec.n_noun_classes; ++c) {
    std::vector<std::string> cls;
    for (std::size_t i = 0; i < spec.nouns_per_class; ++i) {
      cls.push_back("c" + std::to_string(c + 1) + "n" + std::to_string(i + 1));
    }
    g.nouns.push_back(std::move(cls));
  }

  for (std::size_t f = 0; f < spec.n_alternation_families; ++f) {
    const std::string fam = "f" + std::to_string(f + 1);
    for (std::size_t i = 0; i < spec.verbs_per_family; ++i) {
      g.verbs.push_back({fam + "v" + std::to_string(i + 1), VerbRole::kInClass, f,
                         {2 * f, 2 * f + 1}, 0});
    }
    const std::size_t dframe =
        2 * f + (spec.family_frames[f].distractor_side == FrameSide::kA ? 0 : 1);
    for (std::size_t i = 0; i < spec.distractors_per_family; ++i) {
      g.verbs.push_back({fam + "d" + std::to_string(i + 1), VerbRole::kDistractor, f, {dframe}, 0});
    }
  }
  for (std::size_t s = 0; s < spec.singleton_frames.size(); ++s) {
    for (std::size_t i = 0; i < spec.fillers_per_frame; ++i) {
      g.verbs.push_back({"x" + std::to_string(s + 1) + "v" + std::to_string(i + 1),
                         VerbRole::kFiller, s, {first_singleton + s}, 0});
    }
  }

  // Balanced noun-class assignment, shuffled by the seed.
  std::vector<std::size_t> classes(g.verbs.size());
  for (std::size_t i = 0; i < classes.size(); ++i) classes[i] = i % spec.n_noun_classes;
  std::mt19937_64 rng(seed);
  std::shuffle(classes.begin(), classes.end(), rng);
  for (std::size_t i = 0; i < g.verbs.size(); ++i) g.verbs[i].noun_class = classes[i];
  return g;
}

std::vector<std::string> Grammar::vocabulary() const {
  std::vector<std::string> v = {std::string(kMaskToken), std::string(kStartToken),
                                std::string(kEndToken), std::string(kUnknownToken)};
  for (const auto& w : spec.closed_class_words) v.push_back(w);
  for (const auto& verb : verbs) v.push_back(verb.word);
  for (const auto& cls : nouns) {
    for (const auto& n : cls) v.push_back(n);
  }
  return v;
}

std::vector<AlternationSpec> Grammar::battery() const {
  std::vector<AlternationSpec> out;
  for (std::size_t f = 0; f < spec.n_alternation_families; ++f) {
    const auto& fam = spec.family_frames[f];
    AlternationSpec s;
    s.id = "family" + std::to_string(f + 1);
    s.name = fam.name;
    s.levin_label = fam.levin_label;
    s.frame_a = fam.frame_a;
    s.frame_b = fam.frame_b;
    s.frame_a.label = "F" + std::to_string(f + 1) + ".1";
    s.frame_b.label = "F" + std::to_string(f + 1) + ".2";
    for (const auto& v : verbs) {
      if (v.group != f) continue;
      if (v.role == VerbRole::kInClass) s.inclass_verbs.push_back(v.word);
      if (v.role == VerbRole::kDistractor) s.distractor_verbs.push_back(v.word);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::string> Grammar::filler_verbs() const {
  std::vector<std::string> out;
  for (const auto& v : verbs) {
    if (v.role == VerbRole::kFiller) out.push_back(v.word);
  }
  return out;
}

FrameSide Grammar::consistent_probe_frame(std::size_t family) const {
  return sister(spec.family_frames.at(family).distractor_side);
}

bool Grammar::licenses(const TokenSequence& sentence) const {
  std::map<std::string, const VerbEntry*> verb_of;
  for (const auto& v : verbs) verb_of[v.word] = &v;
  std::map<std::string, std::size_t> class_of;
  for (std::size_t c = 0; c < nouns.size(); ++c) {
    for (const auto& n : nouns[c]) class_of[n] = c;
  }
  const auto& toks = sentence.tokens;
  for (std::size_t fi = 0; fi < frames.size(); ++fi) {
    const auto& f = frames[fi];
    for (bool drop_will : {false, true}) {
      auto skip = drop_will ? will_before_verb(f) : std::nullopt;
      if (drop_will && !skip) continue;
      std::size_t t = 0;
      const VerbEntry* verb = nullptr;
      std::vector<std::string> args;
      bool ok = true;
      for (std::size_t i = 0; i < f.items.size() && ok; ++i) {
        if (skip && *skip == i) continue;
        if (t >= toks.size()) {
          ok = false;
          break;
        }
        const auto& it = f.items[i];
        const auto& tok = toks[t++];
        if (it.kind == ItemKind::kFunction) {
          ok = tok == it.word;
        } else if (it.kind == ItemKind::kNovel) {
          auto v = verb_of.find(tok);
          ok = v != verb_of.end();
          if (ok) verb = v->second;
        } else {
          ok = class_of.contains(tok);
          args.push_back(tok);
        }
      }
      if (!ok || t != toks.size() || !verb) continue;
      if (std::find(verb->frames.begin(), verb->frames.end(), fi) == verb->frames.end()) continue;
      if (std::all_of(args.begin(), args.end(),
                      [&](const std::string& n) { return class_of.at(n) == verb->noun_class; })) {
        return true;
      }
    }
  }
  return false;
}

std::vector<TokenSequence> sample_corpus(const Grammar& grammar, std::size_t n_sentences,
                                         std::uint64_t seed) {
  if (n_sentences < 1) throw UsageError("sample_corpus: n_sentences must be >= 1");
  if (grammar.verbs.empty()) throw InputError("sample_corpus: grammar has no licensed productions");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_verb(0, grammar.verbs.size() - 1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<TokenSequence> out;
  out.reserve(n_sentences);
  for (std::size_t s = 0; s < n_sentences; ++s) {
    const auto& verb = grammar.verbs[pick_verb(rng)];
    std::uniform_int_distribution<std::size_t> pick_frame(0, verb.frames.size() - 1);
    const auto& frame = grammar.frames[verb.frames[pick_frame(rng)]];
    const auto& cls = grammar.nouns[verb.noun_class];
    std::uniform_int_distribution<std::size_t> pick_noun(0, cls.size() - 1);
    const auto will = will_before_verb(frame);
    const bool past = will && unif(rng) < grammar.spec.past_rate;
    std::vector<std::string> toks;
    for (std::size_t i = 0; i < frame.items.size(); ++i) {
      if (past && *will == i) continue;
      const auto& it = frame.items[i];
      switch (it.kind) {
        case ItemKind::kFunction: toks.push_back(it.word); break;
        case ItemKind::kNovel: toks.push_back(verb.word); break;
        case ItemKind::kMask: toks.push_back(cls[pick_noun(rng)]); break;
      }
    }
    out.push_back(make_sequence(std::move(toks)));
  }
  return out;
}

std::string dump_corpus(const std::vector<TokenSequence>& corpus) {
  std::string out;
  for (const auto& s : corpus) {
    out += s.str();
    out += '\n';
  }
  return out;
}

GrammarSpec default_grammar_spec() {
  GrammarSpec s;
  s.family_frames = {
      {"Causative/Inchoative", "1-1", parse_frame("a", "the [MASK] will [V] the [MASK]"),
       parse_frame("b", "the [MASK] will [V]"), FrameSide::kA},
      {"Dative", "2-1", parse_frame("a", "the [MASK] will [V] a [MASK] to the [MASK]"),
       parse_frame("b", "the [MASK] will [V] the [MASK] a [MASK]"), FrameSide::kA},
      {"Raw Material Subject", "3-8",
       parse_frame("a", "the [MASK] will [V] the [MASK] from that [MASK]"),
       parse_frame("b", "that [MASK] will [V] the [MASK]"), FrameSide::kA},
  };
  s.singleton_frames = {
      parse_frame("filler1", "the [MASK] will [V] at the [MASK]"),
      parse_frame("filler2", "the [MASK] will [V] with the [MASK]"),
      parse_frame("filler3", "the [MASK] will [V] in the [MASK]"),
      parse_frame("filler4", "the [MASK] will [V] the [MASK] on the [MASK]"),
      parse_frame("filler5", "the [MASK] will [V] the [MASK] for the [MASK]"),
  };
  s.closed_class_words = {"the", "a", "an", "that", "will", "to", "for", "with", "at",
                          "in", "on", "onto", "from", "of", "into", "out", "off", "apart",
                          "and", "against", "through", "as", "their", "them", "themself"};
  return s;
}

}  // namespace wugbench
