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

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "wugbench/error.hpp"

namespace wugbench {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

[[noreturn]] void schema_error(std::string_view entry, std::string_view reason) {
  throw InputError("battery entry '" + std::string(entry) + "': " + std::string(reason));
}

void require_keys(const ordered_json& obj, std::initializer_list<std::string_view> keys,
                  std::string_view entry, std::string_view what) {
  if (!obj.is_object()) schema_error(entry, std::string(what) + " is not an object");
  for (auto k : keys) {
    if (!obj.contains(std::string(k))) {
      schema_error(entry, std::string(what) + " is missing key '" + std::string(k) + "'");
    }
  }
  for (const auto& [k, v] : obj.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      schema_error(entry, std::string(what) + " has unknown key '" + k + "'");
    }
  }
}

std::string get_string(const ordered_json& obj, const char* key, std::string_view entry) {
  const auto& v = obj.at(key);
  if (!v.is_string()) schema_error(entry, std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<std::string> get_string_list(const ordered_json& obj, const char* key,
                                         std::string_view entry) {
  const auto& v = obj.at(key);
  if (!v.is_array()) schema_error(entry, std::string("'") + key + "' must be an array");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) schema_error(entry, std::string("'") + key + "' holds a non-string");
    out.push_back(e.get<std::string>());
  }
  return out;
}

FrameTemplate frame_from_json(const ordered_json& obj, std::string_view entry,
                              std::string_view which) {
  require_keys(obj, {"label", "items", "tense"}, entry, which);
  FrameTemplate f;
  f.label = get_string(obj, "label", entry);
  try {
    f.tense = tense_from_string(get_string(obj, "tense", entry));
  } catch (const InputError& e) {
    schema_error(entry, e.what());
  }
  for (const auto& s : get_string_list(obj, "items", entry)) {
    f.items.push_back(TemplateItem::decode(s));
  }
  return f;
}

ordered_json frame_to_json(const FrameTemplate& f) {
  ordered_json items = ordered_json::array();
  for (const auto& it : f.items) items.push_back(it.encoded());
  ordered_json obj;
  obj["label"] = f.label;
  obj["items"] = std::move(items);
  obj["tense"] = std::string(to_string(f.tense));
  return obj;
}

bool is_valid_function_word(std::string_view w) {
  if (w.empty() || w.front() == '[') return false;
  return std::none_of(w.begin(), w.end(),
                      [](unsigned char c) { return c == ' ' || c == '\t' || c == '\n'; });
}

}  // namespace

std::string TemplateItem::encoded() const {
  switch (kind) {
    case ItemKind::kMask: return std::string(kMaskToken);
    case ItemKind::kNovel: return std::string(kNovelSlot);
    case ItemKind::kFunction: return word;
  }
  return word;
}

TemplateItem TemplateItem::decode(std::string_view s) {
  if (s == kMaskToken) return mask();
  if (s == kNovelSlot) return novel();
  return function(std::string(s));
}

std::string_view to_string(Tense t) {
  switch (t) {
    case Tense::kFutureWill: return "future-will";
    case Tense::kPastEd: return "past-ed";
    case Tense::kPresent: return "present";
  }
  return "future-will";
}

Tense tense_from_string(std::string_view s) {
  if (s == "future-will") return Tense::kFutureWill;
  if (s == "past-ed") return Tense::kPastEd;
  if (s == "present") return Tense::kPresent;
  throw InputError("unknown tense '" + std::string(s) + "'");
}

std::string FrameTemplate::surface() const {
  std::vector<std::string> parts;
  parts.reserve(items.size());
  for (const auto& it : items) parts.push_back(it.encoded());
  return join(parts);
}

std::size_t FrameTemplate::novel_count() const {
  return std::count_if(items.begin(), items.end(),
                       [](const TemplateItem& i) { return i.kind == ItemKind::kNovel; });
}

std::size_t FrameTemplate::mask_count() const {
  return std::count_if(items.begin(), items.end(),
                       [](const TemplateItem& i) { return i.kind == ItemKind::kMask; });
}

FrameTemplate parse_frame(std::string label, std::string_view text, Tense tense) {
  FrameTemplate f{std::move(label), {}, tense};
  std::istringstream in{std::string(text)};
  std::string word;
  while (in >> word) f.items.push_back(TemplateItem::decode(word));
  return f;
}

std::string_view to_string(FrameSide s) { return s == FrameSide::kA ? "a" : "b"; }

FrameSide frame_side_from_string(std::string_view s) {
  if (s == "a") return FrameSide::kA;
  if (s == "b") return FrameSide::kB;
  throw UsageError("frame must be 'a' or 'b', got '" + std::string(s) + "'");
}

std::string TokenSequence::str() const { return join(tokens); }

TokenSequence make_sequence(std::vector<std::string> tokens) {
  TokenSequence seq{std::move(tokens), {}};
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    if (seq.tokens[i] == kMaskToken) seq.masked_positions.push_back(i);
  }
  return seq;
}

void validate_frame(const FrameTemplate& frame, std::string_view context) {
  if (frame.items.empty()) schema_error(context, "frame '" + frame.label + "' has no items");
  const auto novel = frame.novel_count();
  if (novel != 1) {
    schema_error(context, "frame '" + frame.label + "' has " + std::to_string(novel) +
                              " NOVEL items (expected exactly 1)");
  }
  for (const auto& it : frame.items) {
    if (it.kind == ItemKind::kFunction && !is_valid_function_word(it.word)) {
      schema_error(context, "frame '" + frame.label + "' has malformed function word '" +
                                it.word + "'");
    }
  }
}

void validate_spec(const AlternationSpec& spec) {
  if (spec.id.empty()) schema_error("<unnamed>", "empty id");
  validate_frame(spec.frame_a, spec.id);
  validate_frame(spec.frame_b, spec.id);
  if (spec.frame_a.items == spec.frame_b.items) schema_error(spec.id, "frame_a equals frame_b");
  if (spec.frame_a.tense != spec.frame_b.tense) {
    schema_error(spec.id, "frame_a and frame_b differ in tense");
  }
  if (spec.inclass_verbs.empty()) schema_error(spec.id, "empty inclass_verbs");
  if (spec.distractor_verbs.empty()) schema_error(spec.id, "empty distractor_verbs");
  for (const auto& v : spec.inclass_verbs) {
    if (std::find(spec.distractor_verbs.begin(), spec.distractor_verbs.end(), v) !=
        spec.distractor_verbs.end()) {
      schema_error(spec.id, "verb '" + v + "' is both in-class and distractor");
    }
  }
  const auto l = spec.levin_label;
  const auto dash = l.find('-');
  const auto digits = [](std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
      return c >= '0' && c <= '9';
    });
  };
  if (dash == std::string::npos || !digits(std::string_view(l).substr(0, dash)) ||
      !digits(std::string_view(l).substr(dash + 1))) {
    schema_error(spec.id, "levin_label '" + l + "' is not of the form S-s");
  }
}

void check_function_words(const FrameTemplate& frame, const Vocabulary& vocab) {
  for (const auto& it : frame.items) {
    if (it.kind == ItemKind::kFunction && !vocab.contains(it.word)) {
      throw InputError("frame '" + frame.label + "': function word '" + it.word +
                       "' is not in the model vocabulary");
    }
  }
}

std::vector<AlternationSpec> load_battery(std::string_view json_text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("battery: invalid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw InputError("battery: top level must be an array");

  std::vector<AlternationSpec> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& e = doc[i];
    std::string entry = "#" + std::to_string(i);
    if (e.is_object() && e.contains("id") && e["id"].is_string()) entry = e["id"].get<std::string>();
    require_keys(e,
                 {"id", "name", "levin_label", "frame_a", "frame_b", "inclass_verbs",
                  "distractor_verbs"},
                 entry, "entry");
    AlternationSpec spec;
    spec.id = get_string(e, "id", entry);
    spec.name = get_string(e, "name", entry);
    spec.levin_label = get_string(e, "levin_label", entry);
    spec.frame_a = frame_from_json(e["frame_a"], entry, "frame_a");
    spec.frame_b = frame_from_json(e["frame_b"], entry, "frame_b");
    spec.inclass_verbs = get_string_list(e, "inclass_verbs", entry);
    spec.distractor_verbs = get_string_list(e, "distractor_verbs", entry);
    if (!seen.insert(spec.id).second) schema_error(entry, "duplicate id");
    validate_spec(spec);
    out.push_back(std::move(spec));
  }
  return out;
}

std::vector<AlternationSpec> load_battery_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open battery file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_battery(ss.str());
}

std::string serialize_battery(const std::vector<AlternationSpec>& battery) {
  ordered_json doc = ordered_json::array();
  for (const auto& s : battery) {
    ordered_json e;
    e["id"] = s.id;
    e["name"] = s.name;
    e["levin_label"] = s.levin_label;
    e["frame_a"] = frame_to_json(s.frame_a);
    e["frame_b"] = frame_to_json(s.frame_b);
    e["inclass_verbs"] = s.inclass_verbs;
    e["distractor_verbs"] = s.distractor_verbs;
    doc.push_back(std::move(e));
  }
  return doc.dump(2) + "\n";
}

TokenSequence render(const FrameTemplate& frame, std::string_view novel_name,
                     const Vocabulary* vocab) {
  if (novel_name.empty()) throw UsageError("render: empty novel token name");
  if (is_reserved_token(novel_name) || novel_name == kNovelSlot) {
    throw InputError("render: novel name '" + std::string(novel_name) + "' is reserved");
  }
  if (vocab && vocab->contains(novel_name)) {
    throw InputError("render: novel name '" + std::string(novel_name) +
                     "' collides with an existing vocabulary token");
  }
  TokenSequence seq;
  for (const auto& it : frame.items) {
    switch (it.kind) {
      case ItemKind::kFunction: seq.tokens.push_back(it.word); break;
      case ItemKind::kMask:
        seq.masked_positions.push_back(seq.tokens.size());
        seq.tokens.emplace_back(kMaskToken);
        break;
      case ItemKind::kNovel: seq.tokens.emplace_back(novel_name); break;
    }
  }
  return seq;
}

std::size_t spec_index(const std::vector<AlternationSpec>& battery, std::string_view spec_id) {
  for (std::size_t i = 0; i < battery.size(); ++i) {
    if (battery[i].id == spec_id) return i;
  }
  throw InputError("alternation '" + std::string(spec_id) + "' not found in battery");
}

const AlternationSpec& find_spec(const std::vector<AlternationSpec>& battery,
                                 std::string_view spec_id) {
  return battery[spec_index(battery, spec_id)];
}

std::vector<FrameTemplate> out_class_frames(const std::vector<AlternationSpec>& battery,
                                            std::string_view spec_id, FrameSide train_frame) {
  const auto& spec = find_spec(battery, spec_id);
  const auto& own = spec.frame(train_frame).items;
  const auto& sis = spec.frame(sister(train_frame)).items;
  std::vector<FrameTemplate> out;
  for (const auto& other : battery) {
    if (other.id == spec.id) continue;
    for (const auto* f : {&other.frame_a, &other.frame_b}) {
      if (f->items == own || f->items == sis) continue;
      out.push_back(*f);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(SelectionalCondition c) {
  switch (c) {
    case SelectionalCondition::kAttestedIn: return "attested_in";
    case SelectionalCondition::kUnattestedIn: return "unattested_in";
    case SelectionalCondition::kUnattestedOut: return "unattested_out";
  }
  return "attested_in";
}

std::vector<VerbNounPair> SelectionalNetwork::pairs(SelectionalCondition condition) const {
  std::vector<VerbNounPair> out;
  for (const auto& v : verbs) {
    for (const auto& n : nouns) {
      const bool seen = attested.contains({v, n});
      const bool same = class_of.at(v) == class_of.at(n);
      const bool keep = condition == SelectionalCondition::kAttestedIn     ? seen
                        : condition == SelectionalCondition::kUnattestedIn ? (!seen && same)
                                                                          : !same;
      if (keep) out.emplace_back(v, n);
    }
  }
  return out;
}

void validate_network(const SelectionalNetwork& net) {
  auto fail = [](const std::string& why) { throw InputError("selectional network: " + why); };
  if (net.verbs.size() != 6 || net.nouns.size() != 6) fail("need 6 verbs and 6 nouns");
  std::map<int, int> verb_class_size, noun_class_size;
  for (const auto& v : net.verbs) {
    auto it = net.class_of.find(v);
    if (it == net.class_of.end()) fail("verb '" + v + "' has no class");
    ++verb_class_size[it->second];
  }
  for (const auto& n : net.nouns) {
    auto it = net.class_of.find(n);
    if (it == net.class_of.end()) fail("noun '" + n + "' has no class");
    ++noun_class_size[it->second];
  }
  for (int c : {1, 2}) {
    if (verb_class_size[c] != 3 || noun_class_size[c] != 3) {
      fail("each class needs exactly 3 verbs and 3 nouns");
    }
  }
  std::map<std::string, int> degree;
  for (const auto& [v, n] : net.attested) {
    if (std::find(net.verbs.begin(), net.verbs.end(), v) == net.verbs.end() ||
        std::find(net.nouns.begin(), net.nouns.end(), n) == net.nouns.end()) {
      fail("attested pair (" + v + ", " + n + ") uses unknown tokens");
    }
    if (net.class_of.at(v) != net.class_of.at(n)) {
      fail("attested pair (" + v + ", " + n + ") crosses classes");
    }
    ++degree[v];
    ++degree[n];
  }
  for (const auto& t : net.verbs) {
    if (degree[t] != 2) fail("verb '" + t + "' must have exactly 2 attested nouns");
  }
  for (const auto& t : net.nouns) {
    if (degree[t] != 2) fail("noun '" + t + "' must have exactly 2 attested verbs");
  }
}

SelectionalNetwork default_selectional_network() {
  SelectionalNetwork net;
  for (int i = 1; i <= 6; ++i) {
    net.verbs.push_back("Verb" + std::to_string(i));
    net.nouns.push_back("Noun" + std::to_string(i));
    net.class_of["Verb" + std::to_string(i)] = i <= 3 ? 1 : 2;
    net.class_of["Noun" + std::to_string(i)] = i <= 3 ? 1 : 2;
  }
  // Solid lines of the network figure; each class is a 6-cycle.
  const int edges[][2] = {{1, 1}, {1, 2}, {2, 1}, {2, 3}, {3, 3}, {3, 2},
                          {6, 6}, {6, 5}, {5, 6}, {5, 4}, {4, 4}, {4, 5}};
  for (const auto& e : edges) {
    net.attested.insert({"Verb" + std::to_string(e[0]), "Noun" + std::to_string(e[1])});
  }
  return net;
}

std::vector<TokenSequence> selectional_sentences(const SelectionalNetwork& net,
                                                 SelectionalCondition condition) {
  std::vector<TokenSequence> out;
  for (const auto& [v, n] : net.pairs(condition)) {
    out.push_back(make_sequence({"the", std::string(kMaskToken), v, "the", n}));
  }
  return out;
}

}  // namespace wugbench
