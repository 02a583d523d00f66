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

#include "wugbench/eval.hpp"

#include <cmath>
#include <map>
#include <numeric>

#include "wugbench/error.hpp"

namespace wugbench {
namespace {

std::size_t novel_position(const TokenSequence& seq, std::string_view name) {
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    if (seq.tokens[i] == name) return i;
  }
  throw InputError("novel token '" + std::string(name) + "' missing from '" + seq.str() + "'");
}

// Probability of the novel token in a frame with its own slot masked.
double frame_probability(const ExtendedModel& model, const FrameTemplate& frame,
                         const std::string& name) {
  TokenSequence seq = render(frame, name);
  const auto pos = novel_position(seq, name);
  seq.tokens[pos] = std::string(kMaskToken);
  return model.token_probability(seq, pos, name);
}

}  // namespace

double surprisal(const ExtendedModel& model, const TokenSequence& seq, std::size_t position,
                 std::string_view token) {
  const TokenId target = model.id_of(token);
  if (position >= seq.tokens.size() || seq.tokens[position] != kMaskToken) {
    throw UsageError("surprisal: position " + std::to_string(position) + " is not a [MASK]");
  }
  const Eigen::VectorXd z = model.logits_at(seq, position);
  const double mx = z.maxCoeff();
  const double lse = mx + std::log((z.array() - mx).exp().sum());
  return std::max(0.0, lse - z(static_cast<Eigen::Index>(target)));
}

AlternationTrial alternation_trial(const MaskedLM& model, const std::vector<AlternationSpec>& battery,
                                   std::string_view spec_id, FrameSide train_frame,
                                   const FineTuneConfig& cfg) {
  const auto& spec = find_spec(battery, spec_id);
  const auto& train = spec.frame(train_frame);
  const auto& sis = spec.frame(sister(train_frame));
  const auto out_frames = out_class_frames(battery, spec_id, train_frame);
  if (out_frames.empty()) {
    throw InputError("alternation '" + spec.id + "' has no out-class frames");
  }
  for (const auto* f : {&train, &sis}) check_function_words(*f, model.vocabulary());
  for (const auto& f : out_frames) check_function_words(f, model.vocabulary());

  ExtendedModel ext(model);
  const std::string name = train.label;
  const std::string names[] = {name};
  ext.extend_vocab(names, cfg.seed);
  run_finetune(ext, {render(train, name, &model.vocabulary())}, cfg);

  AlternationTrial t;
  t.alternation_id = spec.id;
  t.train_frame = train_frame;
  t.p_in = frame_probability(ext, sis, name);
  double sum = 0.0;
  for (const auto& f : out_frames) sum += frame_probability(ext, f, name);
  t.p_out_mean = sum / static_cast<double>(out_frames.size());
  t.correct = t.p_in > t.p_out_mean;
  return t;
}

double condition_surprisal(const ExtendedModel& model, const SelectionalNetwork& net,
                           SelectionalCondition condition) {
  std::map<std::string, std::pair<double, std::size_t>> per_verb;
  for (const auto& [verb, noun] : net.pairs(condition)) {
    auto seq = make_sequence({"the", std::string(kMaskToken), std::string(kMaskToken), "the", noun});
    auto& acc = per_verb[verb];
    acc.first += surprisal(model, seq, kSelectionalVerbPosition, verb);
    ++acc.second;
  }
  if (per_verb.empty()) throw InputError("selectional condition has no sentences");
  double total = 0.0;
  for (const auto& [verb, acc] : per_verb) total += acc.first / static_cast<double>(acc.second);
  return total / static_cast<double>(per_verb.size());
}

std::array<bool, 3> contrast_flags(const std::array<double, 3>& s) {
  return {s[0] < s[1], s[0] < s[2], s[1] < s[2]};
}

SelectionalTrial selectional_trial(const MaskedLM& model, const SelectionalNetwork& net,
                                   const FineTuneConfig& cfg) {
  validate_network(net);
  ExtendedModel ext(model);
  std::vector<std::string> names = net.verbs;
  names.insert(names.end(), net.nouns.begin(), net.nouns.end());
  ext.extend_vocab(names, cfg.seed);
  run_finetune(ext, selectional_sentences(net, SelectionalCondition::kAttestedIn), cfg);

  SelectionalTrial t;
  for (std::size_t c = 0; c < kSelectionalConditions.size(); ++c) {
    t.surprisal[c] = condition_surprisal(ext, net, kSelectionalConditions[c]);
  }
  t.flags = contrast_flags(t.surprisal);
  return t;
}

std::vector<AsymmetryRow> asymmetry_report(const std::vector<AlternationTrial>& trials) {
  if (trials.empty()) throw UsageError("asymmetry_report: no trials");
  std::vector<std::string> order;
  std::map<std::pair<std::string, int>, std::pair<std::size_t, std::size_t>> counts;
  for (const auto& t : trials) {
    if (std::find(order.begin(), order.end(), t.alternation_id) == order.end()) {
      order.push_back(t.alternation_id);
    }
    auto& c = counts[{t.alternation_id, t.train_frame == FrameSide::kA ? 0 : 1}];
    c.first += t.correct ? 1 : 0;
    ++c.second;
  }
  std::vector<AsymmetryRow> rows;
  for (const auto& id : order) {
    for (int side : {0, 1}) {
      auto it = counts.find({id, side});
      if (it == counts.end()) continue;
      AsymmetryRow r;
      r.alternation_id = id;
      r.train_frame = side == 0 ? FrameSide::kA : FrameSide::kB;
      r.successes = it->second.first;
      r.n = it->second.second;
      r.accuracy = static_cast<double>(r.successes) / static_cast<double>(r.n);
      r.below_baseline = r.accuracy < 0.5;
      if (auto s = counts.find({id, 1 - side}); s != counts.end()) {
        r.sister_accuracy = static_cast<double>(s->second.first) / static_cast<double>(s->second.second);
      }
      rows.push_back(r);
    }
  }
  return rows;
}

}  // namespace wugbench
