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

#ifndef WUGBENCH_PROBE_HPP_
#define WUGBENCH_PROBE_HPP_

// Embedding classification test: a 2-way linear probe trained on known verb
// embeddings and applied to a fine-tuned novel embedding.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "wugbench/finetune.hpp"
#include "wugbench/model.hpp"
#include "wugbench/stimuli.hpp"

namespace wugbench {

struct ProbeConfig {
  double learning_rate = 1e-1;
  std::size_t epochs = 20;
  // Weights start at zero, so training is seed-independent; kept for the
  // run manifest.
  std::uint64_t seed = 0;

  void validate() const;
};

struct LabeledEmbeddings {
  Eigen::MatrixXd x;        // n x d
  std::vector<int> labels;  // 1 in-class, 0 out-class
  std::vector<std::string> words;
};

struct LinearProbe {
  Eigen::MatrixXd weight;  // 2 x d
  Eigen::VectorXd bias;    // 2

  static LinearProbe zeros(std::size_t dim);
  Eigen::Vector2d logits(const Eigen::VectorXd& x) const;
};

struct TrainedProbe {
  LinearProbe probe;
  double train_accuracy = 0.0;
};

struct Classification {
  int label = 0;       // argmax; ties go to 0
  double score = 0.5;  // class-1 softmax probability
};

// Embeddings of base-vocabulary verbs; lists must be nonempty and disjoint.
LabeledEmbeddings make_dataset(const ExtendedModel& model, const std::vector<std::string>& inclass,
                               const std::vector<std::string>& outclass);

// Full-batch Adam on mean cross-entropy, cfg.epochs steps from zero weights.
TrainedProbe train_probe(const LabeledEmbeddings& data, const ProbeConfig& cfg);

Classification classify(const LinearProbe& probe, const Eigen::VectorXd& x);

// Where out-class verbs come from: the spec's distractors or a word list.
struct OutClassSource {
  enum class Kind { kDistractor, kWordList } kind = Kind::kDistractor;
  std::vector<std::string> words;  // used for kWordList

  std::string describe() const;  // "distractor" or "wordlist"
};

// Out-class list for a spec: distractors, or the word list minus any verb on
// the spec's own lists.
std::vector<std::string> outclass_verbs(const AlternationSpec& spec, const OutClassSource& source);

// Reads one word per line; blank lines and surrounding whitespace ignored.
std::vector<std::string> load_word_list(const std::string& path);

struct ProbeOutcome {
  std::size_t seed_index = 0;
  int label = 0;
  double score = 0.0;
};

struct ProbeExperimentResult {
  std::string alternation_id;
  FrameSide train_frame = FrameSide::kA;
  double train_accuracy = 0.0;
  std::vector<ProbeOutcome> outcomes;
  double accuracy = 0.0;  // fraction of seeds labeled in-class
};

// Trains the probe on base embeddings, and for each seed fine-tunes a fresh
// novel verb on the training frame and classifies its embedding. Seed i uses
// finetune seed `seeds[i]`.
ProbeExperimentResult probe_experiment(const MaskedLM& model,
                                       const std::vector<AlternationSpec>& battery,
                                       std::string_view spec_id, FrameSide train_frame,
                                       const OutClassSource& source, const FineTuneConfig& ft,
                                       const ProbeConfig& pc, const std::vector<std::uint64_t>& seeds);

// Single-seed step of probe_experiment against an already trained probe.
ProbeOutcome probe_novel_verb(const MaskedLM& model, const AlternationSpec& spec,
                              FrameSide train_frame, const LinearProbe& probe,
                              const FineTuneConfig& ft);

}  // namespace wugbench

#endif  // WUGBENCH_PROBE_HPP_
