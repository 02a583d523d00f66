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

#ifndef WUGBENCH_MODEL_HPP_
#define WUGBENCH_MODEL_HPP_

// Masked language model backend.
//
// MaskedLM holds the frozen base network: a post-layer-norm transformer
// encoder (learned positions, GELU feed-forward, embedding layer norm) with a
// BERT-style prediction head whose decoder is tied to the input embeddings.
//
// ExtendedModel layers a per-run overlay of novel tokens on top of a shared
// MaskedLM. Each novel token owns a single vector used both as its input
// embedding and as its output-projection row, plus one output bias. Only the
// overlay is ever trained after pretraining.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "wugbench/stimuli.hpp"
#include "wugbench/vocabulary.hpp"

namespace wugbench {

struct ModelConfig {
  std::size_t n_layers = 2;
  std::size_t n_heads = 4;
  std::size_t model_dim = 64;
  std::size_t ffn_dim = 256;
  std::size_t max_sequence_length = 16;  // including start and end tokens
  std::vector<std::string> vocabulary;    // must hold the 4 reserved tokens once
  double mlm_mask_rate = 0.15;

  void validate() const;
};

struct LayerParams {
  Eigen::MatrixXd wq, wk, wv, wo;  // d x d
  Eigen::MatrixXd bq, bk, bv, bo;  // 1 x d
  Eigen::MatrixXd ln1_g, ln1_b;    // 1 x d
  Eigen::MatrixXd w1, b1;          // d x f, 1 x f
  Eigen::MatrixXd w2, b2;          // f x d, 1 x d
  Eigen::MatrixXd ln2_g, ln2_b;    // 1 x d
};

struct BaseParams {
  Eigen::MatrixXd tok_emb;   // V x d, tied with the decoder
  Eigen::MatrixXd pos_emb;   // L x d
  Eigen::MatrixXd emb_ln_g, emb_ln_b;
  std::vector<LayerParams> layers;
  Eigen::MatrixXd head_w, head_b;  // d x d, 1 x d
  Eigen::MatrixXd head_ln_g, head_ln_b;
  Eigen::MatrixXd out_bias;  // 1 x V

  // Zero tensors with the shapes implied by `cfg`.
  static BaseParams zeros(const ModelConfig& cfg);

  // Visits every tensor in a fixed order with a stable name.
  template <class Self, class F>
  static void visit(Self& self, F&& f) {
    f("tok_emb", self.tok_emb);
    f("pos_emb", self.pos_emb);
    f("emb_ln_g", self.emb_ln_g);
    f("emb_ln_b", self.emb_ln_b);
    for (std::size_t i = 0; i < self.layers.size(); ++i) {
      auto& l = self.layers[i];
      const std::string p = "layer" + std::to_string(i) + ".";
      f(p + "wq", l.wq); f(p + "bq", l.bq);
      f(p + "wk", l.wk); f(p + "bk", l.bk);
      f(p + "wv", l.wv); f(p + "bv", l.bv);
      f(p + "wo", l.wo); f(p + "bo", l.bo);
      f(p + "ln1_g", l.ln1_g); f(p + "ln1_b", l.ln1_b);
      f(p + "w1", l.w1); f(p + "b1", l.b1);
      f(p + "w2", l.w2); f(p + "b2", l.b2);
      f(p + "ln2_g", l.ln2_g); f(p + "ln2_b", l.ln2_b);
    }
    f("head_w", self.head_w);
    f("head_b", self.head_b);
    f("head_ln_g", self.head_ln_g);
    f("head_ln_b", self.head_ln_b);
    f("out_bias", self.out_bias);
  }
  template <class F> void for_each(F&& f) { visit(*this, std::forward<F>(f)); }
  template <class F> void for_each(F&& f) const { visit(*this, std::forward<F>(f)); }

  friend bool operator==(const BaseParams& a, const BaseParams& b);
};

// Trainable state of the overlay: one tied row and one bias per novel token.
struct NovelParams {
  Eigen::MatrixXd rows;  // n x d
  Eigen::MatrixXd bias;  // 1 x n
};

// One masked-prediction example. `tokens` holds "[MASK]" at target_position.
struct TrainingInstance {
  TokenSequence tokens;
  std::size_t target_position = 0;
  std::string target;  // novel token name
};

struct LossAndGrads {
  double loss = 0.0;
  NovelParams grads;
};

class MaskedLM {
 public:
  MaskedLM(ModelConfig cfg, BaseParams params);

  // Random initialization: N(0, init_std) weights, unit layer-norm gains,
  // zero biases.
  static MaskedLM initialize(const ModelConfig& cfg, std::uint64_t seed, double init_std = 0.02);

  const ModelConfig& config() const { return cfg_; }
  const Vocabulary& vocabulary() const { return vocab_; }
  const BaseParams& params() const { return params_; }
  BaseParams& mutable_params() { return params_; }

  // Little-endian binary checkpoint; load(save(m)) is bit-identical.
  void save(const std::string& path) const;
  std::string serialize() const;
  static MaskedLM load(const std::string& path);
  static MaskedLM deserialize(std::string_view bytes);

 private:
  ModelConfig cfg_;
  Vocabulary vocab_;
  BaseParams params_;
};

// A MaskedLM plus a private set of novel tokens. The referenced MaskedLM must
// outlive the overlay and is never modified through it.
class ExtendedModel {
 public:
  explicit ExtendedModel(const MaskedLM& base);

  const MaskedLM& base() const { return *base_; }
  std::size_t model_dim() const { return base_->config().model_dim; }
  std::size_t base_vocab_size() const { return base_->vocabulary().size(); }
  std::size_t vocab_size() const { return base_vocab_size() + novel_names_.size(); }
  std::size_t novel_count() const { return novel_names_.size(); }
  const std::vector<std::string>& novel_names() const { return novel_names_; }

  // Ids >= base_vocab_size() are novel. Throws InputError for unknown tokens.
  TokenId id_of(std::string_view token) const;
  bool is_novel(TokenId id) const { return id >= base_vocab_size(); }
  std::string token(TokenId id) const;

  // Adds fresh tokens. Each row is drawn from N(mean, sd) of the base
  // embedding matrix entries; biases start at 0. Returns the new ids.
  std::vector<TokenId> extend_vocab(std::span<const std::string> names, std::uint64_t seed);

  // Per-position distributions (rows) over the full current vocabulary.
  Eigen::MatrixXd forward(const TokenSequence& seq) const;
  // Logits at one position.
  Eigen::VectorXd logits_at(const TokenSequence& seq, std::size_t position) const;
  // Mass on `token` at a "[MASK]" position.
  double token_probability(const TokenSequence& seq, std::size_t position,
                           std::string_view token) const;

  // Mean cross-entropy over the batch and exact gradients for the overlay.
  LossAndGrads mlm_loss_and_grads(std::span<const TrainingInstance> batch) const;

  Eigen::VectorXd embedding_of(std::string_view token) const;

  NovelParams& novel() { return novel_; }
  const NovelParams& novel() const { return novel_; }

 private:
  std::vector<TokenId> encode(const TokenSequence& seq) const;

  const MaskedLM* base_;
  std::vector<std::string> novel_names_;
  NovelParams novel_;
};

struct PretrainOptions {
  std::size_t epochs = 6;
  std::size_t batch_size = 32;
  double learning_rate = 2e-3;
  double weight_decay = 0.01;
  double init_std = 0.02;
  // Tokens never chosen as prediction targets (closed-class words).
  std::vector<std::string> unmaskable;
  // Optional per-epoch progress hook: (epoch, mean loss).
  std::function<void(std::size_t, double)> on_epoch;
};

struct PretrainResult {
  MaskedLM model;
  std::vector<double> epoch_losses;
  double final_loss = 0.0;
};

// Masked-LM pretraining over the full base parameter set. Each sentence gets
// every content position masked with probability cfg.mlm_mask_rate (at least
// one per sentence), always replaced by "[MASK]".
PretrainResult pretrain(std::span<const TokenSequence> corpus, const ModelConfig& cfg,
                        std::uint64_t seed, const PretrainOptions& opts = {});

// Internal entry points shared with pretraining and exposed for tests.
namespace detail {

// Loss of predicting `targets[i]` at `positions[i]` (all positions of one
// sequence, ids include start/end), accumulating gradients scaled by `scale`.
// Null gradient pointers skip that part of the backward pass.
double sequence_loss_and_grads(const BaseParams& base, const NovelParams* novel,
                               const ModelConfig& cfg, std::span<const TokenId> ids,
                               std::span<const std::size_t> positions,
                               std::span<const TokenId> targets, double scale,
                               BaseParams* base_grads, NovelParams* novel_grads);

}  // namespace detail

}  // namespace wugbench

#endif  // WUGBENCH_MODEL_HPP_
