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


#include "wugbench/model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <map>
#include <random>

#include "test_util.hpp"
#include "wugbench/error.hpp"
#include "wugbench/synthcorpus.hpp"

namespace wugbench {
namespace {

using testing::toy_model;

TokenSequence seq(std::vector<std::string> toks) { return make_sequence(std::move(toks)); }

// Central finite differences of the batch loss over every novel parameter.
NovelParams numeric_grads(ExtendedModel& m, const std::vector<TrainingInstance>& batch,
                          double eps) {
  NovelParams g{Eigen::MatrixXd::Zero(m.novel().rows.rows(), m.novel().rows.cols()),
                Eigen::MatrixXd::Zero(1, m.novel().bias.cols())};
  auto perturb = [&](double& x, double& out) {
    const double keep = x;
    x = keep + eps;
    const double up = m.mlm_loss_and_grads(batch).loss;
    x = keep - eps;
    const double down = m.mlm_loss_and_grads(batch).loss;
    x = keep;
    out = (up - down) / (2 * eps);
  };
  for (Eigen::Index i = 0; i < g.rows.rows(); ++i)
    for (Eigen::Index j = 0; j < g.rows.cols(); ++j) perturb(m.novel().rows(i, j), g.rows(i, j));
  for (Eigen::Index j = 0; j < g.bias.cols(); ++j) perturb(m.novel().bias(0, j), g.bias(0, j));
  return g;
}

double relative_error(const NovelParams& a, const NovelParams& b) {
  const double diff = std::sqrt((a.rows - b.rows).squaredNorm() + (a.bias - b.bias).squaredNorm());
  const double scale = std::max(std::sqrt(a.rows.squaredNorm() + a.bias.squaredNorm()),
                                std::sqrt(b.rows.squaredNorm() + b.bias.squaredNorm()));
  return diff / std::max(scale, 1e-12);
}

TEST(Forward, DistributionsNormalize) {
  std::mt19937_64 rng(3);
  const auto vocab = testing::toy_vocabulary();
  for (std::uint64_t s = 0; s < 5; ++s) {
    const MaskedLM base = toy_model(s);
    ExtendedModel m(base);
    const std::string names[] = {"wug", "dax"};
    m.extend_vocab(names, s);
    for (int call = 0; call < 40; ++call) {
      std::vector<std::string> toks;
      const std::size_t len = 1 + rng() % 10;
      for (std::size_t i = 0; i < len; ++i) {
        const std::size_t r = rng() % (vocab.size() + 2);
        toks.push_back(r < vocab.size() ? vocab[r] : names[r - vocab.size()]);
      }
      const Eigen::MatrixXd p = m.forward(seq(toks));
      ASSERT_EQ(p.rows(), static_cast<Eigen::Index>(len));
      ASSERT_EQ(p.cols(), static_cast<Eigen::Index>(m.vocab_size()));
      for (Eigen::Index r = 0; r < p.rows(); ++r) {
        EXPECT_NEAR(p.row(r).sum(), 1.0, 1e-6);
        EXPECT_GE(p.row(r).minCoeff(), 0.0);
      }
    }
  }
}

TEST(Forward, ZeroHeadGivesUniform) {
  MaskedLM base = toy_model(1);
  base.mutable_params().head_ln_g.setZero();
  base.mutable_params().head_ln_b.setZero();
  base.mutable_params().out_bias.setZero();
  ExtendedModel m(base);
  const Eigen::MatrixXd p = m.forward(seq({"the", "[MASK]", "will", "run"}));
  const double v = static_cast<double>(m.vocab_size());
  for (Eigen::Index i = 0; i < p.size(); ++i) EXPECT_NEAR(p.data()[i], 1.0 / v, 1e-15);
}

TEST(Forward, TokenProbabilityMatchesForward) {
  const MaskedLM base = toy_model(2);
  ExtendedModel m(base);
  const std::string names[] = {"wug"};
  m.extend_vocab(names, 4);
  const auto s = seq({"the", "[MASK]", "will", "wug", "the", "dog"});
  const Eigen::MatrixXd p = m.forward(s);
  double total = 0;
  for (std::size_t id = 0; id < m.vocab_size(); ++id) {
    const double q = m.token_probability(s, 1, m.token(id));
    EXPECT_NEAR(q, p(1, static_cast<Eigen::Index>(id)), 1e-15);
    total += q;
  }
  EXPECT_NEAR(total, 1.0, 1e-6);
  EXPECT_THROW(m.token_probability(s, 0, "dog"), UsageError);
  EXPECT_THROW(m.token_probability(s, 1, "blicket"), InputError);
  EXPECT_THROW(m.forward(seq({"the", "blicket"})), InputError);
  std::vector<std::string> longer(11, "the");
  EXPECT_THROW(m.forward(seq(longer)), InputError);
}

TEST(ExtendVocab, SizesAndFrozenBaseLogits) {
  const MaskedLM base = toy_model(5);
  ExtendedModel m(base);
  const auto s = seq({"the", "[MASK]", "will", "run", "a", "ball"});
  const Eigen::VectorXd before = m.logits_at(s, 1);
  std::vector<std::string> names;
  for (int i = 0; i < 12; ++i) names.push_back("nonce" + std::to_string(i));
  const auto ids = m.extend_vocab(names, 9);
  EXPECT_EQ(ids.size(), 12u);
  EXPECT_EQ(m.vocab_size(), base.vocabulary().size() + 12);
  const Eigen::VectorXd after = m.logits_at(s, 1);
  ASSERT_EQ(after.size(), before.size() + 12);
  for (Eigen::Index i = 0; i < before.size(); ++i)
    EXPECT_EQ(std::memcmp(&before(i), &after(i), sizeof(double)), 0);
  const std::string clash[] = {"dog"};
  EXPECT_THROW(m.extend_vocab(clash, 1), InputError);
  const std::string again[] = {"nonce3"};
  EXPECT_THROW(m.extend_vocab(again, 1), InputError);
}

TEST(ExtendVocab, InitializationFollowsBaseStatistics) {
  const MaskedLM base = toy_model(6);
  const auto& e = base.params().tok_emb;
  const double mean = e.mean();
  const double sd = std::sqrt((e.array() - mean).square().sum() / static_cast<double>(e.size()));
  ExtendedModel m(base);
  std::vector<std::string> names;
  for (int i = 0; i < 2000; ++i) names.push_back("n" + std::to_string(i));
  m.extend_vocab(names, 1);
  const auto& r = m.novel().rows;
  const double rm = r.mean();
  const double rsd = std::sqrt((r.array() - rm).square().sum() / static_cast<double>(r.size()));
  EXPECT_NEAR(rm, mean, 4 * sd / std::sqrt(static_cast<double>(r.size())));
  EXPECT_NEAR(rsd / sd, 1.0, 0.02);
  EXPECT_TRUE((m.novel().bias.array() == 0.0).all());
  EXPECT_EQ(m.embedding_of("n7"), Eigen::VectorXd(r.row(7).transpose()));
  EXPECT_EQ(m.embedding_of("dog").size(), 16);
  EXPECT_THROW(m.embedding_of("zzz"), InputError);

  ExtendedModel m2(base);
  m2.extend_vocab(names, 1);
  EXPECT_EQ(m2.novel().rows, r);
}

TEST(Tying, OneVectorDrivesInputAndOutput) {
  const MaskedLM base = toy_model(7);
  ExtendedModel m(base);
  const std::string names[] = {"wug"};
  m.extend_vocab(names, 2);
  const auto out_ctx = seq({"the", "[MASK]", "will", "run"});
  const auto in_ctx = seq({"the", "[MASK]", "will", "wug"});
  const double p_out = m.token_probability(out_ctx, 1, "wug");
  const double p_in = m.token_probability(in_ctx, 1, "dog");
  m.novel().rows(0, 3) += 0.5;
  EXPECT_NE(m.token_probability(out_ctx, 1, "wug"), p_out);
  EXPECT_NE(m.token_probability(in_ctx, 1, "dog"), p_in);
  EXPECT_EQ(m.embedding_of("wug")(3), m.novel().rows(0, 3));
}

class GradientOracle : public ::testing::TestWithParam<int> {};

TEST_P(GradientOracle, MatchesCentralDifferences) {
  const std::uint64_t s = static_cast<std::uint64_t>(GetParam());
  const MaskedLM base = toy_model(100 + s);
  ExtendedModel m(base);
  const std::string names[] = {"wug", "dax", "blick"};
  m.extend_vocab(names, s);
  std::vector<TrainingInstance> batch = {
      {seq({"the", "[MASK]", "will", "dax", "the", "blick"}), 1, "wug"},
      {seq({"the", "wug", "[MASK]", "the", "blick"}), 2, "dax"},
      {seq({"[MASK]", "will", "run", "to", "a", "dog"}), 0, "blick"},
  };
  const auto analytic = m.mlm_loss_and_grads(batch);
  const auto numeric = numeric_grads(m, batch, 1e-3);
  EXPECT_LE(relative_error(analytic.grads, numeric), 1e-4);
  EXPECT_GT(analytic.grads.rows.norm(), 1e-6);
}

INSTANTIATE_TEST_SUITE_P(RandomConfigs, GradientOracle, ::testing::Range(0, 20));

TEST(Loss, MeanInvarianceAndOptimum) {
  const MaskedLM base = toy_model(8);
  ExtendedModel m(base);
  const std::string names[] = {"wug"};
  m.extend_vocab(names, 1);
  const TrainingInstance inst{seq({"the", "[MASK]", "will", "run"}), 1, "wug"};
  const std::vector<TrainingInstance> one = {inst}, two = {inst, inst};
  const auto a = m.mlm_loss_and_grads(one), b = m.mlm_loss_and_grads(two);
  EXPECT_DOUBLE_EQ(a.loss, b.loss);
  EXPECT_NEAR((a.grads.rows - b.grads.rows).norm(), 0.0, 1e-15);

  m.novel().bias(0, 0) = 1e3;
  const auto opt = m.mlm_loss_and_grads(one);
  EXPECT_EQ(opt.loss, 0.0);
  EXPECT_EQ(opt.grads.rows.norm(), 0.0);
  EXPECT_EQ(opt.grads.bias.norm(), 0.0);

  const std::vector<TrainingInstance> bad = {{seq({"the", "[MASK]"}), 1, "dog"}};
  EXPECT_THROW(m.mlm_loss_and_grads(bad), UsageError);
  const std::vector<TrainingInstance> unmasked = {{seq({"the", "dog"}), 1, "wug"}};
  EXPECT_THROW(m.mlm_loss_and_grads(unmasked), UsageError);
}

TEST(Checkpoint, RoundTripIsBitIdentical) {
  const MaskedLM a = toy_model(9);
  const std::string bytes = a.serialize();
  ASSERT_GE(bytes.size(), 16u);
  EXPECT_EQ(bytes.substr(0, 8), "WUGBCKPT");
  // Version 1 and byte-order mark, little-endian.
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 1);
  EXPECT_EQ(static_cast<unsigned char>(bytes[12]), 0x04);
  EXPECT_EQ(static_cast<unsigned char>(bytes[15]), 0x01);
  const MaskedLM b = MaskedLM::deserialize(bytes);
  EXPECT_TRUE(a.params() == b.params());
  EXPECT_EQ(b.serialize(), bytes);
  EXPECT_EQ(b.config().vocabulary, a.config().vocabulary);

  EXPECT_THROW(MaskedLM::deserialize(bytes.substr(0, bytes.size() - 3)), InputError);
  std::string bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(MaskedLM::deserialize(bad), InputError);
  EXPECT_THROW(MaskedLM::deserialize(bytes + "x"), InputError);
  EXPECT_THROW(MaskedLM::load("/nonexistent/model.ckpt"), InputError);
}

TEST(Config, Validation) {
  auto c = testing::toy_config();
  EXPECT_NO_THROW(c.validate());
  c.n_heads = 3;
  EXPECT_THROW(c.validate(), InputError);
  c = testing::toy_config();
  c.vocabulary.erase(c.vocabulary.begin());
  EXPECT_THROW(c.validate(), InputError);
  c = testing::toy_config();
  c.vocabulary.push_back("[MASK]");
  EXPECT_THROW(c.validate(), InputError);
}

TEST(Pretrain, DeterministicAndValidated) {
  const auto g = build_grammar(default_grammar_spec(), 1);
  const auto corpus = sample_corpus(g, 64, 2);
  ModelConfig cfg;
  cfg.model_dim = 16;
  cfg.n_heads = 2;
  cfg.ffn_dim = 32;
  cfg.vocabulary = g.vocabulary();
  PretrainOptions po;
  po.epochs = 1;
  const auto a = pretrain(corpus, cfg, 5, po), b = pretrain(corpus, cfg, 5, po);
  EXPECT_EQ(a.model.serialize(), b.model.serialize());
  EXPECT_EQ(a.epoch_losses.size(), 1u);
  EXPECT_TRUE(std::isfinite(a.final_loss));

  EXPECT_THROW(pretrain(std::span<const TokenSequence>{}, cfg, 1, po), InputError);
  std::vector<TokenSequence> oov = {seq({"the", "zebra"})};
  EXPECT_THROW(pretrain(oov, cfg, 1, po), InputError);
  std::vector<TokenSequence> longer = {seq(std::vector<std::string>(20, "the"))};
  EXPECT_THROW(pretrain(longer, cfg, 1, po), InputError);
}

// Held-out masked-token accuracy of a briefly pretrained model against the
// uniform-chance rate and a most-frequent-token baseline.
TEST(Pretrain, LearnsTheGrammar) {
  const auto g = build_grammar(default_grammar_spec(), 1);
  const auto train = sample_corpus(g, 2000, 2);
  const auto held_out = sample_corpus(g, 200, 99);
  ModelConfig cfg;
  cfg.vocabulary = g.vocabulary();
  PretrainOptions po;
  po.epochs = 3;
  po.unmaskable = g.spec.closed_class_words;
  const auto res = pretrain(train, cfg, 3, po);
  ExtendedModel m(res.model);

  const std::set<std::string> closed(g.spec.closed_class_words.begin(),
                                     g.spec.closed_class_words.end());
  std::map<std::string, std::size_t> freq;
  for (const auto& s : train)
    for (const auto& t : s.tokens)
      if (!closed.count(t)) ++freq[t];
  std::string most_frequent;
  std::size_t best = 0;
  for (const auto& [t, c] : freq)
    if (c > best) best = c, most_frequent = t;

  std::size_t hits = 0, baseline_hits = 0, total = 0;
  for (const auto& s : held_out) {
    for (std::size_t p = 0; p < s.tokens.size(); ++p) {
      if (closed.count(s.tokens[p])) continue;
      auto toks = s.tokens;
      toks[p] = std::string(kMaskToken);
      Eigen::Index arg;
      m.logits_at(make_sequence(toks), p).maxCoeff(&arg);
      hits += m.token(static_cast<TokenId>(arg)) == s.tokens[p] ? 1 : 0;
      baseline_hits += s.tokens[p] == most_frequent ? 1 : 0;
      ++total;
    }
  }
  const double acc = static_cast<double>(hits) / static_cast<double>(total);
  const double chance = 1.0 / static_cast<double>(cfg.vocabulary.size());
  EXPECT_GE(acc, 5 * chance);
  EXPECT_GT(acc, static_cast<double>(baseline_hits) / static_cast<double>(total));
}

}  // namespace
}  // namespace wugbench
