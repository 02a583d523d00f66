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


#include "wugbench/config.hpp"

#include <gtest/gtest.h>

#include "wugbench/error.hpp"

namespace wugbench {
namespace {

TEST(RunConfig, DefaultsFollowTheProtocol) {
  const auto c = run_config_from_json("{}");
  EXPECT_EQ(c.finetune.learning_rate, 1e-3);
  EXPECT_EQ(c.finetune.epochs, 10u);
  EXPECT_EQ(c.finetune.beta1, 0.9);
  EXPECT_EQ(c.finetune.beta2, 0.999);
  EXPECT_EQ(c.finetune.epsilon, 1e-8);
  EXPECT_EQ(c.probe.learning_rate, 1e-1);
  EXPECT_EQ(c.probe.epochs, 20u);
}

TEST(RunConfig, ReadsEveryKeyAndRoundTrips) {
  const char* text = R"({
    "model": {"n_layers": 1, "n_heads": 2, "model_dim": 8, "ffn_dim": 16,
              "max_sequence_length": 10, "mlm_mask_rate": 0.2},
    "pretrain": {"sentences": 50, "epochs": 2, "batch_size": 4, "lr": 0.01,
                 "weight_decay": 0.0, "init_std": 0.05},
    "finetune": {"lr": 0.02, "epochs": 3, "adam": {"beta1": 0.8, "beta2": 0.99, "eps": 1e-6}},
    "probe": {"lr": 0.5, "epochs": 4}})";
  const auto c = run_config_from_json(text);
  EXPECT_EQ(c.model.n_layers, 1u);
  EXPECT_EQ(c.model.model_dim, 8u);
  EXPECT_EQ(c.model.mlm_mask_rate, 0.2);
  EXPECT_EQ(c.corpus_sentences, 50u);
  EXPECT_EQ(c.pretrain.batch_size, 4u);
  EXPECT_EQ(c.pretrain.init_std, 0.05);
  EXPECT_EQ(c.finetune.learning_rate, 0.02);
  EXPECT_EQ(c.finetune.beta1, 0.8);
  EXPECT_EQ(c.finetune.epsilon, 1e-6);
  EXPECT_EQ(c.probe.epochs, 4u);
  const auto back = run_config_from_json(run_config_to_json(c));
  EXPECT_EQ(run_config_to_json(back), run_config_to_json(c));
}

TEST(RunConfig, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(run_config_from_json(R"({"extra": 1})"), InputError);
  EXPECT_THROW(run_config_from_json(R"({"finetune": {"learning_rate": 1}})"), InputError);
  EXPECT_THROW(run_config_from_json(R"({"finetune": {"adam": {"beta3": 1}}})"), InputError);
  EXPECT_THROW(run_config_from_json(R"({"finetune": {"epochs": 0}})"), InputError);
  EXPECT_THROW(run_config_from_json(R"({"finetune": {"epochs": -1}})"), InputError);
  EXPECT_THROW(run_config_from_json(R"({"probe": {"lr": "fast"}})"), InputError);
  EXPECT_THROW(run_config_from_json("[1"), InputError);
  EXPECT_THROW(load_run_config("/nonexistent/config.json"), InputError);
}

TEST(RunConfig, ShippedDeskPresetLoads) {
  const auto c = load_run_config(WUGBENCH_DATA_DIR "/desk_config.json");
  EXPECT_EQ(c.model.model_dim, 64u);
  EXPECT_EQ(c.corpus_sentences, 10000u);
  EXPECT_EQ(c.finetune.epochs, 10u);
}

}  // namespace
}  // namespace wugbench
