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


#ifndef WUGBENCH_CONFIG_HPP_
#define WUGBENCH_CONFIG_HPP_

// Run configuration file: one JSON object with optional sections "model",
// "pretrain", "finetune" and "probe". Missing keys keep their defaults;
// unknown keys are rejected.

#include <cstddef>
#include <string>
#include <string_view>

#include "wugbench/finetune.hpp"
#include "wugbench/model.hpp"
#include "wugbench/probe.hpp"

namespace wugbench {

struct RunConfig {
  ModelConfig model;  // vocabulary comes from the grammar, not the file
  PretrainOptions pretrain;
  std::size_t corpus_sentences = 10000;
  FineTuneConfig finetune;
  ProbeConfig probe;
};

RunConfig run_config_from_json(std::string_view text);
RunConfig load_run_config(const std::string& path);
// Every recognised key, including defaults; vocabulary omitted.
std::string run_config_to_json(const RunConfig& cfg);

}  // namespace wugbench

#endif  // WUGBENCH_CONFIG_HPP_
