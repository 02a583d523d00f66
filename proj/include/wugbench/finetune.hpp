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

#ifndef WUGBENCH_FINETUNE_HPP_
#define WUGBENCH_FINETUNE_HPP_

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "wugbench/model.hpp"
#include "wugbench/stimuli.hpp"

namespace wugbench {

struct FineTuneConfig {
  double learning_rate = 1e-3;
  std::size_t epochs = 10;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Seeds novel-row initialization in the experiment drivers.
  std::uint64_t seed = 0;

  void validate() const;
};

// One instance per novel-token occurrence: that occurrence becomes the masked
// target, everything else (other novel tokens included) stays visible.
std::vector<TrainingInstance> build_instances(const std::vector<TokenSequence>& sentences,
                                              const std::set<std::string>& novel_names);

struct FineTuneResult {
  std::vector<double> loss_trace;  // loss before each update, one per epoch
};

// cfg.epochs full-batch Adam steps on the overlay's novel parameters, with a
// fresh optimizer state. Base parameters are never touched.
FineTuneResult run_finetune(ExtendedModel& model, const std::vector<TokenSequence>& sentences,
                            const FineTuneConfig& cfg);

}  // namespace wugbench

#endif  // WUGBENCH_FINETUNE_HPP_
