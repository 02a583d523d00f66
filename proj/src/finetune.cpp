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

#include "wugbench/finetune.hpp"

#include <cmath>

#include "wugbench/adam.hpp"
#include "wugbench/error.hpp"

namespace wugbench {

void FineTuneConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw UsageError("finetune: learning rate must be >= 0");
  if (epochs < 1) throw UsageError("finetune: epochs must be >= 1");
}

std::vector<TrainingInstance> build_instances(const std::vector<TokenSequence>& sentences,
                                              const std::set<std::string>& novel_names) {
  std::vector<TrainingInstance> out;
  for (const auto& s : sentences) {
    std::size_t found = 0;
    for (std::size_t p = 0; p < s.tokens.size(); ++p) {
      if (!novel_names.contains(s.tokens[p])) continue;
      ++found;
      std::vector<std::string> toks = s.tokens;
      toks[p] = std::string(kMaskToken);
      out.push_back({make_sequence(std::move(toks)), p, s.tokens[p]});
    }
    if (found == 0) {
      throw InputError("build_instances: sentence has no novel token: '" + s.str() + "'");
    }
  }
  return out;
}

FineTuneResult run_finetune(ExtendedModel& model, const std::vector<TokenSequence>& sentences,
                            const FineTuneConfig& cfg) {
  cfg.validate();
  const std::set<std::string> names(model.novel_names().begin(), model.novel_names().end());
  const auto instances = build_instances(sentences, names);

  Adam opt({cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon, 0.0});
  auto& novel = model.novel();
  Eigen::MatrixXd* params[] = {&novel.rows, &novel.bias};

  FineTuneResult result;
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    const auto lg = model.mlm_loss_and_grads(instances);
    if (!std::isfinite(lg.loss)) {
      throw NumericError("finetune: non-finite loss at epoch " + std::to_string(e + 1));
    }
    result.loss_trace.push_back(lg.loss);
    const Eigen::MatrixXd* grads[] = {&lg.grads.rows, &lg.grads.bias};
    opt.step(params, grads);
  }
  return result;
}

}  // namespace wugbench
