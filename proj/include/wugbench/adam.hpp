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

#ifndef WUGBENCH_ADAM_HPP_
#define WUGBENCH_ADAM_HPP_

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "wugbench/error.hpp"

namespace wugbench {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Decoupled (AdamW) decay; zero for fine-tuning and probes.
  double weight_decay = 0.0;
};

// Bias-corrected Adam over a fixed list of dense tensors. Moments are
// zero-initialized and sized on the first step.
class Adam {
 public:
  explicit Adam(AdamConfig cfg) : cfg_(cfg) {
    if (!(cfg.learning_rate >= 0.0)) throw UsageError("adam: learning rate must be >= 0");
    if (cfg.beta1 < 0.0 || cfg.beta1 >= 1.0 || cfg.beta2 < 0.0 || cfg.beta2 >= 1.0) {
      throw UsageError("adam: betas must lie in [0, 1)");
    }
  }

  void step(std::span<Eigen::MatrixXd* const> params,
            std::span<const Eigen::MatrixXd* const> grads) {
    if (params.size() != grads.size()) throw UsageError("adam: params/grads size mismatch");
    if (m_.empty()) {
      for (const auto* p : params) {
        m_.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
        v_.push_back(Eigen::MatrixXd::Zero(p->rows(), p->cols()));
      }
    }
    if (m_.size() != params.size()) throw UsageError("adam: tensor count changed between steps");
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& p = *params[i];
      const auto& g = *grads[i];
      auto& m = m_[i];
      auto& v = v_[i];
      for (Eigen::Index k = 0; k < p.size(); ++k) {
        const double gk = g.data()[k];
        m.data()[k] = cfg_.beta1 * m.data()[k] + (1.0 - cfg_.beta1) * gk;
        v.data()[k] = cfg_.beta2 * v.data()[k] + (1.0 - cfg_.beta2) * gk * gk;
        const double mhat = m.data()[k] / c1;
        const double vhat = v.data()[k] / c2;
        p.data()[k] -= cfg_.learning_rate *
                       (mhat / (std::sqrt(vhat) + cfg_.epsilon) + cfg_.weight_decay * p.data()[k]);
      }
    }
  }

  void set_learning_rate(double lr) { cfg_.learning_rate = lr; }
  std::size_t steps() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  std::size_t t_ = 0;
  std::vector<Eigen::MatrixXd> m_, v_;
};

}  // namespace wugbench

#endif  // WUGBENCH_ADAM_HPP_
