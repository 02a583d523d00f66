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


#ifndef WUGBENCH_TESTS_TEST_UTIL_HPP_
#define WUGBENCH_TESTS_TEST_UTIL_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "wugbench/model.hpp"
#include "wugbench/vocabulary.hpp"

namespace wugbench::testing {

inline std::vector<std::string> toy_vocabulary() {
  std::vector<std::string> v = {std::string(kMaskToken), std::string(kStartToken),
                                std::string(kEndToken), std::string(kUnknownToken)};
  for (const char* w : {"the", "a", "will", "to", "and", "that", "from", "dog", "cat", "ball",
                        "run", "give", "make"}) {
    v.emplace_back(w);
  }
  return v;
}

inline ModelConfig toy_config(std::size_t dim = 16, std::size_t layers = 2, std::size_t heads = 2) {
  ModelConfig c;
  c.n_layers = layers;
  c.n_heads = heads;
  c.model_dim = dim;
  c.ffn_dim = 2 * dim;
  c.max_sequence_length = 12;
  c.vocabulary = toy_vocabulary();
  return c;
}

// Random small model with weights large enough for non-trivial gradients.
inline MaskedLM toy_model(std::uint64_t seed, std::size_t dim = 16, double init_std = 0.3) {
  MaskedLM m = MaskedLM::initialize(toy_config(dim), seed, init_std);
  // Jitter everything so gains and biases are not at their trivial values.
  std::uint64_t s = seed * 2654435761u + 1;
  auto next = [&s] {
    s = s * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>(s >> 11) / 9007199254740992.0 - 0.5;
  };
  m.mutable_params().for_each([&](const std::string&, Eigen::MatrixXd& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] += 0.2 * next();
  });
  return m;
}

}  // namespace wugbench::testing

#endif  // WUGBENCH_TESTS_TEST_UTIL_HPP_
