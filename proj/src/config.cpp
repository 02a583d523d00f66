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

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "wugbench/error.hpp"

namespace wugbench {
namespace {

using nlohmann::json;

void check_keys(const json& obj, std::string_view where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw InputError("config: " + std::string(where) + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key))
      throw InputError("config: unknown key " + std::string(where) + "." + key);
  }
}

template <typename T>
void read(const json& obj, const char* key, std::string_view where, T& out) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    if constexpr (std::is_same_v<T, std::size_t>) {
      if (!it->is_number_unsigned())
        throw InputError("");
      out = it->template get<std::size_t>();
    } else {
      if (!it->is_number()) throw InputError("");
      out = it->template get<T>();
    }
  } catch (const std::exception&) {
    throw InputError("config: " + std::string(where) + "." + key + " has the wrong type");
  }
}

}  // namespace

RunConfig run_config_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("config: invalid JSON: ") + e.what());
  }
  check_keys(j, "<root>", {"model", "pretrain", "finetune", "probe"});
  RunConfig c;
  if (auto it = j.find("model"); it != j.end()) {
    const json& m = *it;
    check_keys(m, "model",
               {"n_layers", "n_heads", "model_dim", "ffn_dim", "max_sequence_length",
                "mlm_mask_rate"});
    read(m, "n_layers", "model", c.model.n_layers);
    read(m, "n_heads", "model", c.model.n_heads);
    read(m, "model_dim", "model", c.model.model_dim);
    read(m, "ffn_dim", "model", c.model.ffn_dim);
    read(m, "max_sequence_length", "model", c.model.max_sequence_length);
    read(m, "mlm_mask_rate", "model", c.model.mlm_mask_rate);
  }
  if (auto it = j.find("pretrain"); it != j.end()) {
    const json& p = *it;
    check_keys(p, "pretrain",
               {"sentences", "epochs", "batch_size", "lr", "weight_decay", "init_std"});
    read(p, "sentences", "pretrain", c.corpus_sentences);
    read(p, "epochs", "pretrain", c.pretrain.epochs);
    read(p, "batch_size", "pretrain", c.pretrain.batch_size);
    read(p, "lr", "pretrain", c.pretrain.learning_rate);
    read(p, "weight_decay", "pretrain", c.pretrain.weight_decay);
    read(p, "init_std", "pretrain", c.pretrain.init_std);
    if (c.corpus_sentences == 0 || c.pretrain.epochs == 0 || c.pretrain.batch_size == 0)
      throw InputError("config: pretrain counts must be >= 1");
    if (!(c.pretrain.learning_rate > 0) || c.pretrain.weight_decay < 0 ||
        !(c.pretrain.init_std > 0))
      throw InputError("config: pretrain.lr and init_std must be > 0, weight_decay >= 0");
  }
  if (auto it = j.find("finetune"); it != j.end()) {
    const json& f = *it;
    check_keys(f, "finetune", {"lr", "epochs", "adam"});
    read(f, "lr", "finetune", c.finetune.learning_rate);
    read(f, "epochs", "finetune", c.finetune.epochs);
    if (auto a = f.find("adam"); a != f.end()) {
      check_keys(*a, "finetune.adam", {"beta1", "beta2", "eps"});
      read(*a, "beta1", "finetune.adam", c.finetune.beta1);
      read(*a, "beta2", "finetune.adam", c.finetune.beta2);
      read(*a, "eps", "finetune.adam", c.finetune.epsilon);
    }
  }
  if (auto it = j.find("probe"); it != j.end()) {
    check_keys(*it, "probe", {"lr", "epochs"});
    read(*it, "lr", "probe", c.probe.learning_rate);
    read(*it, "epochs", "probe", c.probe.epochs);
  }
  try {
    c.finetune.validate();
    c.probe.validate();
  } catch (const UsageError& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return run_config_from_json(ss.str());
}

std::string run_config_to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["model"] = {{"n_layers", c.model.n_layers},
                {"n_heads", c.model.n_heads},
                {"model_dim", c.model.model_dim},
                {"ffn_dim", c.model.ffn_dim},
                {"max_sequence_length", c.model.max_sequence_length},
                {"mlm_mask_rate", c.model.mlm_mask_rate}};
  j["pretrain"] = {{"sentences", c.corpus_sentences},
                   {"epochs", c.pretrain.epochs},
                   {"batch_size", c.pretrain.batch_size},
                   {"lr", c.pretrain.learning_rate},
                   {"weight_decay", c.pretrain.weight_decay},
                   {"init_std", c.pretrain.init_std}};
  nlohmann::ordered_json adam = {{"beta1", c.finetune.beta1},
                                 {"beta2", c.finetune.beta2},
                                 {"eps", c.finetune.epsilon}};
  j["finetune"] = {{"lr", c.finetune.learning_rate},
                   {"epochs", c.finetune.epochs},
                   {"adam", adam}};
  j["probe"] = {{"lr", c.probe.learning_rate}, {"epochs", c.probe.epochs}};
  return j.dump(2) + "\n";
}

}  // namespace wugbench
