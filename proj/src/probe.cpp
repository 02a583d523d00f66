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

#include "wugbench/probe.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "wugbench/adam.hpp"
#include "wugbench/error.hpp"

namespace wugbench {

void ProbeConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw UsageError("probe: learning rate must be >= 0");
  if (epochs < 1) throw UsageError("probe: epochs must be >= 1");
}

LinearProbe LinearProbe::zeros(std::size_t dim) {
  return {Eigen::MatrixXd::Zero(2, static_cast<Eigen::Index>(dim)), Eigen::VectorXd::Zero(2)};
}

Eigen::Vector2d LinearProbe::logits(const Eigen::VectorXd& x) const {
  if (x.size() != weight.cols()) {
    throw UsageError("probe: vector has dimension " + std::to_string(x.size()) + ", expected " +
                     std::to_string(weight.cols()));
  }
  return weight * x + bias;
}

LabeledEmbeddings make_dataset(const ExtendedModel& model, const std::vector<std::string>& inclass,
                               const std::vector<std::string>& outclass) {
  if (inclass.empty() || outclass.empty()) throw UsageError("probe dataset: empty verb list");
  const std::set<std::string> in(inclass.begin(), inclass.end());
  for (const auto& w : outclass) {
    if (in.contains(w)) throw UsageError("probe dataset: verb '" + w + "' is in both lists");
  }
  LabeledEmbeddings data;
  data.x.resize(static_cast<Eigen::Index>(inclass.size() + outclass.size()),
                static_cast<Eigen::Index>(model.model_dim()));
  Eigen::Index row = 0;
  auto add = [&](const std::string& w, int label) {
    if (!model.base().vocabulary().contains(w)) {
      throw InputError("probe dataset: verb '" + w + "' is not in the base vocabulary");
    }
    data.x.row(row++) = model.embedding_of(w).transpose();
    data.labels.push_back(label);
    data.words.push_back(w);
  };
  for (const auto& w : inclass) add(w, 1);
  for (const auto& w : outclass) add(w, 0);
  return data;
}

TrainedProbe train_probe(const LabeledEmbeddings& data, const ProbeConfig& cfg) {
  cfg.validate();
  const auto has = [&](int l) {
    return std::find(data.labels.begin(), data.labels.end(), l) != data.labels.end();
  };
  if (!has(0) || !has(1)) throw UsageError("probe: dataset needs both labels");

  const auto n = data.x.rows();
  LinearProbe probe = LinearProbe::zeros(static_cast<std::size_t>(data.x.cols()));
  Eigen::MatrixXd w = probe.weight;
  Eigen::MatrixXd b = probe.bias;  // 2 x 1
  Adam opt({cfg.learning_rate, 0.9, 0.999, 1e-8, 0.0});
  Eigen::MatrixXd* params[] = {&w, &b};

  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    Eigen::MatrixXd z = data.x * w.transpose();  // n x 2
    z.rowwise() += b.col(0).transpose();
    Eigen::MatrixXd dz(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double mx = z.row(i).maxCoeff();
      const Eigen::RowVector2d ez = (z.row(i).array() - mx).exp();
      dz.row(i) = ez / ez.sum();
      dz(i, data.labels[static_cast<std::size_t>(i)]) -= 1.0;
    }
    dz /= static_cast<double>(n);
    const Eigen::MatrixXd gw = dz.transpose() * data.x;
    const Eigen::MatrixXd gb = dz.colwise().sum().transpose();
    const Eigen::MatrixXd* grads[] = {&gw, &gb};
    opt.step(params, grads);
  }
  probe.weight = w;
  probe.bias = b.col(0);

  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (classify(probe, data.x.row(i).transpose()).label == data.labels[static_cast<std::size_t>(i)]) {
      ++correct;
    }
  }
  return {probe, static_cast<double>(correct) / static_cast<double>(n)};
}

Classification classify(const LinearProbe& probe, const Eigen::VectorXd& x) {
  const Eigen::Vector2d z = probe.logits(x);
  const double diff = z(1) - z(0);
  // Logistic of the logit difference is the 2-way softmax class-1 mass.
  const double score = diff >= 0 ? 1.0 / (1.0 + std::exp(-diff))
                                 : std::exp(diff) / (1.0 + std::exp(diff));
  return {z(1) > z(0) ? 1 : 0, score};
}

std::string OutClassSource::describe() const {
  return kind == Kind::kDistractor ? "distractor" : "wordlist";
}

std::vector<std::string> outclass_verbs(const AlternationSpec& spec, const OutClassSource& source) {
  if (source.kind == OutClassSource::Kind::kDistractor) return spec.distractor_verbs;
  std::set<std::string> exclude(spec.inclass_verbs.begin(), spec.inclass_verbs.end());
  exclude.insert(spec.distractor_verbs.begin(), spec.distractor_verbs.end());
  std::vector<std::string> out;
  for (const auto& w : source.words) {
    if (!exclude.contains(w)) out.push_back(w);
  }
  return out;
}

std::vector<std::string> load_word_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open word list '" + path + "'");
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string w;
    if (ss >> w) words.push_back(w);
  }
  if (words.empty()) throw InputError("word list '" + path + "' is empty");
  return words;
}

ProbeOutcome probe_novel_verb(const MaskedLM& model, const AlternationSpec& spec,
                              FrameSide train_frame, const LinearProbe& probe,
                              const FineTuneConfig& ft) {
  const auto& train = spec.frame(train_frame);
  check_function_words(train, model.vocabulary());
  ExtendedModel ext(model);
  const std::string name = train.label;
  const std::string names[] = {name};
  ext.extend_vocab(names, ft.seed);
  run_finetune(ext, {render(train, name, &model.vocabulary())}, ft);
  const auto c = classify(probe, ext.embedding_of(name));
  return {0, c.label, c.score};
}

ProbeExperimentResult probe_experiment(const MaskedLM& model,
                                       const std::vector<AlternationSpec>& battery,
                                       std::string_view spec_id, FrameSide train_frame,
                                       const OutClassSource& source, const FineTuneConfig& ft,
                                       const ProbeConfig& pc, const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw UsageError("probe_experiment: n_seeds must be >= 1");
  const auto& spec = find_spec(battery, spec_id);
  const ExtendedModel view(model);
  const auto trained =
      train_probe(make_dataset(view, spec.inclass_verbs, outclass_verbs(spec, source)), pc);

  ProbeExperimentResult r;
  r.alternation_id = spec.id;
  r.train_frame = train_frame;
  r.train_accuracy = trained.train_accuracy;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    FineTuneConfig cfg = ft;
    cfg.seed = seeds[i];
    auto o = probe_novel_verb(model, spec, train_frame, trained.probe, cfg);
    o.seed_index = i;
    hits += o.label == 1 ? 1 : 0;
    r.outcomes.push_back(o);
  }
  r.accuracy = static_cast<double>(hits) / static_cast<double>(seeds.size());
  return r;
}

}  // namespace wugbench
