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


// wugbench command-line driver.
//
//   wugbench pretrain     --grammar G --config C --out M --seed N
//   wugbench alternations --model M --battery B --seeds N --out DIR
//   wugbench selectional  --model M --seeds N --out DIR
//   wugbench probe        --model M --battery B --outclass distractor|wordlist:PATH
//                         --seeds N --out DIR [--compare SUMMARY]
//   wugbench corpus       --grammar G --sentences N --seed N --out FILE
//
// Exit codes: 0 success, 1 usage, 2 input error, 3 numeric failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wugbench/config.hpp"
#include "wugbench/error.hpp"
#include "wugbench/experiments.hpp"
#include "wugbench/report.hpp"
#include "wugbench/synthcorpus.hpp"

#ifndef WUGBENCH_VERSION
#define WUGBENCH_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace wugbench;
using nlohmann::ordered_json;

namespace {

struct CommonExperimentArgs {
  std::string model;
  std::string config;
  std::size_t seeds = 200;
  std::uint64_t master_seed = 0;
  std::size_t threads = 0;
  std::string out;
  std::string interval = "wilson";
  double level = 0.95;
};

void add_common(CLI::App* cmd, CommonExperimentArgs& a) {
  cmd->add_option("--model", a.model, "Model checkpoint")->required();
  cmd->add_option("--config", a.config, "Run config JSON (finetune/probe sections)");
  cmd->add_option("--seeds", a.seeds, "Seeds per condition")->capture_default_str();
  cmd->add_option("--master-seed", a.master_seed, "Master seed")->capture_default_str();
  cmd->add_option("--threads", a.threads, "Worker threads (0 = all cores)")->capture_default_str();
  cmd->add_option("--out", a.out, "Output directory")->required();
  cmd->add_option("--ci", a.interval, "Interval method")
      ->check(CLI::IsMember({"wilson", "clopper-pearson"}))
      ->capture_default_str();
  cmd->add_option("--level", a.level, "Confidence level")->capture_default_str();
}

RunConfig config_or_default(const std::string& path) {
  return path.empty() ? RunConfig{} : load_run_config(path);
}

ExperimentOptions experiment_options(const CommonExperimentArgs& a, const RunConfig& rc) {
  ExperimentOptions o;
  o.seeds = a.seeds;
  o.master_seed = a.master_seed;
  o.threads = a.threads;
  o.finetune = rc.finetune;
  o.probe = rc.probe;
  o.interval = a.interval == "wilson" ? stats::IntervalMethod::kWilson
                                      : stats::IntervalMethod::kClopperPearson;
  o.level = a.level;
  return o;
}

ordered_json input_entry(const std::string& path) {
  return {{"path", path}, {"sha256", report::sha256_file(path)}};
}

ordered_json experiment_manifest(std::string_view kind, const CommonExperimentArgs& a,
                                 const RunConfig& rc, ordered_json inputs) {
  ordered_json m;
  m["tool"] = "wugbench";
  m["version"] = WUGBENCH_VERSION;
  m["experiment"] = kind;
  m["master_seed"] = a.master_seed;
  std::vector<std::size_t> idx(a.seeds);
  for (std::size_t i = 0; i < a.seeds; ++i) idx[i] = i;
  m["seed_indices"] = idx;
  m["seed_derivation"] = "derive_seed(master_seed, experiment, alternation_id, frame, seed_index)";
  m["interval"] = a.interval;
  m["level"] = a.level;
  m["config"] = ordered_json::parse(run_config_to_json(rc));
  m["inputs"] = std::move(inputs);
  return m;
}

void report_progress(const std::string& msg) { std::cerr << msg << '\n'; }

int cmd_pretrain(const std::string& grammar_path, const std::string& config_path,
                 const std::string& out, std::uint64_t seed, bool quiet) {
  const GrammarSpec gspec = load_grammar_spec(grammar_path);
  RunConfig rc = config_or_default(config_path);
  const Grammar g = build_grammar(gspec, derive_seed(seed, "grammar", "", "", 0));
  const auto corpus =
      sample_corpus(g, rc.corpus_sentences, derive_seed(seed, "corpus", "", "", 0));
  rc.model.vocabulary = g.vocabulary();
  PretrainOptions po = rc.pretrain;
  po.unmaskable = gspec.closed_class_words;
  if (!quiet) {
    po.on_epoch = [](std::size_t e, double loss) {
      report_progress("epoch " + std::to_string(e + 1) + " loss " + report::format_double(loss));
    };
  }
  const auto res = pretrain(corpus, rc.model, derive_seed(seed, "model", "", "", 0), po);

  const fs::path out_path(out);
  const fs::path dir = out_path.has_parent_path() ? out_path.parent_path() : fs::path(".");
  const std::string stem = out_path.stem().string();
  const std::string battery_name = stem + ".battery.json";
  const std::string wordlist_name = stem + ".outclass.txt";
  const std::string manifest_name = stem + ".manifest.json";

  std::string words;
  for (const auto& s : g.battery())
    for (const auto& w : s.distractor_verbs) words += w + '\n';
  for (const auto& w : g.filler_verbs()) words += w + '\n';

  ordered_json m;
  m["tool"] = "wugbench";
  m["version"] = WUGBENCH_VERSION;
  m["command"] = "pretrain";
  m["seed"] = seed;
  m["config"] = ordered_json::parse(run_config_to_json(rc));
  m["inputs"] = {{"grammar", input_entry(grammar_path)}};
  if (!config_path.empty()) m["inputs"]["config"] = input_entry(config_path);
  m["final_loss"] = res.final_loss;
  std::vector<double> losses = res.epoch_losses;
  m["epoch_losses"] = losses;
  const std::string ckpt = res.model.serialize();
  m["outputs"] = {{"checkpoint", {{"path", out_path.filename().string()},
                                  {"sha256", report::sha256_hex(ckpt)}}},
                  {"battery", battery_name},
                  {"outclass_wordlist", wordlist_name}};

  write_outputs(dir, {{out_path.filename().string(), ckpt},
                      {battery_name, serialize_battery(g.battery())},
                      {wordlist_name, words},
                      {manifest_name, m.dump(2) + "\n"}});
  std::cout << "final_loss " << report::format_double(res.final_loss) << '\n';
  return 0;
}

int cmd_corpus(const std::string& grammar_path, std::size_t n, std::uint64_t seed,
               const std::string& out) {
  const Grammar g = build_grammar(load_grammar_spec(grammar_path),
                                  derive_seed(seed, "grammar", "", "", 0));
  const auto corpus = sample_corpus(g, n, derive_seed(seed, "corpus", "", "", 0));
  if (out.empty() || out == "-") {
    std::cout << dump_corpus(corpus);
  } else {
    report::write_file_atomic(out, dump_corpus(corpus));
  }
  return 0;
}

int cmd_alternations(const CommonExperimentArgs& a, const std::string& battery_path) {
  const RunConfig rc = config_or_default(a.config);
  const auto opts = experiment_options(a, rc);
  opts.validate();
  const MaskedLM model = MaskedLM::load(a.model);
  const auto battery = load_battery_file(battery_path);
  const auto run = run_alternations(model, battery, opts);
  ordered_json inputs = {{"model", input_entry(a.model)}, {"battery", input_entry(battery_path)}};
  if (!a.config.empty()) inputs["config"] = input_entry(a.config);
  write_outputs(a.out,
                {{"trials.csv", report::trials_csv("alternations", run.trials)},
                 {"summary.csv", report::summary_csv(run.summary)},
                 {"asymmetry.csv", report::asymmetry_csv(run.asymmetry)},
                 {"alternations.svg", run.chart},
                 {"manifest.json",
                  experiment_manifest("alternations", a, rc, std::move(inputs)).dump(2) + "\n"}});
  const auto& pooled = run.summary.back().summary;
  std::cout << "alternations pooled accuracy " << report::format_double(pooled.proportion)
            << " (" << run.trials.size() << " trials)\n";
  return 0;
}

int cmd_selectional(const CommonExperimentArgs& a) {
  const RunConfig rc = config_or_default(a.config);
  const auto opts = experiment_options(a, rc);
  opts.validate();
  const MaskedLM model = MaskedLM::load(a.model);
  const auto run = run_selectional(model, default_selectional_network(), opts);
  ordered_json inputs = {{"model", input_entry(a.model)}};
  if (!a.config.empty()) inputs["config"] = input_entry(a.config);
  write_outputs(a.out,
                {{"selectional_trials.csv", report::selectional_trials_csv(run.trials)},
                 {"summary.csv", report::summary_csv(run.summary)},
                 {"conditions.csv", report::conditions_csv(run.conditions)},
                 {"contrasts.svg", run.contrast_chart},
                 {"surprisal.svg", run.surprisal_chart},
                 {"manifest.json",
                  experiment_manifest("selectional", a, rc, std::move(inputs)).dump(2) + "\n"}});
  for (const auto& r : run.summary)
    std::cout << r.group << ' ' << report::format_double(r.summary.proportion) << '\n';
  return 0;
}

int cmd_probe(const CommonExperimentArgs& a, const std::string& battery_path,
              const std::string& outclass, const std::string& compare) {
  OutClassSource source;
  std::string wordlist_path;
  if (outclass == "distractor") {
    source.kind = OutClassSource::Kind::kDistractor;
  } else if (outclass.rfind("wordlist:", 0) == 0 && outclass.size() > 9) {
    source.kind = OutClassSource::Kind::kWordList;
    wordlist_path = outclass.substr(9);
  } else {
    throw UsageError("--outclass must be 'distractor' or 'wordlist:<path>'");
  }
  const RunConfig rc = config_or_default(a.config);
  const auto opts = experiment_options(a, rc);
  opts.validate();
  if (!wordlist_path.empty()) source.words = load_word_list(wordlist_path);
  std::optional<std::vector<report::SummaryRow>> other;
  if (!compare.empty()) {
    std::ifstream in(compare, std::ios::binary);
    if (!in) throw InputError("cannot open summary file: " + compare);
    std::ostringstream ss;
    ss << in.rdbuf();
    other = report::parse_summary_csv(ss.str());
  }
  const MaskedLM model = MaskedLM::load(a.model);
  const auto battery = load_battery_file(battery_path);
  const auto run = run_probe(model, battery, source, opts);

  ordered_json inputs = {{"model", input_entry(a.model)}, {"battery", input_entry(battery_path)}};
  if (!a.config.empty()) inputs["config"] = input_entry(a.config);
  if (!wordlist_path.empty()) inputs["wordlist"] = input_entry(wordlist_path);
  if (other) inputs["compare"] = input_entry(compare);
  auto manifest = experiment_manifest("probe", a, rc, std::move(inputs));
  manifest["outclass"] = source.describe();

  std::vector<std::pair<std::string, std::string>> files = {
      {"probe_trials.csv", report::probe_trials_csv("probe", run.trials)},
      {"summary.csv", report::summary_csv(run.summary)},
      {"probe.svg", run.chart}};
  if (other) {
    files.emplace_back("correlation.csv",
                       report::correlation_csv(correlate_summaries(run.summary, *other)));
  }
  files.emplace_back("manifest.json", manifest.dump(2) + "\n");
  write_outputs(a.out, files);
  std::cout << "probe pooled accuracy "
            << report::format_double(run.summary.back().summary.proportion) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wugbench: novel-word learning experiments for masked language models"};
  app.set_version_flag("--version", WUGBENCH_VERSION);
  app.require_subcommand(1);

  std::string grammar, config, out;
  std::uint64_t seed = 0;
  bool quiet = false;
  auto* pre = app.add_subcommand("pretrain", "Pretrain the reference model on a synthetic grammar");
  pre->add_option("--grammar", grammar, "Grammar spec JSON")->required();
  pre->add_option("--config", config, "Run config JSON");
  pre->add_option("--out", out, "Checkpoint path")->required();
  pre->add_option("--seed", seed, "Seed")->capture_default_str();
  pre->add_flag("--quiet", quiet, "No per-epoch progress");

  std::size_t n_sentences = 10000;
  auto* cor = app.add_subcommand("corpus", "Dump a sampled corpus");
  cor->add_option("--grammar", grammar, "Grammar spec JSON")->required();
  cor->add_option("--sentences", n_sentences, "Sentence count")->capture_default_str();
  cor->add_option("--seed", seed, "Seed")->capture_default_str();
  cor->add_option("--out", out, "Output file ('-' for stdout)");

  CommonExperimentArgs alt_args, sel_args, probe_args;
  std::string battery, probe_battery, outclass = "distractor", compare;
  auto* alt = app.add_subcommand("alternations", "Alternation generalization experiment");
  add_common(alt, alt_args);
  alt->add_option("--battery", battery, "Battery JSON")->required();
  auto* sel = app.add_subcommand("selectional", "Selectional-preference experiment");
  add_common(sel, sel_args);
  auto* prb = app.add_subcommand("probe", "Embedding classification experiment");
  add_common(prb, probe_args);
  prb->add_option("--battery", probe_battery, "Battery JSON")->required();
  prb->add_option("--outclass", outclass, "distractor | wordlist:<path>")->capture_default_str();
  prb->add_option("--compare", compare, "Alternations summary.csv to correlate against");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*pre) return cmd_pretrain(grammar, config, out, seed, quiet);
    if (*cor) return cmd_corpus(grammar, n_sentences, seed, out);
    if (*alt) return cmd_alternations(alt_args, battery);
    if (*sel) return cmd_selectional(sel_args);
    if (*prb) return cmd_probe(probe_args, probe_battery, outclass, compare);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
