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


#include "wugbench/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "wugbench/error.hpp"

namespace wugbench {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv_mix(std::uint64_t h, std::string_view field) {
  constexpr std::uint64_t kPrime = 0x100000001b3ULL;
  // Length first, so ("ab", "c") and ("a", "bc") differ.
  std::uint64_t len = field.size();
  for (int i = 0; i < 8; ++i) {
    h = (h ^ ((len >> (8 * i)) & 0xff)) * kPrime;
  }
  for (unsigned char c : field) h = (h ^ c) * kPrime;
  return h;
}

std::string levin_section(const std::string& label) {
  return "Levin " + label.substr(0, label.find('-'));
}

report::ChartBar bar_from(const std::string& label, const std::string& category,
                          const stats::AccuracySummary& s) {
  return {label, category, s.proportion, s.ci_low, s.ci_high};
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view experiment,
                          std::string_view alternation_id, std::string_view frame,
                          std::size_t seed_index) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ splitmix64(master);
  h = fnv_mix(h, experiment);
  h = fnv_mix(h, alternation_id);
  h = fnv_mix(h, frame);
  return splitmix64(h ^ splitmix64(static_cast<std::uint64_t>(seed_index)));
}

std::size_t worker_count(std::size_t requested) {
  std::size_t n = requested;
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("WUGBENCH_THREADS"); env && *env) {
    char* end = nullptr;
    const unsigned long long cap = std::strtoull(env, &end, 10);
    if (end && *end == '\0' && cap > 0) n = std::min<std::size_t>(n, cap);
  }
  return std::max<std::size_t>(1, n);
}

void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& body) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex mu;
  std::size_t err_index = n;
  std::exception_ptr err;
  auto loop = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < err_index) {
          err_index = i;
          err = std::current_exception();
        }
        failed = true;
      }
    }
  };
  if (workers == 1) {
    loop();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(loop);
    for (auto& t : pool) t.join();
  }
  if (err) std::rethrow_exception(err);
}

void ExperimentOptions::validate() const {
  if (seeds < 1) throw UsageError("--seeds must be >= 1");
  if (!(level > 0.0 && level < 1.0)) throw UsageError("confidence level must be in (0, 1)");
  finetune.validate();
  probe.validate();
}

std::string group_key(std::string_view alternation_id, FrameSide frame) {
  return std::string(alternation_id) + ":" + std::string(to_string(frame));
}

AlternationsRun run_alternations(const MaskedLM& model, const std::vector<AlternationSpec>& battery,
                                 const ExperimentOptions& opts) {
  opts.validate();
  if (battery.empty()) throw InputError("alternations: battery is empty");
  constexpr FrameSide kSides[] = {FrameSide::kA, FrameSide::kB};
  const std::size_t per_spec = 2 * opts.seeds;
  AlternationsRun run;
  run.trials.resize(battery.size() * per_spec);
  parallel_for(run.trials.size(), worker_count(opts.threads), [&](std::size_t i) {
    const auto& spec = battery[i / per_spec];
    const FrameSide side = kSides[(i % per_spec) / opts.seeds];
    const std::size_t k = i % opts.seeds;
    FineTuneConfig ft = opts.finetune;
    ft.seed = derive_seed(opts.master_seed, "alternations", spec.id, to_string(side), k);
    AlternationTrial t = alternation_trial(model, battery, spec.id, side, ft);
    t.seed_index = k;
    run.trials[i] = std::move(t);
  });

  std::size_t pooled = 0;
  std::vector<report::ChartBar> bars;
  for (std::size_t s = 0; s < battery.size(); ++s) {
    for (std::size_t f = 0; f < 2; ++f) {
      std::size_t hits = 0;
      for (std::size_t k = 0; k < opts.seeds; ++k)
        hits += run.trials[s * per_spec + f * opts.seeds + k].correct ? 1 : 0;
      pooled += hits;
      auto sum = stats::summarize(hits, opts.seeds, opts.level, opts.interval);
      run.summary.push_back({"alternations", group_key(battery[s].id, kSides[f]), sum});
      bars.push_back(bar_from(battery[s].frame(kSides[f]).label,
                              levin_section(battery[s].levin_label), sum));
    }
  }
  run.summary.push_back({"alternations", "pooled",
                         stats::summarize(pooled, run.trials.size(), opts.level, opts.interval)});
  run.asymmetry = asymmetry_report(run.trials);
  run.chart = report::emit_chart(
      bars, {"Alternations: novel verb more likely in sister frame than out-class frames",
             "accuracy", 1.0, true});
  return run;
}

SelectionalRun run_selectional(const MaskedLM& model, const SelectionalNetwork& net,
                               const ExperimentOptions& opts) {
  opts.validate();
  validate_network(net);
  SelectionalRun run;
  run.trials.resize(opts.seeds);
  parallel_for(opts.seeds, worker_count(opts.threads), [&](std::size_t k) {
    FineTuneConfig ft = opts.finetune;
    ft.seed = derive_seed(opts.master_seed, "selectional", "network", "-", k);
    SelectionalTrial t = selectional_trial(model, net, ft);
    t.seed_index = k;
    run.trials[k] = t;
  });

  std::vector<report::ChartBar> contrast_bars;
  for (std::size_t c = 0; c < 3; ++c) {
    std::size_t hits = 0;
    for (const auto& t : run.trials) hits += t.flags[c] ? 1 : 0;
    auto sum = stats::summarize(hits, opts.seeds, opts.level, opts.interval);
    run.summary.push_back({"selectional", std::string(kContrastNames[c]), sum});
    contrast_bars.push_back(bar_from(std::string(kContrastNames[c]), "contrast", sum));
  }
  std::vector<report::ChartBar> surprisal_bars;
  for (std::size_t c = 0; c < kSelectionalConditions.size(); ++c) {
    double mean = 0.0;
    for (const auto& t : run.trials) mean += t.surprisal[c];
    mean /= static_cast<double>(opts.seeds);
    double ss = 0.0;
    for (const auto& t : run.trials) ss += (t.surprisal[c] - mean) * (t.surprisal[c] - mean);
    const double sd = opts.seeds > 1 ? std::sqrt(ss / static_cast<double>(opts.seeds - 1)) : 0.0;
    const std::string name(to_string(kSelectionalConditions[c]));
    run.conditions.push_back(
        {name, net.pairs(kSelectionalConditions[c]).size(), opts.seeds, mean, sd});
    const double half = 1.96 * sd / std::sqrt(static_cast<double>(opts.seeds));
    surprisal_bars.push_back({name, "condition", mean, std::max(0.0, mean - half), mean + half});
  }
  run.contrast_chart = report::emit_chart(
      contrast_bars, {"Selectional contrasts: lower surprisal on the higher-evidence side",
                      "accuracy", 1.0, true});
  run.surprisal_chart = report::emit_chart(
      surprisal_bars, {"Mean verb surprisal by condition", "surprisal (nats)", 0.0, false});
  return run;
}

ProbeRun run_probe(const MaskedLM& model, const std::vector<AlternationSpec>& battery,
                   const OutClassSource& source, const ExperimentOptions& opts) {
  opts.validate();
  if (battery.empty()) throw InputError("probe: battery is empty");
  constexpr FrameSide kSides[] = {FrameSide::kA, FrameSide::kB};

  // The probe depends only on the base embeddings, so one per alternation.
  std::vector<TrainedProbe> probes(battery.size());
  const ExtendedModel view(model);
  for (std::size_t s = 0; s < battery.size(); ++s) {
    probes[s] = train_probe(
        make_dataset(view, battery[s].inclass_verbs, outclass_verbs(battery[s], source)),
        opts.probe);
  }

  const std::size_t per_spec = 2 * opts.seeds;
  ProbeRun run;
  run.trials.resize(battery.size() * per_spec);
  parallel_for(run.trials.size(), worker_count(opts.threads), [&](std::size_t i) {
    const std::size_t s = i / per_spec;
    const FrameSide side = kSides[(i % per_spec) / opts.seeds];
    const std::size_t k = i % opts.seeds;
    FineTuneConfig ft = opts.finetune;
    ft.seed = derive_seed(opts.master_seed, "probe", battery[s].id, to_string(side), k);
    const auto o = probe_novel_verb(model, battery[s], side, probes[s].probe, ft);
    run.trials[i] = {battery[s].id,   side,    k,      source.describe(),
                     probes[s].train_accuracy, o.label, o.score};
  });

  std::size_t pooled = 0;
  std::vector<report::ChartBar> bars;
  for (std::size_t s = 0; s < battery.size(); ++s) {
    for (std::size_t f = 0; f < 2; ++f) {
      std::size_t hits = 0;
      for (std::size_t k = 0; k < opts.seeds; ++k)
        hits += run.trials[s * per_spec + f * opts.seeds + k].label == 1 ? 1 : 0;
      pooled += hits;
      auto sum = stats::summarize(hits, opts.seeds, opts.level, opts.interval);
      run.summary.push_back({"probe", group_key(battery[s].id, kSides[f]), sum});
      bars.push_back(bar_from(battery[s].frame(kSides[f]).label,
                              levin_section(battery[s].levin_label), sum));
    }
  }
  run.summary.push_back(
      {"probe", "pooled", stats::summarize(pooled, run.trials.size(), opts.level, opts.interval)});
  run.chart = report::emit_chart(
      bars, {"Embedding probe: novel verb classified in-class (" + source.describe() + ")",
             "accuracy", 1.0, true});
  return run;
}

std::vector<report::CorrelationRow> correlate_summaries(const std::vector<report::SummaryRow>& a,
                                                        const std::vector<report::SummaryRow>& b) {
  std::map<std::string, double> other;
  for (const auto& r : b) {
    if (r.group != "pooled") other[r.group] = r.summary.proportion;
  }
  std::vector<double> xs, ys;
  for (const auto& r : a) {
    if (r.group == "pooled") continue;
    auto it = other.find(r.group);
    if (it == other.end()) continue;
    xs.push_back(r.summary.proportion);
    ys.push_back(it->second);
  }
  std::vector<report::CorrelationRow> rows;
  auto add = [&](const char* name, auto fn) {
    report::CorrelationRow row{name, xs.size(), 0.0, true};
    try {
      row.value = fn(xs, ys);
    } catch (const Error&) {
      row.defined = false;  // too few groups or a constant column
    }
    rows.push_back(row);
  };
  add("pearson", [](const auto& x, const auto& y) { return stats::pearson(x, y); });
  add("spearman", [](const auto& x, const auto& y) { return stats::spearman(x, y); });
  return rows;
}

void write_outputs(const std::filesystem::path& dir,
                   const std::vector<std::pair<std::string, std::string>>& files) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + dir.string() + ": " + ec.message());
  std::vector<fs::path> written;
  try {
    for (const auto& [name, content] : files) {
      report::write_file_atomic(dir / name, content);
      written.push_back(dir / name);
    }
  } catch (...) {
    for (const auto& p : written) fs::remove(p, ec);
    throw;
  }
}

}  // namespace wugbench
