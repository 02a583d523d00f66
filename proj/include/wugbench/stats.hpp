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

#ifndef WUGBENCH_STATS_HPP_
#define WUGBENCH_STATS_HPP_

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace wugbench::stats {

enum class IntervalMethod { kWilson, kClopperPearson };

struct AccuracySummary {
  std::size_t successes = 0;
  std::size_t n = 0;
  double proportion = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double p_value = 1.0;  // two-sided exact test against 0.5
};

double proportion(std::span<const bool> flags);

// Wilson score interval, clipped to [0, 1].
std::pair<double, double> wilson_ci(std::size_t successes, std::size_t n, double level = 0.95);
// Exact (Clopper-Pearson) interval from beta quantiles.
std::pair<double, double> clopper_pearson_ci(std::size_t successes, std::size_t n,
                                             double level = 0.95);

// Two-sided exact binomial test: sums the null pmf over every outcome no more
// likely than the observed one (relative tolerance 1e-7 for ties).
double exact_binomial_test(std::size_t successes, std::size_t n, double null_p = 0.5);

AccuracySummary summarize(std::size_t successes, std::size_t n, double level = 0.95,
                          IntervalMethod method = IntervalMethod::kWilson);
AccuracySummary summarize(std::span<const bool> flags, double level = 0.95,
                          IntervalMethod method = IntervalMethod::kWilson);

double pearson(std::span<const double> xs, std::span<const double> ys);
// Pearson on mid-ranks (tied values share their average rank).
double spearman(std::span<const double> xs, std::span<const double> ys);
std::vector<double> mid_ranks(std::span<const double> xs);

}  // namespace wugbench::stats

#endif  // WUGBENCH_STATS_HPP_
