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

#include "wugbench/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/normal.hpp>

#include "wugbench/error.hpp"

namespace wugbench::stats {
namespace {

void check_counts(std::size_t successes, std::size_t n) {
  if (n < 1) throw UsageError("binomial: n must be >= 1");
  if (successes > n) throw UsageError("binomial: successes exceed n");
}

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw UsageError("confidence level must lie in (0, 1)");
}

double log_binom_pmf(std::size_t k, std::size_t n, double p) {
  const auto kd = static_cast<double>(k);
  const auto nd = static_cast<double>(n);
  double lp = std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0);
  if (k > 0) lp += kd * std::log(p);
  if (k < n) lp += (nd - kd) * std::log1p(-p);
  return lp;
}

void check_pair(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw UsageError("correlation: length mismatch");
  if (xs.size() < 3) throw UsageError("correlation: need at least 3 points");
}

}  // namespace

double proportion(std::span<const bool> flags) {
  if (flags.empty()) throw UsageError("proportion: empty input");
  const auto k = std::count(flags.begin(), flags.end(), true);
  return static_cast<double>(k) / static_cast<double>(flags.size());
}

std::pair<double, double> wilson_ci(std::size_t successes, std::size_t n, double level) {
  check_counts(successes, n);
  check_level(level);
  const double z =
      boost::math::quantile(boost::math::normal_distribution<double>(), 0.5 + level / 2.0);
  const auto nd = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nd;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nd;
  const double centre = (p + z2 / (2.0 * nd)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nd + z2 / (4.0 * nd * nd)) / denom;
  double lo = successes == 0 ? 0.0 : std::max(0.0, centre - half);
  double hi = successes == n ? 1.0 : std::min(1.0, centre + half);
  // Guard against rounding pushing p just outside the interval.
  lo = std::min(lo, p);
  hi = std::max(hi, p);
  return {lo, hi};
}

std::pair<double, double> clopper_pearson_ci(std::size_t successes, std::size_t n, double level) {
  check_counts(successes, n);
  check_level(level);
  const double alpha = 1.0 - level;
  const auto k = static_cast<double>(successes);
  const auto nd = static_cast<double>(n);
  const double lo = successes == 0
                        ? 0.0
                        : boost::math::quantile(boost::math::beta_distribution<double>(k, nd - k + 1.0),
                                                alpha / 2.0);
  const double hi = successes == n
                        ? 1.0
                        : boost::math::quantile(boost::math::beta_distribution<double>(k + 1.0, nd - k),
                                                1.0 - alpha / 2.0);
  return {lo, hi};
}

double exact_binomial_test(std::size_t successes, std::size_t n, double null_p) {
  check_counts(successes, n);
  if (!(null_p > 0.0 && null_p < 1.0)) throw UsageError("binomial test: null_p must lie in (0, 1)");
  const double observed = log_binom_pmf(successes, n, null_p);
  const double cutoff = observed + std::log1p(1e-7);
  double p = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double lp = log_binom_pmf(k, n, null_p);
    if (lp <= cutoff) p += std::exp(lp);
  }
  return std::min(1.0, p);
}

AccuracySummary summarize(std::size_t successes, std::size_t n, double level,
                          IntervalMethod method) {
  AccuracySummary s;
  s.successes = successes;
  s.n = n;
  check_counts(successes, n);
  s.proportion = static_cast<double>(successes) / static_cast<double>(n);
  std::tie(s.ci_low, s.ci_high) = method == IntervalMethod::kWilson
                                      ? wilson_ci(successes, n, level)
                                      : clopper_pearson_ci(successes, n, level);
  s.p_value = exact_binomial_test(successes, n, 0.5);
  return s;
}

AccuracySummary summarize(std::span<const bool> flags, double level, IntervalMethod method) {
  if (flags.empty()) throw UsageError("summarize: empty input");
  const auto k = static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true));
  return summarize(k, flags.size(), level, method);
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  check_pair(xs, ys);
  const auto n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UsageError("correlation: constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> mid_ranks(std::span<const double> xs) {
  std::vector<std::size_t> idx(xs.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && xs[idx[j + 1]] == xs[idx[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  check_pair(xs, ys);
  const auto rx = mid_ranks(xs);
  const auto ry = mid_ranks(ys);
  return pearson(rx, ry);
}

}  // namespace wugbench::stats
