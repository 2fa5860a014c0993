// Copyright 2026 The JITAI Bandit Authors
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


#include "jitai/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace jitai {
namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxIterations = 10'000;

void require_finite(double x) {
  if (!std::isfinite(x)) throw StatsError("tail probability of a non-finite value");
}

// Series for P(a, x), valid for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int n = 0; n < kMaxIterations; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x) (modified Lentz), valid for x >= a + 1.
double gamma_q_fraction(double a, double x) {
  constexpr double kTiny = std::numeric_limits<double>::min() / kEps;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

double clamp_p(double p) { return std::clamp(p, 0.0, 1.0); }

struct PooledRanks {
  std::vector<double> rank_sums;
  std::vector<std::size_t> sizes;
  std::size_t total = 0;
  double ties = 0.0;
};

PooledRanks pool(std::span<const Sample> groups) {
  PooledRanks out;
  std::vector<double> all;
  for (const auto& g : groups) {
    if (g.values.empty()) throw StatsError("group '" + g.label + "' is empty");
    for (double v : g.values) {
      if (!std::isfinite(v)) throw StatsError("group '" + g.label + "' contains a non-finite value");
    }
    all.insert(all.end(), g.values.begin(), g.values.end());
    out.sizes.push_back(g.values.size());
  }
  const auto ranks = midranks(all);
  std::size_t offset = 0;
  for (const auto& g : groups) {
    double sum = 0.0;
    for (std::size_t i = 0; i < g.values.size(); ++i) sum += ranks[offset + i];
    out.rank_sums.push_back(sum);
    offset += g.values.size();
  }
  out.total = all.size();
  out.ties = tie_sum(all);
  return out;
}

std::vector<std::string> labels_of(std::span<const Sample> groups) {
  std::vector<std::string> out;
  for (const auto& g : groups) out.push_back(g.label);
  return out;
}

}  // namespace

std::string_view to_token(TestKind kind) {
  switch (kind) {
    case TestKind::KruskalWallis:
      return "kruskal_wallis";
    case TestKind::MannWhitneyU:
      return "mann_whitney_u";
    case TestKind::DunnPair:
      return "dunn";
  }
  return "?";
}

double regularized_gamma_p(double a, double x) {
  if (!(a > 0.0)) throw StatsError("incomplete gamma requires a > 0");
  require_finite(x);
  if (x <= 0.0) return 0.0;
  if (x < a + 1.0) return clamp_p(gamma_p_series(a, x));
  return clamp_p(1.0 - gamma_q_fraction(a, x));
}

double regularized_gamma_q(double a, double x) {
  if (!(a > 0.0)) throw StatsError("incomplete gamma requires a > 0");
  require_finite(x);
  if (x <= 0.0) return 1.0;
  if (x < a + 1.0) return clamp_p(1.0 - gamma_p_series(a, x));
  return clamp_p(gamma_q_fraction(a, x));
}

double chi_square_upper_tail(double x, int df) {
  if (df < 1) throw StatsError("chi-square needs df >= 1");
  return regularized_gamma_q(0.5 * df, 0.5 * x);
}

double normal_upper_tail(double x) {
  require_finite(x);
  return 0.5 * std::erfc(x / std::sqrt(2.0));
}

double tail_probability(ChiSquareTail dist, double x) { return chi_square_upper_tail(x, dist.df); }
double tail_probability(StandardNormalTail, double x) { return normal_upper_tail(x); }

std::vector<double> midranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mid;
    i = j + 1;
  }
  return ranks;
}

double tie_sum(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    sum += t * t * t - t;
    i = j + 1;
  }
  return sum;
}

double kruskal_h(std::span<const Sample> groups) {
  if (groups.size() < 2) throw StatsError("need at least two groups");
  const PooledRanks p = pool(groups);
  const double n = static_cast<double>(p.total);
  const double correction = 1.0 - p.ties / (n * n * n - n);
  if (correction <= 0.0) return 0.0;
  double sum = 0.0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    sum += p.rank_sums[g] * p.rank_sums[g] / static_cast<double>(p.sizes[g]);
  }
  const double h = 12.0 / (n * (n + 1.0)) * sum - 3.0 * (n + 1.0);
  return std::max(0.0, h / correction);
}

StatTestResult kruskal_wallis(std::span<const Sample> groups) {
  if (groups.size() < 3) {
    throw StatsError("Kruskal-Wallis needs at least three groups; use the Mann-Whitney U test for two");
  }
  std::size_t total = 0;
  for (const auto& g : groups) total += g.values.size();
  if (total < 3) throw StatsError("Kruskal-Wallis needs at least three observations");

  StatTestResult r;
  r.test = TestKind::KruskalWallis;
  r.statistic = kruskal_h(groups);
  r.df = static_cast<int>(groups.size()) - 1;
  r.p_value = r.statistic == 0.0 ? 1.0 : chi_square_upper_tail(r.statistic, *r.df);
  r.groups = labels_of(groups);
  return r;
}

StatTestResult mann_whitney_u(const Sample& a, const Sample& b, bool continuity_correction) {
  const Sample both[] = {a, b};
  const PooledRanks p = pool(both);
  const double n1 = static_cast<double>(p.sizes[0]);
  const double n2 = static_cast<double>(p.sizes[1]);
  const double n = n1 + n2;

  StatTestResult r;
  r.test = TestKind::MannWhitneyU;
  r.statistic = p.rank_sums[0] - n1 * (n1 + 1.0) / 2.0;
  r.groups = {a.label, b.label};

  const double mean = n1 * n2 / 2.0;
  const double variance = n1 * n2 / 12.0 * ((n + 1.0) - p.ties / (n * (n - 1.0)));
  if (!(variance > 0.0)) {
    r.z = 0.0;
    r.p_value = 1.0;
    return r;
  }
  const double diff = r.statistic - mean;
  double magnitude = std::abs(diff);
  if (continuity_correction) magnitude = std::max(0.0, magnitude - 0.5);
  const double z = std::copysign(magnitude, diff) / std::sqrt(variance);
  r.z = z;
  r.p_value = clamp_p(2.0 * normal_upper_tail(std::abs(z)));
  return r;
}

std::vector<StatTestResult> dunn_posthoc(std::span<const Sample> groups, Correction correction) {
  if (groups.size() < 3) throw StatsError("Dunn post-hoc needs at least three groups");
  const PooledRanks p = pool(groups);
  const double n = static_cast<double>(p.total);
  const double spread = n * (n + 1.0) / 12.0 - p.ties / (12.0 * (n - 1.0));
  const std::size_t k = groups.size();
  const double comparisons = static_cast<double>(k * (k - 1) / 2);

  std::vector<StatTestResult> out;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double ni = static_cast<double>(p.sizes[i]);
      const double nj = static_cast<double>(p.sizes[j]);
      const double variance = spread * (1.0 / ni + 1.0 / nj);
      StatTestResult r;
      r.test = TestKind::DunnPair;
      r.groups = {groups[i].label, groups[j].label};
      const double z = variance > 0.0 ? (p.rank_sums[i] / ni - p.rank_sums[j] / nj) / std::sqrt(variance) : 0.0;
      r.statistic = z;
      r.z = z;
      r.p_value = clamp_p(2.0 * normal_upper_tail(std::abs(z)));
      r.adjusted_p = correction == Correction::Bonferroni ? std::min(1.0, r.p_value * comparisons) : r.p_value;
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace jitai
