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


#pragma once

// Rank-based nonparametric tests and the tail probabilities they need.
// Ties receive mid-ranks throughout.

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace jitai {

class StatsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TestKind { KruskalWallis, MannWhitneyU, DunnPair };
std::string_view to_token(TestKind kind);

struct Sample {
  std::string label;
  std::vector<double> values;
};

struct StatTestResult {
  TestKind test = TestKind::KruskalWallis;
  double statistic = 0.0;       // H, U, or z
  std::optional<double> z;      // normal score for U and Dunn pairs
  std::optional<int> df;        // Kruskal-Wallis only
  double p_value = 1.0;
  std::optional<double> adjusted_p;
  std::vector<std::string> groups;
};

// Regularized lower/upper incomplete gamma functions P(a, x), Q(a, x).
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

double chi_square_upper_tail(double x, int df);
double normal_upper_tail(double x);

struct ChiSquareTail {
  int df = 1;
};
struct StandardNormalTail {};

double tail_probability(ChiSquareTail dist, double x);
double tail_probability(StandardNormalTail dist, double x);

// Mid-ranks (1-based) of the values, in input order.
std::vector<double> midranks(std::span<const double> values);

// Sum over tie blocks of (t^3 - t).
double tie_sum(std::span<const double> values);

// Tie-corrected H for any number of groups (>= 2); 0 when every value ties.
double kruskal_h(std::span<const Sample> groups);

// Omnibus test for three or more groups; two groups belong to Mann-Whitney.
StatTestResult kruskal_wallis(std::span<const Sample> groups);

// U of sample a; two-sided normal approximation with tie-corrected variance.
StatTestResult mann_whitney_u(const Sample& a, const Sample& b, bool continuity_correction = true);

enum class Correction { Bonferroni, None };

// All pairs i < j, using ranks from the pooled sample.
std::vector<StatTestResult> dunn_posthoc(std::span<const Sample> groups, Correction correction = Correction::Bonferroni);

}  // namespace jitai
