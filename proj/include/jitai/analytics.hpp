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

// Receptivity metrics grouped by a feature, with the matching rank tests.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jitai/ingest.hpp"
#include "jitai/jsonl.hpp"
#include "jitai/stats.hpp"

namespace jitai {

class AnalyticsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// filled / (filled + missed); absent when both are zero.
std::optional<double> completion_rate(std::size_t filled, std::size_t missed);

struct ResponseTimeReject {
  std::size_t index = 0;  // position in the input
  std::string user_id;
  std::string reason;
};

struct ResponseTimes {
  std::vector<double> seconds;
  std::vector<std::size_t> source_index;  // parallel to seconds
  std::vector<ResponseTimeReject> rejects;
};

// Missed notifications are skipped; a response stamped before its
// notification is rejected rather than clamped.
ResponseTimes response_times(std::span<const NotificationEvent> notifications);

// Mean mapped reward over responded entries; Missed entries are ignored.
std::optional<double> average_reward(std::span<const Response> responses);

struct GroupMetrics {
  std::string group;
  std::size_t notifications = 0;
  std::size_t filled = 0;
  std::size_t missed = 0;
  std::size_t participants = 0;
  std::optional<double> completion_rate;
  std::optional<double> mean_response_time_s;
  std::optional<double> median_response_time_s;
  std::size_t response_time_rejects = 0;
  std::optional<double> average_reward;
};

// Rows without a value for the feature are left out.
std::map<std::string, std::vector<const FeatureRow*>> group_rows(std::span<const FeatureRow> rows,
                                                                 std::string_view feature);

std::vector<GroupMetrics> group_metrics(std::span<const FeatureRow> rows, std::string_view feature);

struct MetricTest {
  std::string metric;   // completion_rate, response_time_s, average_reward
  std::string variant;  // pooled or per_participant
  std::optional<StatTestResult> omnibus;
  std::vector<StatTestResult> post_hoc;
  bool significant = false;
  std::optional<std::string> skipped;
};

struct FeatureReport {
  std::string feature;
  std::size_t rows_with_value = 0;
  std::vector<GroupMetrics> groups;
  std::vector<MetricTest> tests;
};

struct ReportOptions {
  double alpha = 0.05;
  bool continuity_correction = true;
};

struct Report {
  ReportOptions options;
  std::size_t rows = 0;
  std::vector<FeatureReport> features;
};

// Two groups get Mann-Whitney, three or more get Kruskal-Wallis plus Dunn.
Report build_report(std::span<const FeatureRow> rows, std::span<const std::string> features,
                    const ReportOptions& options = {});

std::string render_text(const Report& report);
Json report_to_json(const Report& report);
// feature,group,notifications,filled,missed,participants,completion_rate,...
std::string report_csv(const Report& report);

}  // namespace jitai
