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

// Synthetic users answering prompts at fixed decision points, used to compare
// selection policies by average reward and regret.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "jitai/domain.hpp"
#include "jitai/jsonl.hpp"
#include "jitai/policies.hpp"
#include "jitai/rng.hpp"
#include "jitai/time.hpp"

namespace jitai {

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ResponseProfile {
  enum class Kind { Simple, Ternary, WithMisses };
  Kind kind = Kind::Simple;
  double not_feasible_share = 0.0;  // Ternary: share of the Yes mass answered NotFeasibleNow
  double miss_probability = 0.0;    // WithMisses

  static ResponseProfile simple() { return {}; }
  static ResponseProfile ternary(double w) { return {Kind::Ternary, w, 0.0}; }
  static ResponseProfile with_misses(double p) { return {Kind::WithMisses, 0.0, p}; }
};

Json profile_to_json(const ResponseProfile& profile);
ResponseProfile profile_from_json(const Json& doc);

using ActivityWeights = std::array<double, kActivityContexts.size()>;
using SocialWeights = std::array<double, kSocialContexts.size()>;

ActivityWeights uniform_activity_weights();
SocialWeights uniform_social_weights();
// All mass on one context.
ActivityWeights single_context_weights(ActivityContext context);

struct UserModel {
  std::map<std::pair<ActivityContext, std::string>, double> truth;  // P(Yes)
  ResponseProfile profile;
  ActivityWeights activity_weights{};
  SocialWeights social_weights{};

  double p_yes(ActivityContext context, const std::string& arm) const;
  void set_truth(ActivityContext context, const std::string& arm, double p);
  // Best P(Yes) among the eligible arms of the context.
  double best_p_yes(ActivityContext context, const std::vector<std::string>& arms) const;
};

// Truth defaults to the included prior probabilities.
UserModel build_user_model(const PriorMatrix& priors, const ResponseProfile& profile,
                           const ActivityWeights& activity_weights = uniform_activity_weights(),
                           const SocialWeights& social_weights = uniform_social_weights());

Response sample_response(const UserModel& model, ActivityContext context, const std::string& arm, Rng& rng);

// Closed-form mean reward over responded prompts.
double expected_reward(const UserModel& model, ActivityContext context, const std::string& arm);

struct SimConfig {
  int days = 14;
  std::vector<int> schedule_minutes = default_schedule();  // minutes after local midnight
  int users = 1;
  std::uint64_t seed = 42;
  PolicyKind policy = policy::Thompson{};
  PriorsMode priors_mode = PriorsMode::Informed;
  double prior_strength = kDefaultPriorStrength;
  std::uint64_t max_decisions = 0;  // 0: run the full schedule
  std::string start_date = "2024-01-01";
  std::int32_t utc_offset_min = 0;

  // 07:55 through 19:55, hourly.
  static std::vector<int> default_schedule();
  void validate() const;
  std::uint64_t scheduled_decisions() const;
};

struct TrajectoryRecord {
  std::uint64_t t = 0;
  int user = 0;
  int day = 0;
  Timestamp at;
  ActivityContext context = ActivityContext::AttendingLecture;
  SocialContext social = SocialContext::Alone;
  std::string arm;
  Response response = Response::Missed;
  std::optional<double> reward;
  friend bool operator==(const TrajectoryRecord&, const TrajectoryRecord&) = default;
};

struct TrajectorySummary {
  std::uint64_t decisions = 0;
  std::uint64_t responded = 0;
  double average_reward = 0.0;
  std::map<ActivityContext, double> per_context_average;
  std::map<ActivityContext, std::uint64_t> per_context_responded;
  std::optional<double> cumulative_regret;  // Simple profile only
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  TrajectorySummary summary;
};

std::string user_label(int user);

Trajectory run_simulation(const SimConfig& config, const UserModel& model, const PriorMatrix& priors);

// Cumulative expected regret after each record. Requires the Simple profile.
std::vector<double> compute_regret(const Trajectory& trajectory, const UserModel& model, const PriorMatrix& priors);

TrajectorySummary summarize(const std::vector<TrajectoryRecord>& records);

// {days, schedule, users, seed, policy, priors_mode, prior_strength,
//  max_decisions, start_date, utc_offset_minutes, profile,
//  activity_weights, social_weights}
struct SimulationDocument {
  SimConfig config;
  ResponseProfile profile;
  ActivityWeights activity_weights = uniform_activity_weights();
  SocialWeights social_weights = uniform_social_weights();
};
SimulationDocument parse_simulation_document(const Json& doc);
Json simulation_document_to_json(const SimulationDocument& doc);

void write_trajectory_jsonl(std::ostream& out, const Trajectory& trajectory);
void write_summary_csv(std::ostream& out, const SimConfig& config, const TrajectorySummary& summary);
Json summary_to_json(const TrajectorySummary& summary);

}  // namespace jitai
