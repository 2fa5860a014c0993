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

// Core vocabulary: interventions, contexts, responses and rewards, and the
// survey-driven construction of per-context feasibility priors.

#include <array>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace jitai {

class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Category { PhysicalActivity, MentalRelaxation, CognitiveActivity, EmotionalSocialEngagement };

enum class ActivityContext {
  AttendingLecture,
  Exercise,
  Relaxing,
  InVehicle,
  Cycling,
  Walking,
  Running,
  Studying,
  Eating,
  Standing,
};

inline constexpr std::array<ActivityContext, 10> kActivityContexts{
    ActivityContext::AttendingLecture, ActivityContext::Exercise, ActivityContext::Relaxing,
    ActivityContext::InVehicle,        ActivityContext::Cycling,  ActivityContext::Walking,
    ActivityContext::Running,          ActivityContext::Studying, ActivityContext::Eating,
    ActivityContext::Standing,
};

enum class SocialContext { Alone, WithSomeoneConversing, WithSomeoneNotConversing };

inline constexpr std::array<SocialContext, 3> kSocialContexts{
    SocialContext::Alone, SocialContext::WithSomeoneConversing, SocialContext::WithSomeoneNotConversing};

enum class Response { Yes, No, NotFeasibleNow, Missed };

// Wire tokens. Parsers accept exactly what the formatters emit.
std::string_view to_token(Category c);
std::string_view to_token(ActivityContext c);
std::string_view to_token(SocialContext c);
std::string_view to_token(Response r);

std::optional<Category> parse_category(std::string_view token);
std::optional<ActivityContext> parse_activity(std::string_view token);
std::optional<SocialContext> parse_social(std::string_view token);
std::optional<Response> parse_response(std::string_view token);

ActivityContext require_activity(std::string_view token);
SocialContext require_social(std::string_view token);
Response require_response(std::string_view token);

// Yes -> 1, NotFeasibleNow -> 0.5, No -> 0, Missed -> no reward.
constexpr std::optional<double> map_reward(Response r) {
  switch (r) {
    case Response::Yes:
      return 1.0;
    case Response::NotFeasibleNow:
      return 0.5;
    case Response::No:
      return 0.0;
    case Response::Missed:
      return std::nullopt;
  }
  return std::nullopt;
}

struct Intervention {
  std::string id;
  std::string name;
  Category category = Category::PhysicalActivity;
};

// Ordered set of interventions. Catalog order is the canonical arm order for
// every downstream tie-break.
class InterventionCatalog {
 public:
  InterventionCatalog() = default;
  explicit InterventionCatalog(std::vector<Intervention> items);

  const std::vector<Intervention>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  const Intervention* find(std::string_view id) const;
  std::optional<std::size_t> index_of(std::string_view id) const;
  std::vector<std::string> ids() const;

 private:
  std::vector<Intervention> items_;
};

// One record per line: {"id", "name", "category"}; category is PA|MR|CA|ESE.
InterventionCatalog load_catalog(std::istream& in);

struct SurveyTally {
  ActivityContext context = ActivityContext::AttendingLecture;
  std::string intervention_id;
  int yes_count = 0;
  int total_count = 0;
};

// One record per line: {"context", "intervention_id", "yes", "total"}.
std::vector<SurveyTally> load_tallies(std::istream& in);
void write_tallies(std::ostream& out, std::span<const SurveyTally> tallies);

struct PriorEntry {
  double probability = 0.0;
  bool excluded = false;
};

struct ElicitationParams {
  double threshold = 0.4;
  double cap_adjustment = 0.025;
};

class PriorMatrix {
 public:
  PriorMatrix() = default;
  explicit PriorMatrix(std::vector<std::string> arm_order) : arm_order_(std::move(arm_order)) {}

  void set(ActivityContext context, const std::string& intervention_id, PriorEntry entry);
  std::optional<PriorEntry> get(ActivityContext context, std::string_view intervention_id) const;
  bool has_context(ActivityContext context) const;

  const std::vector<std::string>& arm_order() const { return arm_order_; }

  // Throws unless every context present has at least one included arm.
  void validate() const;

 private:
  std::vector<std::string> arm_order_;
  std::map<std::pair<ActivityContext, std::string>, PriorEntry, std::less<>> entries_;
};

// Proportion of Yes per (context, intervention); proportions below the
// threshold are excluded and unanimous Yes is pulled down by cap_adjustment.
PriorMatrix elicit_priors(const InterventionCatalog& catalog, std::span<const SurveyTally> tallies,
                          const ElicitationParams& params = {});

// Non-excluded interventions for a context, in catalog order.
std::vector<std::string> eligible_arms(const PriorMatrix& priors, ActivityContext context);

// Three-decimal reporting precision.
double reported_probability(double p);

// Table layout: header "intervention,<context tokens...>", one row per
// intervention, values with a trailing '*' when excluded.
void write_prior_table(std::ostream& out, const PriorMatrix& priors);
PriorMatrix read_prior_table(std::istream& in, const InterventionCatalog& catalog,
                             double threshold = 0.4);

// One record per (context, intervention): {context, intervention_id, probability, excluded}.
void write_prior_jsonl(std::ostream& out, const PriorMatrix& priors);

}  // namespace jitai
