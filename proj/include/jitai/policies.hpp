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

// Per-context Beta-Bernoulli bandits and the selection policies compared in
// the simulations: Thompson Sampling, epsilon-greedy, decaying epsilon,
// i.i.d. random and deterministic round-robin ("uniform").

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "jitai/domain.hpp"
#include "jitai/jsonl.hpp"
#include "jitai/rng.hpp"

namespace jitai {

class PolicyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ArmPosterior {
  double alpha = 1.0;  // pseudo-successes
  double beta = 1.0;   // pseudo-failures

  double mean() const { return alpha / (alpha + beta); }
  friend bool operator==(const ArmPosterior&, const ArmPosterior&) = default;
};

struct Arm {
  std::string id;
  ArmPosterior posterior;
  friend bool operator==(const Arm&, const Arm&) = default;
};

// Arms of one context bandit, in catalog order.
using ArmSet = std::vector<Arm>;

enum class PriorsMode { Informed, Uninformed };

std::string_view to_token(PriorsMode mode);
PriorsMode parse_priors_mode(std::string_view token);

inline constexpr double kDefaultPriorStrength = 19.0;
inline constexpr double kMinPseudoCount = 0.05;

namespace policy {
struct Thompson {};
struct EpsilonGreedy {
  double epsilon = 0.1;
};
struct DecayingEpsilon {
  double epsilon0 = 1.0;
  double decay = 0.01;
};
struct Random {};
struct UniformRoundRobin {};
}  // namespace policy

using PolicyKind = std::variant<policy::Thompson, policy::EpsilonGreedy, policy::DecayingEpsilon,
                                policy::Random, policy::UniformRoundRobin>;

// Text form: "thompson", "random", "uniform", "epsilon_greedy:<eps>",
// "decaying_epsilon:<eps0>:<decay>".
std::string to_string(const PolicyKind& kind);
PolicyKind parse_policy(std::string_view text);
// Accepts either the text form or {"kind": ..., "epsilon": ..., "decay": ...}.
PolicyKind policy_from_json(const Json& doc);
Json policy_to_json(const PolicyKind& kind);
void validate(const PolicyKind& kind);

// Informed: alpha = p * strength, beta = (1 - p) * strength, each floored at
// kMinPseudoCount. Uninformed: Beta(1, 1) for every eligible arm.
ArmSet init_bandit(const PriorMatrix& priors, ActivityContext context, PriorsMode mode = PriorsMode::Informed,
                   double strength = kDefaultPriorStrength);

// Index of the arm with the largest posterior draw; lowest index wins ties.
std::size_t thompson_select(const ArmSet& arms, Rng& rng);

// alpha += reward, beta += 1 - reward on the named arm.
ArmSet update_posterior(ArmSet arms, std::string_view arm_id, double reward);
void apply_reward(ArmSet& arms, std::string_view arm_id, double reward);

// Exploration rate in force at decision t (0 for policies that never explore).
double effective_epsilon(const PolicyKind& kind, std::uint64_t t);

// Non-Thompson policies; t is the decision count of this bandit.
std::size_t baseline_select(const PolicyKind& kind, const ArmSet& arms, std::uint64_t t, Rng& rng);

// Dispatches to thompson_select or baseline_select.
std::size_t select_arm(const PolicyKind& kind, const ArmSet& arms, std::uint64_t t, Rng& rng);

// Lowest index among arms with the largest posterior mean.
std::size_t argmax_mean(const ArmSet& arms);

struct ContextBandit {
  ArmSet arms;
  std::uint64_t decision_count = 0;
  friend bool operator==(const ContextBandit&, const ContextBandit&) = default;
};

struct BankKey {
  std::string user_id;
  ActivityContext context = ActivityContext::AttendingLecture;
  friend auto operator<=>(const BankKey&, const BankKey&) = default;
};

// All per-(user, activity context) bandits, lazily initialized from the priors.
class BanditBank {
 public:
  BanditBank(PriorMatrix priors, PriorsMode mode, double strength = kDefaultPriorStrength);

  ContextBandit& at(const std::string& user_id, ActivityContext context);
  const ContextBandit* find(const std::string& user_id, ActivityContext context) const;
  void put(BankKey key, ContextBandit bandit) { bandits_[std::move(key)] = std::move(bandit); }

  const std::map<BankKey, ContextBandit>& bandits() const { return bandits_; }
  const PriorMatrix& priors() const { return priors_; }
  PriorsMode mode() const { return mode_; }
  double strength() const { return strength_; }

  friend bool operator==(const BanditBank& a, const BanditBank& b) { return a.bandits_ == b.bandits_; }

 private:
  PriorMatrix priors_;
  PriorsMode mode_;
  double strength_;
  std::map<BankKey, ContextBandit> bandits_;
};

// {user_id, context, arms: [{id, alpha, beta}], decision_count, policy, seed}
Json bandit_snapshot(const std::string& user_id, ActivityContext context, const ContextBandit& bandit,
                     const PolicyKind& kind, std::uint64_t seed);
std::pair<BankKey, ContextBandit> parse_bandit_snapshot(const Json& doc);

}  // namespace jitai
