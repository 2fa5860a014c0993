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


#include "jitai/policies.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace jitai {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double parse_number(std::string_view text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw PolicyError("bad numeric policy parameter: " + std::string(text));
  }
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

Arm& find_arm(ArmSet& arms, std::string_view arm_id) {
  auto it = std::find_if(arms.begin(), arms.end(), [&](const Arm& a) { return a.id == arm_id; });
  if (it == arms.end()) throw PolicyError("unknown arm: " + std::string(arm_id));
  return *it;
}

void require_arms(const ArmSet& arms) {
  if (arms.empty()) throw PolicyError("cannot select from an empty arm set");
}

}  // namespace

std::string_view to_token(PriorsMode mode) {
  return mode == PriorsMode::Informed ? "informed" : "uninformed";
}

PriorsMode parse_priors_mode(std::string_view token) {
  if (token == "informed") return PriorsMode::Informed;
  if (token == "uninformed") return PriorsMode::Uninformed;
  throw PolicyError("unknown priors mode: " + std::string(token));
}

std::string to_string(const PolicyKind& kind) {
  return std::visit(Overloaded{
                        [](const policy::Thompson&) -> std::string { return "thompson"; },
                        [](const policy::Random&) -> std::string { return "random"; },
                        [](const policy::UniformRoundRobin&) -> std::string { return "uniform"; },
                        [](const policy::EpsilonGreedy& p) -> std::string {
                          return "epsilon_greedy:" + Json(p.epsilon).dump();
                        },
                        [](const policy::DecayingEpsilon& p) -> std::string {
                          return "decaying_epsilon:" + Json(p.epsilon0).dump() + ":" + Json(p.decay).dump();
                        },
                    },
                    kind);
}

void validate(const PolicyKind& kind) {
  std::visit(Overloaded{
                 [](const policy::EpsilonGreedy& p) {
                   if (!(p.epsilon >= 0.0 && p.epsilon <= 1.0)) throw PolicyError("epsilon must lie in [0, 1]");
                 },
                 [](const policy::DecayingEpsilon& p) {
                   if (!(p.epsilon0 >= 0.0 && p.epsilon0 <= 1.0)) throw PolicyError("epsilon0 must lie in [0, 1]");
                   if (!(p.decay >= 0.0) || !std::isfinite(p.decay)) throw PolicyError("decay must be non-negative");
                 },
                 [](const auto&) {},
             },
             kind);
}

PolicyKind parse_policy(std::string_view text) {
  const auto parts = split(text, ':');
  const auto name = parts.front();
  PolicyKind kind;
  if (name == "thompson" && parts.size() == 1) {
    kind = policy::Thompson{};
  } else if (name == "random" && parts.size() == 1) {
    kind = policy::Random{};
  } else if (name == "uniform" && parts.size() == 1) {
    kind = policy::UniformRoundRobin{};
  } else if (name == "epsilon_greedy" && parts.size() <= 2) {
    policy::EpsilonGreedy p;
    if (parts.size() == 2) p.epsilon = parse_number(parts[1]);
    kind = p;
  } else if (name == "decaying_epsilon" && parts.size() <= 3) {
    policy::DecayingEpsilon p;
    if (parts.size() >= 2) p.epsilon0 = parse_number(parts[1]);
    if (parts.size() == 3) p.decay = parse_number(parts[2]);
    kind = p;
  } else {
    throw PolicyError("unknown policy: " + std::string(text));
  }
  validate(kind);
  return kind;
}

PolicyKind policy_from_json(const Json& doc) {
  if (doc.is_string()) return parse_policy(doc.get<std::string>());
  if (!doc.is_object()) throw PolicyError("policy must be a string or an object");
  const auto name = doc.value("kind", std::string{});
  PolicyKind kind;
  if (name == "epsilon_greedy") {
    kind = policy::EpsilonGreedy{doc.value("epsilon", 0.1)};
  } else if (name == "decaying_epsilon") {
    kind = policy::DecayingEpsilon{doc.value("epsilon0", 1.0), doc.value("decay", 0.01)};
  } else {
    kind = parse_policy(name);
  }
  validate(kind);
  return kind;
}

Json policy_to_json(const PolicyKind& kind) {
  return std::visit(Overloaded{
                        [](const policy::EpsilonGreedy& p) {
                          return Json{{"kind", "epsilon_greedy"}, {"epsilon", p.epsilon}};
                        },
                        [](const policy::DecayingEpsilon& p) {
                          return Json{{"kind", "decaying_epsilon"}, {"epsilon0", p.epsilon0}, {"decay", p.decay}};
                        },
                        [&](const auto&) { return Json{{"kind", to_string(kind)}}; },
                    },
                    kind);
}

ArmSet init_bandit(const PriorMatrix& priors, ActivityContext context, PriorsMode mode, double strength) {
  if (!(strength > 0.0) || !std::isfinite(strength)) throw PolicyError("prior strength must be positive");
  ArmSet arms;
  for (const auto& id : eligible_arms(priors, context)) {
    ArmPosterior post;
    if (mode == PriorsMode::Informed) {
      const double p = priors.get(context, id)->probability;
      post.alpha = std::max(p * strength, kMinPseudoCount);
      post.beta = std::max((1.0 - p) * strength, kMinPseudoCount);
    }
    arms.push_back(Arm{id, post});
  }
  return arms;
}

std::size_t thompson_select(const ArmSet& arms, Rng& rng) {
  require_arms(arms);
  std::size_t best = 0;
  double best_draw = -1.0;
  for (std::size_t i = 0; i < arms.size(); ++i) {
    const double draw = rng.beta(arms[i].posterior.alpha, arms[i].posterior.beta);
    if (draw > best_draw) {
      best_draw = draw;
      best = i;
    }
  }
  return best;
}

void apply_reward(ArmSet& arms, std::string_view arm_id, double reward) {
  if (!(reward >= 0.0 && reward <= 1.0)) throw PolicyError("reward must lie in [0, 1]");
  Arm& arm = find_arm(arms, arm_id);
  arm.posterior.alpha += reward;
  arm.posterior.beta += 1.0 - reward;
}

ArmSet update_posterior(ArmSet arms, std::string_view arm_id, double reward) {
  apply_reward(arms, arm_id, reward);
  return arms;
}

std::size_t argmax_mean(const ArmSet& arms) {
  require_arms(arms);
  std::size_t best = 0;
  for (std::size_t i = 1; i < arms.size(); ++i) {
    if (arms[i].posterior.mean() > arms[best].posterior.mean()) best = i;
  }
  return best;
}

double effective_epsilon(const PolicyKind& kind, std::uint64_t t) {
  if (const auto* p = std::get_if<policy::EpsilonGreedy>(&kind)) return p->epsilon;
  if (const auto* p = std::get_if<policy::DecayingEpsilon>(&kind)) {
    return p->epsilon0 / (1.0 + p->decay * static_cast<double>(t));
  }
  return 0.0;
}

std::size_t baseline_select(const PolicyKind& kind, const ArmSet& arms, std::uint64_t t, Rng& rng) {
  require_arms(arms);
  return std::visit(Overloaded{
                        [&](const policy::Thompson&) -> std::size_t {
                          throw PolicyError("Thompson Sampling is not a baseline policy");
                        },
                        [&](const policy::Random&) -> std::size_t { return rng.uniform_index(arms.size()); },
                        [&](const policy::UniformRoundRobin&) -> std::size_t { return t % arms.size(); },
                        [&](const auto&) -> std::size_t {
                          if (rng.uniform() < effective_epsilon(kind, t)) return rng.uniform_index(arms.size());
                          return argmax_mean(arms);
                        },
                    },
                    kind);
}

std::size_t select_arm(const PolicyKind& kind, const ArmSet& arms, std::uint64_t t, Rng& rng) {
  if (std::holds_alternative<policy::Thompson>(kind)) return thompson_select(arms, rng);
  return baseline_select(kind, arms, t, rng);
}

BanditBank::BanditBank(PriorMatrix priors, PriorsMode mode, double strength)
    : priors_(std::move(priors)), mode_(mode), strength_(strength) {
  if (!(strength_ > 0.0)) throw PolicyError("prior strength must be positive");
}

ContextBandit& BanditBank::at(const std::string& user_id, ActivityContext context) {
  BankKey key{user_id, context};
  auto it = bandits_.find(key);
  if (it == bandits_.end()) {
    it = bandits_.emplace(std::move(key), ContextBandit{init_bandit(priors_, context, mode_, strength_), 0}).first;
  }
  return it->second;
}

const ContextBandit* BanditBank::find(const std::string& user_id, ActivityContext context) const {
  auto it = bandits_.find(BankKey{user_id, context});
  return it == bandits_.end() ? nullptr : &it->second;
}

Json bandit_snapshot(const std::string& user_id, ActivityContext context, const ContextBandit& bandit,
                     const PolicyKind& kind, std::uint64_t seed) {
  Json arms = Json::array();
  for (const auto& arm : bandit.arms) {
    arms.push_back({{"id", arm.id}, {"alpha", arm.posterior.alpha}, {"beta", arm.posterior.beta}});
  }
  return Json{{"user_id", user_id},
              {"context", to_token(context)},
              {"arms", std::move(arms)},
              {"decision_count", bandit.decision_count},
              {"policy", to_string(kind)},
              {"seed", seed}};
}

std::pair<BankKey, ContextBandit> parse_bandit_snapshot(const Json& doc) {
  try {
    BankKey key{doc.at("user_id").get<std::string>(), require_activity(doc.at("context").get<std::string>())};
    ContextBandit bandit;
    bandit.decision_count = doc.at("decision_count").get<std::uint64_t>();
    for (const auto& a : doc.at("arms")) {
      Arm arm{a.at("id").get<std::string>(), {a.at("alpha").get<double>(), a.at("beta").get<double>()}};
      if (!(arm.posterior.alpha > 0.0) || !(arm.posterior.beta > 0.0)) {
        throw PolicyError("arm " + arm.id + " has non-positive pseudo-counts");
      }
      bandit.arms.push_back(std::move(arm));
    }
    return {std::move(key), std::move(bandit)};
  } catch (const Json::exception& e) {
    throw PolicyError(std::string("malformed bandit snapshot: ") + e.what());
  }
}

}  // namespace jitai
