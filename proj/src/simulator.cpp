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


#include "jitai/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace jitai {
namespace {

constexpr double kWeightTolerance = 1e-9;

template <std::size_t N>
void check_weights(const std::array<double, N>& w, const char* what) {
  double sum = 0.0;
  for (double x : w) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw SimulationError(std::string(what) + " weights must be non-negative");
    sum += x;
  }
  if (std::abs(sum - 1.0) > kWeightTolerance) {
    throw SimulationError(std::string(what) + " weights must sum to 1");
  }
}

template <std::size_t N>
std::size_t sample_categorical(const std::array<double, N>& w, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < N; ++i) {
    if (w[i] <= 0.0) continue;
    last_positive = i;
    acc += w[i];
    if (u < acc) return i;
  }
  return last_positive;
}

int parse_hhmm(const std::string& text) {
  int h = 0, m = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%d:%d%c", &h, &m, &tail) != 2 || h < 0 || h > 23 || m < 0 || m > 59) {
    throw SimulationError("schedule entries must be HH:MM, got " + text);
  }
  return h * 60 + m;
}

std::string format_hhmm(int minutes) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d:%02d", minutes / 60, minutes % 60);
  return buf;
}

Timestamp start_of_day(const std::string& date, std::int32_t offset_min) {
  Timestamp t = parse_rfc3339(date + "T00:00:00Z").plus_minutes(-offset_min);
  t.offset_min = offset_min;
  return t;
}

}  // namespace

Json profile_to_json(const ResponseProfile& profile) {
  switch (profile.kind) {
    case ResponseProfile::Kind::Simple:
      return Json{{"kind", "simple"}};
    case ResponseProfile::Kind::Ternary:
      return Json{{"kind", "ternary"}, {"not_feasible_share", profile.not_feasible_share}};
    case ResponseProfile::Kind::WithMisses:
      return Json{{"kind", "with_misses"}, {"miss_probability", profile.miss_probability}};
  }
  return Json{};
}

ResponseProfile profile_from_json(const Json& doc) {
  const auto kind = doc.is_string() ? doc.get<std::string>() : doc.value("kind", std::string("simple"));
  ResponseProfile p;
  if (kind == "simple") {
    p = ResponseProfile::simple();
  } else if (kind == "ternary") {
    p = ResponseProfile::ternary(doc.is_object() ? doc.value("not_feasible_share", 0.5) : 0.5);
  } else if (kind == "with_misses") {
    p = ResponseProfile::with_misses(doc.is_object() ? doc.value("miss_probability", 0.2) : 0.2);
  } else {
    throw SimulationError("unknown response profile: " + kind);
  }
  if (!(p.not_feasible_share >= 0.0 && p.not_feasible_share <= 1.0) ||
      !(p.miss_probability >= 0.0 && p.miss_probability <= 1.0)) {
    throw SimulationError("response profile parameters must lie in [0, 1]");
  }
  return p;
}

ActivityWeights uniform_activity_weights() {
  ActivityWeights w;
  w.fill(1.0 / static_cast<double>(w.size()));
  return w;
}

SocialWeights uniform_social_weights() {
  SocialWeights w;
  w.fill(1.0 / static_cast<double>(w.size()));
  return w;
}

ActivityWeights single_context_weights(ActivityContext context) {
  ActivityWeights w{};
  w[static_cast<std::size_t>(context)] = 1.0;
  return w;
}

double UserModel::p_yes(ActivityContext context, const std::string& arm) const {
  auto it = truth.find({context, arm});
  if (it == truth.end()) {
    throw SimulationError("no ground truth for " + arm + " in " + std::string(to_token(context)));
  }
  return it->second;
}

void UserModel::set_truth(ActivityContext context, const std::string& arm, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw SimulationError("P(Yes) must lie in [0, 1]");
  truth[{context, arm}] = p;
}

double UserModel::best_p_yes(ActivityContext context, const std::vector<std::string>& arms) const {
  double best = 0.0;
  for (const auto& arm : arms) best = std::max(best, p_yes(context, arm));
  return best;
}

UserModel build_user_model(const PriorMatrix& priors, const ResponseProfile& profile,
                           const ActivityWeights& activity_weights, const SocialWeights& social_weights) {
  check_weights(activity_weights, "activity context");
  check_weights(social_weights, "social context");
  UserModel model;
  model.profile = profile;
  model.activity_weights = activity_weights;
  model.social_weights = social_weights;
  for (auto context : kActivityContexts) {
    if (!priors.has_context(context)) continue;
    for (const auto& arm : eligible_arms(priors, context)) {
      model.truth[{context, arm}] = priors.get(context, arm)->probability;
    }
  }
  return model;
}

Response sample_response(const UserModel& model, ActivityContext context, const std::string& arm, Rng& rng) {
  const double p = model.p_yes(context, arm);
  switch (model.profile.kind) {
    case ResponseProfile::Kind::Simple:
      return rng.bernoulli(p) ? Response::Yes : Response::No;
    case ResponseProfile::Kind::Ternary: {
      const double u = rng.uniform();
      if (u >= p) return Response::No;
      return u < p * (1.0 - model.profile.not_feasible_share) ? Response::Yes : Response::NotFeasibleNow;
    }
    case ResponseProfile::Kind::WithMisses:
      if (rng.bernoulli(model.profile.miss_probability)) return Response::Missed;
      return rng.bernoulli(p) ? Response::Yes : Response::No;
  }
  return Response::Missed;
}

double expected_reward(const UserModel& model, ActivityContext context, const std::string& arm) {
  const double p = model.p_yes(context, arm);
  if (model.profile.kind == ResponseProfile::Kind::Ternary) {
    const double w = model.profile.not_feasible_share;
    return p * (1.0 - w) + 0.5 * p * w;
  }
  return p;
}

std::vector<int> SimConfig::default_schedule() {
  std::vector<int> out;
  for (int hour = 7; hour <= 19; ++hour) out.push_back(hour * 60 + 55);
  return out;
}

void SimConfig::validate() const {
  if (days <= 0) throw SimulationError("days must be positive");
  if (users <= 0) throw SimulationError("users must be positive");
  if (schedule_minutes.empty()) throw SimulationError("schedule must contain at least one decision point");
  for (std::size_t i = 0; i < schedule_minutes.size(); ++i) {
    if (schedule_minutes[i] < 0 || schedule_minutes[i] >= 24 * 60) throw SimulationError("schedule entry out of day");
    if (i > 0 && schedule_minutes[i] <= schedule_minutes[i - 1]) {
      throw SimulationError("schedule must be strictly increasing within a day");
    }
  }
  if (!(prior_strength > 0.0)) throw SimulationError("prior strength must be positive");
  jitai::validate(policy);
  (void)start_of_day(start_date, utc_offset_min);
}

std::uint64_t SimConfig::scheduled_decisions() const {
  return static_cast<std::uint64_t>(days) * schedule_minutes.size() * static_cast<std::uint64_t>(users);
}

std::string user_label(int user) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "u%03d", user);
  return buf;
}

TrajectorySummary summarize(const std::vector<TrajectoryRecord>& records) {
  TrajectorySummary s;
  s.decisions = records.size();
  double total = 0.0;
  std::map<ActivityContext, double> sums;
  for (const auto& r : records) {
    if (!r.reward) continue;
    ++s.responded;
    total += *r.reward;
    sums[r.context] += *r.reward;
    ++s.per_context_responded[r.context];
  }
  s.average_reward = s.responded ? total / static_cast<double>(s.responded) : 0.0;
  for (const auto& [context, sum] : sums) {
    s.per_context_average[context] = sum / static_cast<double>(s.per_context_responded[context]);
  }
  return s;
}

Trajectory run_simulation(const SimConfig& config, const UserModel& model, const PriorMatrix& priors) {
  config.validate();
  check_weights(model.activity_weights, "activity context");
  check_weights(model.social_weights, "social context");

  Rng rng(config.seed);
  BanditBank bank(priors, config.priors_mode, config.prior_strength);
  std::vector<std::string> users;
  for (int u = 0; u < config.users; ++u) users.push_back(user_label(u + 1));

  const std::uint64_t limit = config.max_decisions ? config.max_decisions : config.scheduled_decisions();
  const Timestamp epoch = start_of_day(config.start_date, config.utc_offset_min);

  Trajectory out;
  out.records.reserve(static_cast<std::size_t>(std::min(limit, config.scheduled_decisions())));
  std::uint64_t t = 0;
  for (int day = 0; day < config.days && t < limit; ++day) {
    for (int minute : config.schedule_minutes) {
      for (int u = 0; u < config.users && t < limit; ++u) {
        TrajectoryRecord rec;
        rec.t = t;
        rec.user = u + 1;
        rec.day = day;
        rec.at = epoch.plus_minutes(static_cast<std::int64_t>(day) * 24 * 60 + minute);
        rec.context = kActivityContexts[sample_categorical(model.activity_weights, rng)];
        rec.social = kSocialContexts[sample_categorical(model.social_weights, rng)];

        ContextBandit& bandit = bank.at(users[static_cast<std::size_t>(u)], rec.context);
        const std::size_t idx = select_arm(config.policy, bandit.arms, bandit.decision_count, rng);
        ++bandit.decision_count;
        rec.arm = bandit.arms[idx].id;
        rec.response = sample_response(model, rec.context, rec.arm, rng);
        rec.reward = map_reward(rec.response);
        if (rec.reward) apply_reward(bandit.arms, rec.arm, *rec.reward);

        out.records.push_back(std::move(rec));
        ++t;
      }
      if (t >= limit) break;
    }
  }

  out.summary = summarize(out.records);
  if (model.profile.kind == ResponseProfile::Kind::Simple) {
    const auto curve = compute_regret(out, model, priors);
    out.summary.cumulative_regret = curve.empty() ? 0.0 : curve.back();
  }
  return out;
}

std::vector<double> compute_regret(const Trajectory& trajectory, const UserModel& model, const PriorMatrix& priors) {
  if (model.profile.kind != ResponseProfile::Kind::Simple) {
    throw SimulationError("regret is only defined under the simple response profile");
  }
  std::map<ActivityContext, double> best;
  std::vector<double> curve;
  curve.reserve(trajectory.records.size());
  double total = 0.0;
  for (const auto& r : trajectory.records) {
    auto it = best.find(r.context);
    if (it == best.end()) it = best.emplace(r.context, model.best_p_yes(r.context, eligible_arms(priors, r.context))).first;
    total += std::max(0.0, it->second - model.p_yes(r.context, r.arm));
    curve.push_back(total);
  }
  return curve;
}

SimulationDocument parse_simulation_document(const Json& doc) {
  SimulationDocument out;
  try {
    SimConfig& c = out.config;
    c.days = doc.value("days", c.days);
    c.users = doc.value("users", c.users);
    c.seed = doc.value("seed", c.seed);
    c.max_decisions = doc.value("max_decisions", c.max_decisions);
    c.prior_strength = doc.value("prior_strength", c.prior_strength);
    c.start_date = doc.value("start_date", c.start_date);
    c.utc_offset_min = doc.value("utc_offset_minutes", c.utc_offset_min);
    if (doc.contains("policy")) c.policy = policy_from_json(doc.at("policy"));
    if (doc.contains("priors_mode")) c.priors_mode = parse_priors_mode(doc.at("priors_mode").get<std::string>());
    if (doc.contains("schedule")) {
      c.schedule_minutes.clear();
      for (const auto& entry : doc.at("schedule")) c.schedule_minutes.push_back(parse_hhmm(entry.get<std::string>()));
    }
    if (doc.contains("profile")) out.profile = profile_from_json(doc.at("profile"));
    if (doc.contains("activity_weights")) {
      out.activity_weights = {};
      for (const auto& [key, value] : doc.at("activity_weights").items()) {
        out.activity_weights[static_cast<std::size_t>(require_activity(key))] = value.get<double>();
      }
    }
    if (doc.contains("social_weights")) {
      out.social_weights = {};
      for (const auto& [key, value] : doc.at("social_weights").items()) {
        out.social_weights[static_cast<std::size_t>(require_social(key))] = value.get<double>();
      }
    }
  } catch (const Json::exception& e) {
    throw SimulationError(std::string("malformed simulation config: ") + e.what());
  } catch (const DomainError& e) {
    throw SimulationError(std::string("malformed simulation config: ") + e.what());
  }
  out.config.validate();
  check_weights(out.activity_weights, "activity context");
  check_weights(out.social_weights, "social context");
  return out;
}

Json simulation_document_to_json(const SimulationDocument& doc) {
  const SimConfig& c = doc.config;
  Json schedule = Json::array();
  for (int m : c.schedule_minutes) schedule.push_back(format_hhmm(m));
  Json aw = Json::object();
  for (auto context : kActivityContexts) aw[std::string(to_token(context))] = doc.activity_weights[static_cast<std::size_t>(context)];
  Json sw = Json::object();
  for (auto social : kSocialContexts) sw[std::string(to_token(social))] = doc.social_weights[static_cast<std::size_t>(social)];
  return Json{{"days", c.days},
              {"schedule", schedule},
              {"users", c.users},
              {"seed", c.seed},
              {"policy", policy_to_json(c.policy)},
              {"priors_mode", to_token(c.priors_mode)},
              {"prior_strength", c.prior_strength},
              {"max_decisions", c.max_decisions},
              {"start_date", c.start_date},
              {"utc_offset_minutes", c.utc_offset_min},
              {"profile", profile_to_json(doc.profile)},
              {"activity_weights", aw},
              {"social_weights", sw}};
}

void write_trajectory_jsonl(std::ostream& out, const Trajectory& trajectory) {
  for (const auto& r : trajectory.records) {
    Json doc{{"t", r.t},
             {"user", user_label(r.user)},
             {"day", r.day},
             {"at", format_rfc3339(r.at)},
             {"context", to_token(r.context)},
             {"social", to_token(r.social)},
             {"arm", r.arm},
             {"response", to_token(r.response)},
             {"reward", r.reward ? Json(*r.reward) : Json(nullptr)}};
    out << doc.dump() << '\n';
  }
}

void write_summary_csv(std::ostream& out, const SimConfig& config, const TrajectorySummary& summary) {
  char buf[64];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
  };
  const std::string policy = to_string(config.policy);
  const std::string mode(to_token(config.priors_mode));
  out << "policy,priors_mode,seed,scope,decisions,responded,average_reward,cumulative_regret\n";
  out << policy << ',' << mode << ',' << config.seed << ",all," << summary.decisions << ',' << summary.responded << ','
      << fmt(summary.average_reward) << ',' << (summary.cumulative_regret ? fmt(*summary.cumulative_regret) : "")
      << '\n';
  for (const auto& [context, avg] : summary.per_context_average) {
    out << policy << ',' << mode << ',' << config.seed << ',' << to_token(context) << ",,"
        << summary.per_context_responded.at(context) << ',' << fmt(avg) << ",\n";
  }
}

Json summary_to_json(const TrajectorySummary& summary) {
  Json per = Json::object();
  for (const auto& [context, avg] : summary.per_context_average) {
    per[std::string(to_token(context))] = {{"average_reward", avg},
                                           {"responded", summary.per_context_responded.at(context)}};
  }
  return Json{{"decisions", summary.decisions},
              {"responded", summary.responded},
              {"average_reward", summary.average_reward},
              {"per_context", per},
              {"cumulative_regret", summary.cumulative_regret ? Json(*summary.cumulative_regret) : Json(nullptr)}};
}

}  // namespace jitai
