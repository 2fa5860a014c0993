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


#include "jitai/service.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <set>

namespace jitai {
namespace {

Json pending_json(const std::optional<PendingSuggestion>& p) {
  if (!p) return nullptr;
  return Json{{"context", to_token(p->context)},
              {"social", to_token(p->social)},
              {"arm", p->arm_id},
              {"suggested_at", format_rfc3339(p->suggested_at)}};
}

std::optional<PendingSuggestion> pending_from_json(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return PendingSuggestion{require_activity(j.at("context").get<std::string>()),
                           require_social(j.at("social").get<std::string>()), j.at("arm").get<std::string>(),
                           parse_rfc3339(j.at("suggested_at").get<std::string>())};
}

ServiceError validation(const std::string& what) { return ServiceError(ServiceErrorCode::Validation, what); }
ServiceError schema(const std::string& what) { return ServiceError(ServiceErrorCode::Schema, what); }

std::uint64_t session_number(const std::string& id) {
  if (id.size() < 3 || id.compare(0, 2, "s-") != 0) throw schema("malformed session id '" + id + "'");
  try {
    return std::stoull(id.substr(2));
  } catch (const std::exception&) {
    throw schema("malformed session id '" + id + "'");
  }
}

Json engine_identity(const ServiceConfig& c) {
  return Json{{"policy", to_string(c.policy)},
              {"priors_mode", to_token(c.priors_mode)},
              {"prior_strength", c.prior_strength},
              {"seed", c.seed},
              {"bank_mode", to_token(c.bank_mode)}};
}

}  // namespace

std::string_view to_token(BankMode mode) { return mode == BankMode::PerUser ? "per_user" : "pooled"; }

BankMode parse_bank_mode(std::string_view token) {
  if (token == "per_user") return BankMode::PerUser;
  if (token == "pooled") return BankMode::Pooled;
  throw validation("unknown bank mode '" + std::string(token) + "' (expected per_user or pooled)");
}

void ServiceConfig::validate() const {
  jitai::validate(policy);
  if (!(prior_strength > 0.0)) throw validation("prior_strength must be positive");
  if (timeout_min <= 0) throw validation("timeout_minutes must be positive");
  if (port < 0 || port > 65535) throw validation("port out of range");
}

ServiceConfig service_config_from_json(const Json& doc) {
  static const std::set<std::string> kKeys{"policy", "priors_mode", "prior_strength", "seed", "timeout_minutes",
                                           "bank_mode", "host", "port", "event_log", "snapshot"};
  if (!doc.is_object()) throw validation("service config must be a JSON object");
  ServiceConfig c;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (!kKeys.contains(key)) throw validation("unknown service config key '" + key + "'");
    }
    if (doc.contains("policy")) c.policy = policy_from_json(doc.at("policy"));
    if (doc.contains("priors_mode")) c.priors_mode = parse_priors_mode(doc.at("priors_mode").get<std::string>());
    if (doc.contains("prior_strength")) c.prior_strength = doc.at("prior_strength").get<double>();
    if (doc.contains("seed")) c.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("timeout_minutes")) c.timeout_min = doc.at("timeout_minutes").get<int>();
    if (doc.contains("bank_mode")) c.bank_mode = parse_bank_mode(doc.at("bank_mode").get<std::string>());
    if (doc.contains("host")) c.host = doc.at("host").get<std::string>();
    if (doc.contains("port")) c.port = doc.at("port").get<int>();
    if (doc.contains("event_log")) c.event_log = doc.at("event_log").get<std::string>();
    if (doc.contains("snapshot")) c.snapshot = doc.at("snapshot").get<std::string>();
  } catch (const Json::exception& e) {
    throw validation(std::string("malformed service config: ") + e.what());
  } catch (const PolicyError& e) {
    throw validation(e.what());
  }
  c.validate();
  return c;
}

Json service_config_to_json(const ServiceConfig& c) {
  Json doc{{"policy", to_string(c.policy)},
           {"priors_mode", to_token(c.priors_mode)},
           {"prior_strength", c.prior_strength},
           {"seed", c.seed},
           {"timeout_minutes", c.timeout_min},
           {"bank_mode", to_token(c.bank_mode)},
           {"host", c.host},
           {"port", c.port}};
  if (c.event_log) doc["event_log"] = c.event_log->string();
  if (c.snapshot) doc["snapshot"] = c.snapshot->string();
  return doc;
}

void apply_env_overrides(ServiceConfig& c, const EnvLookup& lookup) {
  auto number = [](const std::string& text, const char* name) -> long long {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size()) throw validation(std::string(name) + " must be an integer");
    return v;
  };
  try {
    if (auto v = lookup("JITAI_POLICY")) c.policy = parse_policy(*v);
    if (auto v = lookup("JITAI_PRIORS_MODE")) c.priors_mode = parse_priors_mode(*v);
  } catch (const PolicyError& e) {
    throw validation(e.what());
  }
  if (auto v = lookup("JITAI_SEED")) c.seed = static_cast<std::uint64_t>(number(*v, "JITAI_SEED"));
  if (auto v = lookup("JITAI_TIMEOUT_MIN")) c.timeout_min = static_cast<int>(number(*v, "JITAI_TIMEOUT_MIN"));
  if (auto v = lookup("JITAI_BANK_MODE")) c.bank_mode = parse_bank_mode(*v);
  if (auto v = lookup("JITAI_PORT")) c.port = static_cast<int>(number(*v, "JITAI_PORT"));
  if (auto v = lookup("JITAI_HOST")) c.host = *v;
  if (auto v = lookup("JITAI_EVENT_LOG")) c.event_log = *v;
  c.validate();
}

void apply_env_overrides(ServiceConfig& c) {
  apply_env_overrides(c, [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (v == nullptr) return std::nullopt;
    return std::string(v);
  });
}

Timestamp system_now() {
  using namespace std::chrono;
  return Timestamp{duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count(), 0};
}

Engine::Engine(InterventionCatalog catalog, PriorMatrix priors, ServiceConfig config, Clock clock, EventSink sink)
    : catalog_(std::move(catalog)),
      config_(std::move(config)),
      clock_(std::move(clock)),
      sink_(std::move(sink)),
      bank_(std::move(priors), config_.priors_mode, config_.prior_strength) {
  config_.validate();
  if (!clock_) clock_ = system_now;
}

std::uint64_t Engine::decision_seed(const std::string& bank_user, ActivityContext context, std::uint64_t t) const {
  std::string key = bank_user;
  key += '\x1f';
  key += to_token(context);
  key += '\x1f';
  key += std::to_string(t);
  return derive_seed(config_.seed, fnv1a64(key));
}

std::string Engine::bank_user(const std::string& user_id) const {
  return config_.bank_mode == BankMode::Pooled ? std::string(kPooledUser) : user_id;
}

void Engine::emit(Json event) {
  event["seq"] = ++seq_;
  if (sink_) sink_(event);
}

Session& Engine::session_mut(const std::string& session_id) {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw ServiceError(ServiceErrorCode::NotFound, "unknown session '" + session_id + "'");
  return it->second;
}

const Session& Engine::session(const std::string& session_id) const {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw ServiceError(ServiceErrorCode::NotFound, "unknown session '" + session_id + "'");
  return it->second;
}

std::string Engine::create_session(const std::string& user_id) {
  if (user_id.empty()) throw validation("user_id is required");
  const Timestamp now = clock_();
  Session s{"s-" + std::to_string(next_session_++), user_id, now, std::nullopt};
  const std::string id = s.id;
  sessions_.emplace(id, std::move(s));
  emit(Json{{"type", "session_created"}, {"at", format_rfc3339(now)}, {"session", id}, {"user", user_id}});
  return id;
}

Suggestion Engine::submit_context(const std::string& session_id, ActivityContext activity, SocialContext social) {
  Session& s = session_mut(session_id);
  const Timestamp now = clock_();
  expire_pending(session_id, now);
  if (s.pending) throw ServiceError(ServiceErrorCode::Conflict, "session " + session_id + " already has a pending suggestion");

  const std::string owner = bank_user(s.user_id);
  ContextBandit& bandit = bank_.at(owner, activity);
  const std::uint64_t t = bandit.decision_count;
  const std::uint64_t seed = decision_seed(owner, activity, t);
  Rng rng(seed);
  const std::size_t idx = select_arm(config_.policy, bandit.arms, t, rng);
  bandit.decision_count += 1;
  const std::string arm = bandit.arms[idx].id;
  selections_[BankKey{owner, activity}][arm] += 1;
  s.pending = PendingSuggestion{activity, social, arm, now};

  emit(Json{{"type", "suggestion"},
            {"at", format_rfc3339(now)},
            {"session", session_id},
            {"user", s.user_id},
            {"bank_user", owner},
            {"context", to_token(activity)},
            {"social", to_token(social)},
            {"arm", arm},
            {"decision", t},
            {"seed", seed},
            {"policy", to_string(config_.policy)}});

  const Intervention* item = catalog_.find(arm);
  Suggestion out;
  out.session_id = session_id;
  out.intervention_id = arm;
  out.name = item ? item->name : arm;
  out.category = item ? item->category : Category::PhysicalActivity;
  out.prompt_text = std::string(kPromptText);
  out.context = activity;
  out.social = social;
  out.suggested_at = now;
  return out;
}

ResponseAck Engine::submit_response(const std::string& session_id, Response response) {
  Session& s = session_mut(session_id);
  const auto reward = map_reward(response);
  if (!reward) throw validation("response must be yes, no or not_feasible");
  const Timestamp now = clock_();
  if (expire_pending(session_id, now)) {
    throw ServiceError(ServiceErrorCode::Conflict,
                       "suggestion for session " + session_id + " expired and was recorded as missed");
  }
  if (!s.pending) throw ServiceError(ServiceErrorCode::Conflict, "session " + session_id + " has no pending suggestion");

  const PendingSuggestion p = *s.pending;
  const std::string owner = bank_user(s.user_id);
  ContextBandit& bandit = bank_.at(owner, p.context);
  apply_reward(bandit.arms, p.arm_id, *reward);
  ArmPosterior posterior;
  for (const auto& a : bandit.arms) {
    if (a.id == p.arm_id) posterior = a.posterior;
  }
  s.pending.reset();

  emit(Json{{"type", "response"},
            {"at", format_rfc3339(now)},
            {"session", session_id},
            {"user", s.user_id},
            {"bank_user", owner},
            {"context", to_token(p.context)},
            {"arm", p.arm_id},
            {"response", to_token(response)},
            {"reward", *reward},
            {"posterior", {{"alpha", posterior.alpha}, {"beta", posterior.beta}}}});
  return ResponseAck{session_id, p.arm_id, response, *reward, posterior};
}

std::optional<MissedRecord> Engine::expire_pending(const std::string& session_id, Timestamp now) {
  Session& s = session_mut(session_id);
  if (!s.pending) return std::nullopt;
  if (now.epoch_ms - s.pending->suggested_at.epoch_ms <= std::int64_t{config_.timeout_min} * kMinuteMs) {
    return std::nullopt;
  }
  MissedRecord m{session_id, s.user_id, s.pending->context, s.pending->arm_id, s.pending->suggested_at, now};
  s.pending.reset();
  emit(Json{{"type", "missed"},
            {"at", format_rfc3339(now)},
            {"session", session_id},
            {"user", m.user_id},
            {"bank_user", bank_user(m.user_id)},
            {"context", to_token(m.context)},
            {"arm", m.arm_id},
            {"suggested_at", format_rfc3339(m.suggested_at)}});
  return m;
}

std::optional<MissedRecord> Engine::expire_due(const std::string& session_id) {
  return expire_pending(session_id, clock_());
}

std::vector<MissedRecord> Engine::expire_all(Timestamp now) {
  std::vector<MissedRecord> out;
  for (const auto& [id, s] : sessions_) {
    (void)s;
    if (auto m = expire_pending(id, now)) out.push_back(std::move(*m));
  }
  return out;
}

Json Engine::session_state(const std::string& session_id) const {
  const Session& s = session(session_id);
  const std::string owner = bank_user(s.user_id);
  Json contexts = Json::array();
  for (ActivityContext ctx : kActivityContexts) {
    const ContextBandit* live = bank_.find(owner, ctx);
    ContextBandit fresh;
    if (!live) fresh.arms = init_bandit(bank_.priors(), ctx, bank_.mode(), bank_.strength());
    const ContextBandit& b = live ? *live : fresh;
    const auto sel = selections_.find(BankKey{owner, ctx});
    Json arms = Json::array();
    for (const auto& a : b.arms) {
      const Intervention* item = catalog_.find(a.id);
      std::uint64_t count = 0;
      if (sel != selections_.end()) {
        if (auto it = sel->second.find(a.id); it != sel->second.end()) count = it->second;
      }
      arms.push_back(Json{{"id", a.id},
                          {"name", item ? item->name : a.id},
                          {"alpha", a.posterior.alpha},
                          {"beta", a.posterior.beta},
                          {"mean", a.posterior.mean()},
                          {"selections", count}});
    }
    contexts.push_back(Json{{"context", to_token(ctx)}, {"decision_count", b.decision_count}, {"arms", arms}});
  }
  return Json{{"session_id", s.id},
              {"user_id", s.user_id},
              {"created_at", format_rfc3339(s.created_at)},
              {"bank_user", owner},
              {"pending", pending_json(s.pending)},
              {"contexts", contexts}};
}

Json Engine::snapshot() const {
  Json sessions = Json::array();
  for (const auto& [id, s] : sessions_) {
    sessions.push_back(Json{{"id", id},
                            {"user", s.user_id},
                            {"created_at", format_rfc3339(s.created_at)},
                            {"pending", pending_json(s.pending)}});
  }
  Json bandits = Json::array();
  for (const auto& [key, bandit] : bank_.bandits()) {
    Json b = bandit_snapshot(key.user_id, key.context, bandit, config_.policy, config_.seed);
    Json sel = Json::object();
    if (auto it = selections_.find(key); it != selections_.end()) {
      for (const auto& [arm, n] : it->second) sel[arm] = n;
    }
    b["selections"] = std::move(sel);
    bandits.push_back(std::move(b));
  }
  return Json{{"schema_version", kSnapshotSchemaVersion},
              {"seq", seq_},
              {"next_session", next_session_},
              {"engine", engine_identity(config_)},
              {"sessions", std::move(sessions)},
              {"bandits", std::move(bandits)}};
}

void Engine::load_snapshot(const Json& snap) {
  if (!snap.is_object() || !snap.contains("schema_version")) throw schema("snapshot lacks schema_version");
  const Json& version = snap.at("schema_version");
  if (!version.is_number_integer() || version.get<int>() != kSnapshotSchemaVersion) {
    throw schema("snapshot schema_version " + version.dump() + " is not supported (expected " +
                 std::to_string(kSnapshotSchemaVersion) + ")");
  }
  try {
    if (snap.at("engine") != engine_identity(config_)) {
      throw schema("snapshot was taken under a different engine configuration: " + snap.at("engine").dump());
    }
    std::map<std::string, Session> sessions;
    for (const auto& j : snap.at("sessions")) {
      Session s{j.at("id").get<std::string>(), j.at("user").get<std::string>(),
                parse_rfc3339(j.at("created_at").get<std::string>()), pending_from_json(j.at("pending"))};
      session_number(s.id);
      const std::string id = s.id;
      sessions.emplace(id, std::move(s));
    }
    BanditBank bank(bank_.priors(), bank_.mode(), bank_.strength());
    std::map<BankKey, std::map<std::string, std::uint64_t>> selections;
    for (const auto& j : snap.at("bandits")) {
      auto [key, bandit] = parse_bandit_snapshot(j);
      for (const auto& a : bandit.arms) {
        if (!catalog_.find(a.id)) throw schema("snapshot references unknown arm '" + a.id + "'");
      }
      if (j.contains("selections")) {
        for (const auto& [arm, n] : j.at("selections").items()) selections[key][arm] = n.get<std::uint64_t>();
      }
      bank.put(std::move(key), std::move(bandit));
    }
    const auto seq = snap.at("seq").get<std::uint64_t>();
    const auto next = snap.at("next_session").get<std::uint64_t>();
    sessions_ = std::move(sessions);
    bank_ = std::move(bank);
    selections_ = std::move(selections);
    seq_ = seq;
    next_session_ = next;
  } catch (const Json::exception& e) {
    throw schema(std::string("malformed snapshot: ") + e.what());
  } catch (const PolicyError& e) {
    throw schema(std::string("malformed snapshot: ") + e.what());
  } catch (const DomainError& e) {
    throw schema(std::string("malformed snapshot: ") + e.what());
  } catch (const TimeError& e) {
    throw schema(std::string("malformed snapshot: ") + e.what());
  }
}

void Engine::restore(const Json& snap) {
  const std::uint64_t before = seq_;
  load_snapshot(snap);
  seq_ = std::max(before, seq_);
  // The restore event carries the whole snapshot so a full-log replay can
  // reset at the same point.
  Json event{{"type", "restore"}, {"at", format_rfc3339(clock_())}, {"snapshot", snap}};
  emit(std::move(event));
}

void Engine::recover(const std::optional<Json>& snap, std::span<const Json> events) {
  if (snap) load_snapshot(*snap);
  replay(events);
}

void Engine::replay(std::span<const Json> events) {
  for (const auto& event : events) {
    std::uint64_t seq = 0;
    try {
      seq = event.at("seq").get<std::uint64_t>();
    } catch (const Json::exception& e) {
      throw schema(std::string("event without seq: ") + e.what());
    }
    if (seq <= seq_) continue;
    if (seq != seq_ + 1) {
      throw schema("event log gap: expected seq " + std::to_string(seq_ + 1) + ", found " + std::to_string(seq));
    }
    try {
      apply_event(event);
    } catch (const Json::exception& e) {
      throw schema("malformed event " + std::to_string(seq) + ": " + e.what());
    } catch (const DomainError& e) {
      throw schema("malformed event " + std::to_string(seq) + ": " + e.what());
    } catch (const TimeError& e) {
      throw schema("malformed event " + std::to_string(seq) + ": " + e.what());
    }
    seq_ = seq;
  }
}

void Engine::apply_event(const Json& event) {
  const std::string type = event.at("type").get<std::string>();
  const std::string seq = std::to_string(event.at("seq").get<std::uint64_t>());
  auto diverged = [&](const std::string& what) { return schema("replay diverged at seq " + seq + ": " + what); };

  if (type == "session_created") {
    const std::string id = event.at("session").get<std::string>();
    const std::uint64_t n = session_number(id);
    if (sessions_.contains(id)) throw diverged("session " + id + " already exists");
    sessions_.emplace(id, Session{id, event.at("user").get<std::string>(),
                                  parse_rfc3339(event.at("at").get<std::string>()), std::nullopt});
    next_session_ = std::max(next_session_, n + 1);
  } else if (type == "suggestion") {
    Session& s = session_mut(event.at("session").get<std::string>());
    if (s.pending) throw diverged("suggestion while another is pending");
    const ActivityContext ctx = require_activity(event.at("context").get<std::string>());
    const std::string owner = bank_user(s.user_id);
    ContextBandit& bandit = bank_.at(owner, ctx);
    const std::uint64_t t = bandit.decision_count;
    if (event.at("decision").get<std::uint64_t>() != t) throw diverged("decision count mismatch");
    Rng rng(decision_seed(owner, ctx, t));
    const std::size_t idx = select_arm(config_.policy, bandit.arms, t, rng);
    const std::string arm = bandit.arms[idx].id;
    if (arm != event.at("arm").get<std::string>()) throw diverged("selected " + arm + ", log has " + event.at("arm").dump());
    bandit.decision_count += 1;
    selections_[BankKey{owner, ctx}][arm] += 1;
    s.pending = PendingSuggestion{ctx, require_social(event.at("social").get<std::string>()), arm,
                                  parse_rfc3339(event.at("at").get<std::string>())};
  } else if (type == "response") {
    Session& s = session_mut(event.at("session").get<std::string>());
    if (!s.pending) throw diverged("response without a pending suggestion");
    const Response response = require_response(event.at("response").get<std::string>());
    const auto reward = map_reward(response);
    if (!reward || *reward != event.at("reward").get<double>()) throw diverged("reward does not match response");
    ContextBandit& bandit = bank_.at(bank_user(s.user_id), s.pending->context);
    apply_reward(bandit.arms, s.pending->arm_id, *reward);
    s.pending.reset();
  } else if (type == "missed") {
    Session& s = session_mut(event.at("session").get<std::string>());
    if (!s.pending) throw diverged("missed record without a pending suggestion");
    s.pending.reset();
  } else if (type == "restore") {
    load_snapshot(event.at("snapshot"));
  } else {
    throw schema("unknown event type '" + type + "'");
  }
}

EventLogFile::EventLogFile(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::app);
  if (!out_) throw IoError("cannot open event log " + path.string());
}

void EventLogFile::append(const Json& event) {
  out_ << event.dump() << '\n';
  out_.flush();
  if (!out_) throw IoError("failed to append to event log");
}

std::vector<Json> read_event_log(std::istream& in) {
  std::vector<Json> out;
  for_each_json_line(in, [&](std::size_t, const Json& j) { out.push_back(j); });
  return out;
}

std::vector<Json> read_event_log(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return {};
  auto in = open_input(path);
  return read_event_log(in);
}

std::string posterior_fingerprint(const BanditBank& bank) {
  std::string out;
  char buf[96];
  for (const auto& [key, bandit] : bank.bandits()) {
    out += key.user_id;
    out += '|';
    out += to_token(key.context);
    out += '|';
    out += std::to_string(bandit.decision_count);
    out += '\n';
    for (const auto& a : bandit.arms) {
      std::snprintf(buf, sizeof buf, " %.17g %.17g\n", a.posterior.alpha, a.posterior.beta);
      out += a.id;
      out += buf;
    }
  }
  return out;
}

}  // namespace jitai
