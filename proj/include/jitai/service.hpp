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

// Live decision loop. The engine is event-sourced: every state change is
// emitted as one JSON record with a strictly increasing sequence number, and
// replaying those records against the initial priors rebuilds the state.
//
// Engine is not internally synchronized; the HTTP layer serializes calls.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "jitai/domain.hpp"
#include "jitai/jsonl.hpp"
#include "jitai/policies.hpp"
#include "jitai/time.hpp"

namespace jitai {

inline constexpr std::string_view kPromptText = "Will you perform the given task at this moment?";
inline constexpr int kSnapshotSchemaVersion = 1;
inline constexpr std::string_view kPooledUser = "*";

enum class ServiceErrorCode { Validation, NotFound, Conflict, Schema };

class ServiceError : public std::runtime_error {
 public:
  ServiceError(ServiceErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ServiceErrorCode code() const { return code_; }

 private:
  ServiceErrorCode code_;
};

enum class BankMode { PerUser, Pooled };
std::string_view to_token(BankMode mode);
BankMode parse_bank_mode(std::string_view token);

struct ServiceConfig {
  PolicyKind policy = policy::Thompson{};
  PriorsMode priors_mode = PriorsMode::Informed;
  double prior_strength = kDefaultPriorStrength;
  std::uint64_t seed = 42;
  int timeout_min = 60;
  BankMode bank_mode = BankMode::PerUser;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<std::filesystem::path> event_log;
  std::optional<std::filesystem::path> snapshot;

  void validate() const;
};

// Keys: policy, priors_mode, prior_strength, seed, timeout_minutes, bank_mode,
// host, port, event_log, snapshot. Unknown keys are rejected.
ServiceConfig service_config_from_json(const Json& doc);
Json service_config_to_json(const ServiceConfig& config);

// JITAI_POLICY, JITAI_SEED, JITAI_PRIORS_MODE, JITAI_TIMEOUT_MIN,
// JITAI_BANK_MODE, JITAI_PORT, JITAI_HOST, JITAI_EVENT_LOG.
using EnvLookup = std::function<std::optional<std::string>(const char*)>;
void apply_env_overrides(ServiceConfig& config, const EnvLookup& lookup);
void apply_env_overrides(ServiceConfig& config);

using Clock = std::function<Timestamp()>;
Timestamp system_now();

struct PendingSuggestion {
  ActivityContext context = ActivityContext::AttendingLecture;
  SocialContext social = SocialContext::Alone;
  std::string arm_id;
  Timestamp suggested_at;
  friend bool operator==(const PendingSuggestion&, const PendingSuggestion&) = default;
};

struct Session {
  std::string id;
  std::string user_id;
  Timestamp created_at;
  std::optional<PendingSuggestion> pending;
  friend bool operator==(const Session&, const Session&) = default;
};

struct Suggestion {
  std::string session_id;
  std::string intervention_id;
  std::string name;
  Category category = Category::PhysicalActivity;
  std::string prompt_text;
  ActivityContext context = ActivityContext::AttendingLecture;
  SocialContext social = SocialContext::Alone;
  Timestamp suggested_at;
};

struct ResponseAck {
  std::string session_id;
  std::string intervention_id;
  Response response = Response::Yes;
  double reward = 0.0;
  ArmPosterior posterior;
};

struct MissedRecord {
  std::string session_id;
  std::string user_id;
  ActivityContext context = ActivityContext::AttendingLecture;
  std::string arm_id;
  Timestamp suggested_at;
  Timestamp expired_at;
};

using EventSink = std::function<void(const Json&)>;

class Engine {
 public:
  Engine(InterventionCatalog catalog, PriorMatrix priors, ServiceConfig config, Clock clock = system_now,
         EventSink sink = {});

  std::string create_session(const std::string& user_id);
  Suggestion submit_context(const std::string& session_id, ActivityContext activity, SocialContext social);
  ResponseAck submit_response(const std::string& session_id, Response response);
  std::optional<MissedRecord> expire_pending(const std::string& session_id, Timestamp now);
  std::vector<MissedRecord> expire_all(Timestamp now);
  // expire_pending at the engine clock's current time.
  std::optional<MissedRecord> expire_due(const std::string& session_id);

  const Session& session(const std::string& session_id) const;
  // Posterior means for every activity context of the session's bank.
  Json session_state(const std::string& session_id) const;

  Json snapshot() const;
  // Replaces all state; emits a restore event so the log stays replayable.
  void restore(const Json& snapshot);
  // Applies logged events with seq beyond the current one; earlier ones are skipped.
  void replay(std::span<const Json> events);
  // Startup path: load a snapshot silently, then replay the log past it.
  void recover(const std::optional<Json>& snapshot, std::span<const Json> events);

  const BanditBank& bank() const { return bank_; }
  const std::map<std::string, Session>& sessions() const { return sessions_; }
  std::uint64_t seq() const { return seq_; }
  const ServiceConfig& config() const { return config_; }
  const InterventionCatalog& catalog() const { return catalog_; }
  void set_sink(EventSink sink) { sink_ = std::move(sink); }

  // Seed for the decision of (bank user, context) at the given decision count.
  std::uint64_t decision_seed(const std::string& bank_user, ActivityContext context, std::uint64_t t) const;

 private:
  Session& session_mut(const std::string& session_id);
  std::string bank_user(const std::string& user_id) const;
  void emit(Json event);
  void load_snapshot(const Json& snapshot);
  void apply_event(const Json& event);

  InterventionCatalog catalog_;
  ServiceConfig config_;
  Clock clock_;
  EventSink sink_;
  BanditBank bank_;
  std::map<std::string, Session> sessions_;
  std::map<BankKey, std::map<std::string, std::uint64_t>> selections_;
  std::uint64_t next_session_ = 1;
  std::uint64_t seq_ = 0;
};

// Append-only JSONL writer, flushed per record.
class EventLogFile {
 public:
  explicit EventLogFile(const std::filesystem::path& path);
  void append(const Json& event);

 private:
  std::ofstream out_;
};

std::vector<Json> read_event_log(const std::filesystem::path& path);
std::vector<Json> read_event_log(std::istream& in);

// Canonical text of every posterior parameter, for byte-level comparison.
std::string posterior_fingerprint(const BanditBank& bank);

}  // namespace jitai
