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

// Passive-sensing log ingestion and the notification-to-context join.
//
// Every log line is one JSON record carrying a "stream" tag and a "user".
// Records are grouped per user and per stream and sorted by time. Feature
// derivation then attaches to each notification at most one record from
// each stream, using a per-stream tolerance rule.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "jitai/domain.hpp"
#include "jitai/jsonl.hpp"
#include "jitai/time.hpp"

namespace jitai {

class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class BatteryStatus { Charging, Full, Discharging, NotCharging };
enum class ActivityLabel { Still, Tilting, Walking, InVehicle, OnBicycle, Running, OnFoot };
enum class TimeOfDay { Morning, Afternoon, Evening };
enum class WeekType1 { EarlyWeek, MidWeek, Weekend };
enum class WeekType2 { Weekday, Weekend };
enum class BatteryLevel { Critical, Low, Medium, High };
enum class AppCategory {
  Other,
  ProductivityTools,
  CommunicationSocial,
  GamesSimulation,
  EntertainmentMedia,
  ShoppingFinanceTravel,
  LifestyleHealth,
};
enum class LocationCategory {
  CampusOpenArea,
  AcademicBuildingLab,
  SportsRegion,
  CafeteriaEatery,
  DormitoryArea,
  OutsideCampus,
};

std::string_view to_token(BatteryStatus v);  // "Charging|Full|Discharging|Not Charging"
std::string_view to_token(ActivityLabel v);  // "still|tilting|walking|on_foot|in_vehicle|on_bicycle|running"
std::string_view to_token(TimeOfDay v);
std::string_view to_token(WeekType1 v);
std::string_view to_token(WeekType2 v);
std::string_view to_token(BatteryLevel v);
std::string_view to_token(AppCategory v);
std::string_view to_token(LocationCategory v);

std::optional<BatteryStatus> parse_battery_status(std::string_view token);
std::optional<ActivityLabel> parse_activity_label(std::string_view token);
std::optional<AppCategory> parse_app_category(std::string_view token);
std::optional<LocationCategory> parse_location_category(std::string_view token);

struct BatteryRecord {
  Timestamp ts;
  BatteryStatus status = BatteryStatus::Discharging;
  int level = 0;            // percent
  double voltage_mv = 0.0;  // retained, unused by features
  double temperature_c = 0.0;
  bool power_saving = false;
  friend bool operator==(const BatteryRecord&, const BatteryRecord&) = default;
};

struct ScreenRecord {
  Timestamp ts;
  bool screen_on = false;
  bool unlocked = false;
  friend bool operator==(const ScreenRecord&, const ScreenRecord&) = default;
};

struct ActivityRecord {
  Timestamp ts;
  ActivityLabel label = ActivityLabel::Still;
  int confidence = 0;
  friend bool operator==(const ActivityRecord&, const ActivityRecord&) = default;
};

struct AppUsageRecord {
  Timestamp ts;  // session start
  std::string package;
  std::int64_t foreground_ms = 0;
  friend bool operator==(const AppUsageRecord&, const AppUsageRecord&) = default;
};

struct CallRecord {
  Timestamp start;
  Timestamp end;
  std::string type;    // incoming | outgoing
  std::string status;  // missed | complete
  std::string hashed_number;
  friend bool operator==(const CallRecord&, const CallRecord&) = default;
};

struct GpsRecord {
  Timestamp ts;
  double lat = 0.0;
  double lon = 0.0;
  double alt = 0.0;
  friend bool operator==(const GpsRecord&, const GpsRecord&) = default;
};

using SensorRecord = std::variant<BatteryRecord, ScreenRecord, ActivityRecord, AppUsageRecord, CallRecord, GpsRecord>;

inline const Timestamp& record_time(const BatteryRecord& r) { return r.ts; }
inline const Timestamp& record_time(const ScreenRecord& r) { return r.ts; }
inline const Timestamp& record_time(const ActivityRecord& r) { return r.ts; }
inline const Timestamp& record_time(const AppUsageRecord& r) { return r.ts; }
inline const Timestamp& record_time(const CallRecord& r) { return r.start; }
inline const Timestamp& record_time(const GpsRecord& r) { return r.ts; }

struct NotificationEvent {
  std::string user_id;
  Timestamp notified_at;
  std::optional<Timestamp> responded_at;
  Response response = Response::Missed;
  std::optional<ActivityContext> activity_context;
  std::optional<SocialContext> social_context;
  std::optional<std::string> suggested_arm;
  friend bool operator==(const NotificationEvent&, const NotificationEvent&) = default;
};

struct UserStreams {
  std::vector<BatteryRecord> battery;
  std::vector<ScreenRecord> screen;
  std::vector<ActivityRecord> activity;
  std::vector<AppUsageRecord> app_usage;
  std::vector<CallRecord> calls;
  std::vector<GpsRecord> gps;
  std::vector<NotificationEvent> notifications;
};

struct Reject {
  std::string source;
  std::size_t line = 0;
  std::string reason;
  std::string text;
};

struct EventStore {
  std::map<std::string, UserStreams> users;
  std::vector<Reject> rejects;

  // Number of sensor streams (out of six) holding at least one record.
  std::size_t populated_streams() const;
  std::size_t notification_count() const;
};

// Appends one log to the store without sorting.
void parse_log_stream(std::istream& in, const std::string& source, EventStore& store);
// Sorts every stream and enforces duplicate-key rules.
void finalize_store(EventStore& store);
EventStore parse_logs(std::span<const std::filesystem::path> files);

void write_rejects_jsonl(std::ostream& out, std::span<const Reject> rejects);

// Nearest record by |record time - at|, or nothing beyond tolerance. Stream
// must be sorted; an equidistant pair resolves to the earlier record.
template <typename Record>
const Record* map_nearest(const Timestamp& at, std::span<const Record> stream, std::int64_t tolerance_ms) {
  auto it = std::lower_bound(stream.begin(), stream.end(), at,
                             [](const Record& r, const Timestamp& t) { return record_time(r) < t; });
  const Record* best = nullptr;
  std::int64_t best_gap = 0;
  if (it != stream.begin()) {
    const Record& before = *std::prev(it);
    best = &before;
    best_gap = at.epoch_ms - record_time(before).epoch_ms;
  }
  if (it != stream.end()) {
    const std::int64_t gap = record_time(*it).epoch_ms - at.epoch_ms;
    if (!best || gap < best_gap) {
      best = &*it;
      best_gap = gap;
    }
  }
  if (!best || best_gap > tolerance_ms) return nullptr;
  return best;
}

// Most recent record with time in [at - lookback, at].
template <typename Record>
const Record* latest_within(const Timestamp& at, std::span<const Record> stream, std::int64_t lookback_ms) {
  auto it = std::upper_bound(stream.begin(), stream.end(), at,
                             [](const Timestamp& t, const Record& r) { return t < record_time(r); });
  if (it == stream.begin()) return nullptr;
  const Record& last = *std::prev(it);
  if (at.epoch_ms - record_time(last).epoch_ms > lookback_ms) return nullptr;
  return &last;
}

// OnFoot is reported as Walking.
constexpr ActivityLabel merge_activity(ActivityLabel label) {
  return label == ActivityLabel::OnFoot ? ActivityLabel::Walking : label;
}

// Modal merged label over [at - window, at]; ties go to the label seen most recently.
std::optional<ActivityLabel> activity_mode_window(const Timestamp& at, std::span<const ActivityRecord> stream,
                                                  std::int64_t window_ms = 5 * kMinuteMs);

// True when some call's closed [start, end] interval contains at.
bool on_call(const Timestamp& at, std::span<const CallRecord> calls);

struct Place {
  std::string name;
  double lat = 0.0;
  double lon = 0.0;
  LocationCategory category = LocationCategory::CampusOpenArea;
};

struct PlacesTable {
  std::vector<Place> places;
  std::vector<std::pair<double, double>> campus_polygon;  // (lat, lon) vertices
};

// Lines are {"type":"place", name, lat, lon, category} or
// {"type":"campus", "polygon": [[lat, lon], ...]}.
PlacesTable load_places(std::istream& in);

double haversine_m(double lat1, double lon1, double lat2, double lon2);
bool inside_polygon(double lat, double lon, std::span<const std::pair<double, double>> polygon);

std::optional<LocationCategory> resolve_location(const Timestamp& at, std::span<const GpsRecord> gps,
                                                 const PlacesTable& places, double radius_m = 50.0,
                                                 std::int64_t tolerance_ms = 15 * kMinuteMs);

using AppCatalog = std::map<std::string, AppCategory, std::less<>>;

// Lines are {package, category}.
AppCatalog load_app_catalog(std::istream& in);
AppCategory categorize_app(std::string_view package, const AppCatalog& catalog);

// [07:00, 12:00) Morning, [12:00, 16:00) Afternoon, [16:00, 20:00] Evening,
// nothing outside those hours. Uses the local clock of the timestamp.
std::optional<TimeOfDay> time_of_day(const Timestamp& ts);
WeekType1 week_type_1(Weekday day);
WeekType2 week_type_2(Weekday day);
// [0, 10] Critical, (10, 20] Low, (20, 60] Medium, (60, 100] High.
BatteryLevel battery_level_category(int level);

struct FeatureRow {
  NotificationEvent notification;
  std::optional<TimeOfDay> time_of_day;
  Weekday day_of_week = Weekday::Monday;
  WeekType1 week_cat_1 = WeekType1::EarlyWeek;
  WeekType2 week_cat_2 = WeekType2::Weekday;
  std::optional<BatteryLevel> battery_level_cat;
  std::optional<BatteryStatus> battery_status;
  std::optional<bool> power_saving;
  std::optional<bool> screen_on;
  std::optional<bool> unlocked;
  std::optional<ActivityLabel> activity_label;
  std::optional<AppCategory> app_category;
  bool on_call = false;
  std::optional<LocationCategory> location_category;
  friend bool operator==(const FeatureRow&, const FeatureRow&) = default;
};

struct JoinTolerances {
  std::int64_t battery_ms = 30 * kMinuteMs;
  std::int64_t screen_ms = 30 * kMinuteMs;
  std::int64_t app_lookback_ms = 30 * kMinuteMs;
  std::int64_t activity_window_ms = 5 * kMinuteMs;
  std::int64_t gps_ms = 15 * kMinuteMs;
  double place_radius_m = 50.0;
};

struct FeatureCatalogs {
  AppCatalog apps;
  PlacesTable places;
};

FeatureRow derive_features(const NotificationEvent& notification, const UserStreams& streams,
                           const FeatureCatalogs& catalogs, const JoinTolerances& tol = {});

// All notifications in the store, ordered by user then notification time.
std::vector<FeatureRow> derive_all(const EventStore& store, const FeatureCatalogs& catalogs,
                                   const JoinTolerances& tol = {});

// Grouping features, in report order.
std::span<const std::string_view> feature_names();
// Value of a named feature as its wire token; nothing when absent.
std::optional<std::string> feature_value(const FeatureRow& row, std::string_view feature);

Json feature_row_to_json(const FeatureRow& row);
FeatureRow feature_row_from_json(const Json& doc);
std::vector<FeatureRow> load_feature_rows(std::istream& in);

Json notification_to_json(const NotificationEvent& n);
NotificationEvent notification_from_json(const Json& doc);

}  // namespace jitai
