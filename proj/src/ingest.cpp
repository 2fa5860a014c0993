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


#include "jitai/ingest.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace jitai {
namespace {

template <typename Enum, std::size_t N>
using TokenTable = std::array<std::pair<Enum, std::string_view>, N>;

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(std::string_view token, const TokenTable<Enum, N>& table) {
  for (const auto& [value, name] : table) {
    if (name == token) return value;
  }
  return std::nullopt;
}

template <typename Enum, std::size_t N>
std::string_view name_of(Enum value, const TokenTable<Enum, N>& table) {
  for (const auto& [v, name] : table) {
    if (v == value) return name;
  }
  return "?";
}

constexpr TokenTable<BatteryStatus, 4> kBatteryStatus{{
    {BatteryStatus::Charging, "Charging"},
    {BatteryStatus::Full, "Full"},
    {BatteryStatus::Discharging, "Discharging"},
    {BatteryStatus::NotCharging, "Not Charging"},
}};

constexpr TokenTable<ActivityLabel, 7> kActivityLabels{{
    {ActivityLabel::Still, "still"},
    {ActivityLabel::Tilting, "tilting"},
    {ActivityLabel::Walking, "walking"},
    {ActivityLabel::OnFoot, "on_foot"},
    {ActivityLabel::InVehicle, "in_vehicle"},
    {ActivityLabel::OnBicycle, "on_bicycle"},
    {ActivityLabel::Running, "running"},
}};

constexpr TokenTable<TimeOfDay, 3> kTimeOfDay{{
    {TimeOfDay::Morning, "morning"},
    {TimeOfDay::Afternoon, "afternoon"},
    {TimeOfDay::Evening, "evening"},
}};

constexpr TokenTable<WeekType1, 3> kWeekType1{{
    {WeekType1::EarlyWeek, "early_week"},
    {WeekType1::MidWeek, "mid_week"},
    {WeekType1::Weekend, "weekend"},
}};

constexpr TokenTable<WeekType2, 2> kWeekType2{{
    {WeekType2::Weekday, "weekday"},
    {WeekType2::Weekend, "weekend"},
}};

constexpr TokenTable<BatteryLevel, 4> kBatteryLevel{{
    {BatteryLevel::Critical, "critical"},
    {BatteryLevel::Low, "low"},
    {BatteryLevel::Medium, "medium"},
    {BatteryLevel::High, "high"},
}};

constexpr TokenTable<AppCategory, 7> kAppCategory{{
    {AppCategory::Other, "other"},
    {AppCategory::ProductivityTools, "productivity_tools"},
    {AppCategory::CommunicationSocial, "communication_social"},
    {AppCategory::GamesSimulation, "games_simulation"},
    {AppCategory::EntertainmentMedia, "entertainment_media"},
    {AppCategory::ShoppingFinanceTravel, "shopping_finance_travel"},
    {AppCategory::LifestyleHealth, "lifestyle_health"},
}};

constexpr TokenTable<LocationCategory, 6> kLocation{{
    {LocationCategory::CampusOpenArea, "campus_open_area"},
    {LocationCategory::AcademicBuildingLab, "academic_building_lab"},
    {LocationCategory::SportsRegion, "sports_region"},
    {LocationCategory::CafeteriaEatery, "cafeteria_eatery"},
    {LocationCategory::DormitoryArea, "dormitory_area"},
    {LocationCategory::OutsideCampus, "outside_campus"},
}};

constexpr std::array<std::string_view, 15> kFeatureNames{
    "time_of_day",    "day_of_week", "week_cat_1",      "week_cat_2",   "battery_level_cat",
    "battery_status", "power_saving", "screen_on",      "unlocked",     "activity_label",
    "app_category",   "on_call",     "location_category", "activity_context", "social_context",
};

// A malformed record; the line goes to the rejects report.
struct RecordError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Timestamp ts_field(const Json& doc, const char* key) {
  try {
    return parse_rfc3339(doc.at(key).get<std::string>());
  } catch (const TimeError& e) {
    throw RecordError(std::string(key) + ": " + e.what());
  }
}

std::optional<Timestamp> optional_ts(const Json& doc, const char* key) {
  if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
  return ts_field(doc, key);
}

template <typename T>
std::optional<T> optional_token(const Json& doc, const char* key, std::optional<T> (*parse)(std::string_view)) {
  if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
  const auto text = doc.at(key).get<std::string>();
  auto value = parse(text);
  if (!value) throw RecordError(std::string("unknown ") + key + " '" + text + "'");
  return value;
}

void check_coordinates(double lat, double lon) {
  if (!std::isfinite(lat) || !std::isfinite(lon) || lat < -90.0 || lat > 90.0 || lon < -180.0 || lon > 180.0) {
    throw IngestError("malformed coordinates");
  }
}

NotificationEvent parse_notification(const Json& doc, const std::string& user) {
  NotificationEvent n;
  n.user_id = user;
  n.notified_at = ts_field(doc, "notified_at");
  n.responded_at = optional_ts(doc, "responded_at");
  const auto response = doc.at("response").get<std::string>();
  const auto parsed = parse_response(response);
  if (!parsed) throw RecordError("unknown response '" + response + "'");
  n.response = *parsed;
  n.activity_context = optional_token<ActivityContext>(doc, "activity_context", &parse_activity);
  n.social_context = optional_token<SocialContext>(doc, "social_context", &parse_social);
  if (doc.contains("arm") && !doc.at("arm").is_null()) n.suggested_arm = doc.at("arm").get<std::string>();
  if ((n.response == Response::Missed) != !n.responded_at) {
    throw RecordError("response must be missed exactly when responded_at is absent");
  }
  if (n.responded_at && *n.responded_at < n.notified_at) {
    throw RecordError("responded_at precedes notified_at");
  }
  return n;
}

void parse_record(const Json& doc, UserStreams& streams, const std::string& user) {
  const auto tag = doc.at("stream").get<std::string>();
  if (tag == "battery") {
    BatteryRecord r;
    r.ts = ts_field(doc, "ts");
    const auto status = doc.at("status").get<std::string>();
    const auto parsed = parse_battery_status(status);
    if (!parsed) throw RecordError("unknown battery status '" + status + "'");
    r.status = *parsed;
    r.level = doc.at("level").get<int>();
    if (r.level < 0 || r.level > 100) throw RecordError("battery level out of range [0, 100]: " + std::to_string(r.level));
    r.voltage_mv = doc.value("voltage", 0.0);
    r.temperature_c = doc.value("temperature", 0.0);
    r.power_saving = doc.value("power_saving", false);
    streams.battery.push_back(r);
  } else if (tag == "screen") {
    ScreenRecord r;
    r.ts = ts_field(doc, "ts");
    r.screen_on = doc.at("screen_on").get<bool>();
    r.unlocked = doc.at("unlocked").get<bool>();
    streams.screen.push_back(r);
  } else if (tag == "activity") {
    ActivityRecord r;
    r.ts = ts_field(doc, "ts");
    const auto label = doc.at("label").get<std::string>();
    const auto parsed = parse_activity_label(label);
    if (!parsed) throw RecordError("unknown activity label '" + label + "'");
    r.label = *parsed;
    r.confidence = doc.value("confidence", 100);
    if (r.confidence < 0 || r.confidence > 100) throw RecordError("activity confidence out of range [0, 100]");
    streams.activity.push_back(r);
  } else if (tag == "app_usage") {
    AppUsageRecord r;
    r.ts = ts_field(doc, "ts");
    r.package = doc.at("package").get<std::string>();
    r.foreground_ms = doc.value("foreground_ms", std::int64_t{0});
    if (r.foreground_ms < 0) throw RecordError("negative foreground duration");
    streams.app_usage.push_back(r);
  } else if (tag == "call") {
    CallRecord r;
    r.start = ts_field(doc, "start_ts");
    r.end = ts_field(doc, "end_ts");
    if (r.end < r.start) throw RecordError("call ends before it starts");
    r.type = doc.value("type", std::string{});
    r.status = doc.value("status", std::string{});
    r.hashed_number = doc.value("hashed_number", std::string{});
    streams.calls.push_back(r);
  } else if (tag == "gps") {
    GpsRecord r;
    r.ts = ts_field(doc, "ts");
    r.lat = doc.at("lat").get<double>();
    r.lon = doc.at("lon").get<double>();
    r.alt = doc.value("alt", 0.0);
    try {
      check_coordinates(r.lat, r.lon);
    } catch (const IngestError& e) {
      throw RecordError(e.what());
    }
    streams.gps.push_back(r);
  } else if (tag == "notification") {
    streams.notifications.push_back(parse_notification(doc, user));
  } else {
    throw IngestError("unknown stream tag '" + tag + "'");
  }
}

template <typename Record>
void sort_and_check(std::vector<Record>& records, const std::string& user, const char* stream) {
  std::stable_sort(records.begin(), records.end(),
                   [](const Record& a, const Record& b) { return record_time(a) < record_time(b); });
  std::vector<Record> unique;
  unique.reserve(records.size());
  for (auto& r : records) {
    if (!unique.empty() && record_time(unique.back()) == record_time(r)) {
      if (unique.back() == r) continue;  // exact repeat of a line
      throw IngestError("conflicting records share a timestamp in " + std::string(stream) + " stream of user " + user +
                        " at " + format_rfc3339(record_time(r)));
    }
    unique.push_back(std::move(r));
  }
  records = std::move(unique);
}

}  // namespace

std::string_view to_token(BatteryStatus v) { return name_of(v, kBatteryStatus); }
std::string_view to_token(ActivityLabel v) { return name_of(v, kActivityLabels); }
std::string_view to_token(TimeOfDay v) { return name_of(v, kTimeOfDay); }
std::string_view to_token(WeekType1 v) { return name_of(v, kWeekType1); }
std::string_view to_token(WeekType2 v) { return name_of(v, kWeekType2); }
std::string_view to_token(BatteryLevel v) { return name_of(v, kBatteryLevel); }
std::string_view to_token(AppCategory v) { return name_of(v, kAppCategory); }
std::string_view to_token(LocationCategory v) { return name_of(v, kLocation); }

std::optional<BatteryStatus> parse_battery_status(std::string_view t) { return lookup(t, kBatteryStatus); }
std::optional<ActivityLabel> parse_activity_label(std::string_view t) { return lookup(t, kActivityLabels); }
std::optional<AppCategory> parse_app_category(std::string_view t) { return lookup(t, kAppCategory); }
std::optional<LocationCategory> parse_location_category(std::string_view t) { return lookup(t, kLocation); }

std::size_t EventStore::populated_streams() const {
  std::array<bool, 6> any{};
  for (const auto& [user, s] : users) {
    any[0] = any[0] || !s.battery.empty();
    any[1] = any[1] || !s.screen.empty();
    any[2] = any[2] || !s.activity.empty();
    any[3] = any[3] || !s.app_usage.empty();
    any[4] = any[4] || !s.calls.empty();
    any[5] = any[5] || !s.gps.empty();
  }
  return static_cast<std::size_t>(std::count(any.begin(), any.end(), true));
}

std::size_t EventStore::notification_count() const {
  std::size_t n = 0;
  for (const auto& [user, s] : users) n += s.notifications.size();
  return n;
}

void parse_log_stream(std::istream& in, const std::string& source, EventStore& store) {
  for_each_line(in, [&](std::size_t line_no, const std::string& text) {
    try {
      const Json doc = Json::parse(text);
      const auto user = doc.at("user").get<std::string>();
      if (user.empty()) throw RecordError("empty user id");
      UserStreams scratch;
      parse_record(doc, scratch, user);
      // Only commit after the whole record validated.
      UserStreams& s = store.users[user];
      for (auto& r : scratch.battery) s.battery.push_back(r);
      for (auto& r : scratch.screen) s.screen.push_back(r);
      for (auto& r : scratch.activity) s.activity.push_back(r);
      for (auto& r : scratch.app_usage) s.app_usage.push_back(std::move(r));
      for (auto& r : scratch.calls) s.calls.push_back(std::move(r));
      for (auto& r : scratch.gps) s.gps.push_back(r);
      for (auto& r : scratch.notifications) s.notifications.push_back(std::move(r));
    } catch (const IngestError&) {
      throw;
    } catch (const RecordError& e) {
      store.rejects.push_back({source, line_no, e.what(), text});
    } catch (const Json::exception& e) {
      store.rejects.push_back({source, line_no, e.what(), text});
    }
  });
}

void finalize_store(EventStore& store) {
  for (auto& [user, s] : store.users) {
    sort_and_check(s.battery, user, "battery");
    sort_and_check(s.screen, user, "screen");
    sort_and_check(s.activity, user, "activity");
    sort_and_check(s.app_usage, user, "app_usage");
    sort_and_check(s.calls, user, "call");
    sort_and_check(s.gps, user, "gps");
    std::stable_sort(s.notifications.begin(), s.notifications.end(),
                     [](const auto& a, const auto& b) { return a.notified_at < b.notified_at; });
  }
}

EventStore parse_logs(std::span<const std::filesystem::path> files) {
  EventStore store;
  for (const auto& path : files) {
    auto in = open_input(path);
    parse_log_stream(in, path.string(), store);
  }
  finalize_store(store);
  return store;
}

void write_rejects_jsonl(std::ostream& out, std::span<const Reject> rejects) {
  for (const auto& r : rejects) {
    out << Json{{"source", r.source}, {"line", r.line}, {"reason", r.reason}, {"text", r.text}}.dump() << '\n';
  }
}

std::optional<ActivityLabel> activity_mode_window(const Timestamp& at, std::span<const ActivityRecord> stream,
                                                  std::int64_t window_ms) {
  constexpr std::size_t kLabels = kActivityLabels.size();
  std::array<int, kLabels> counts{};
  std::array<std::int64_t, kLabels> last_seen{};
  last_seen.fill(std::numeric_limits<std::int64_t>::min());
  const Timestamp from = at.plus_ms(-window_ms);
  auto it = std::lower_bound(stream.begin(), stream.end(), from,
                             [](const ActivityRecord& r, const Timestamp& t) { return r.ts < t; });
  bool any = false;
  for (; it != stream.end() && it->ts <= at; ++it) {
    const auto idx = static_cast<std::size_t>(merge_activity(it->label));
    ++counts[idx];
    last_seen[idx] = std::max(last_seen[idx], it->ts.epoch_ms);
    any = true;
  }
  if (!any) return std::nullopt;
  std::size_t best = 0;
  for (std::size_t i = 1; i < kLabels; ++i) {
    if (counts[i] > counts[best] || (counts[i] == counts[best] && last_seen[i] > last_seen[best])) best = i;
  }
  return static_cast<ActivityLabel>(best);
}

bool on_call(const Timestamp& at, std::span<const CallRecord> calls) {
  for (const auto& c : calls) {
    if (c.start > at) break;
    if (at <= c.end) return true;
  }
  return false;
}

PlacesTable load_places(std::istream& in) {
  PlacesTable table;
  for_each_json_line(in, [&](std::size_t line_no, const Json& doc) {
    const std::string where = "places line " + std::to_string(line_no) + ": ";
    try {
      const auto type = doc.value("type", std::string("place"));
      if (type == "campus") {
        table.campus_polygon.clear();
        for (const auto& v : doc.at("polygon")) {
          const double lat = v.at(0).get<double>();
          const double lon = v.at(1).get<double>();
          check_coordinates(lat, lon);
          table.campus_polygon.emplace_back(lat, lon);
        }
        if (table.campus_polygon.size() < 3) throw IngestError("campus polygon needs at least 3 vertices");
      } else if (type == "place") {
        Place p;
        p.name = doc.at("name").get<std::string>();
        p.lat = doc.at("lat").get<double>();
        p.lon = doc.at("lon").get<double>();
        check_coordinates(p.lat, p.lon);
        const auto cat = doc.at("category").get<std::string>();
        const auto parsed = parse_location_category(cat);
        if (!parsed) throw IngestError("unknown location category '" + cat + "'");
        p.category = *parsed;
        table.places.push_back(std::move(p));
      } else {
        throw IngestError("unknown places record type '" + type + "'");
      }
    } catch (const Json::exception& e) {
      throw IngestError(where + e.what());
    } catch (const IngestError& e) {
      throw IngestError(where + e.what());
    }
  });
  return table;
}

double haversine_m(double lat1, double lon1, double lat2, double lon2) {
  constexpr double kEarthRadiusM = 6'371'008.8;
  constexpr double kRad = std::numbers::pi / 180.0;
  const double dlat = (lat2 - lat1) * kRad;
  const double dlon = (lon2 - lon1) * kRad;
  const double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(lat1 * kRad) * std::cos(lat2 * kRad) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(a)));
}

bool inside_polygon(double lat, double lon, std::span<const std::pair<double, double>> polygon) {
  // Even-odd ray cast in the (lon, lat) plane.
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const auto [lat_i, lon_i] = polygon[i];
    const auto [lat_j, lon_j] = polygon[j];
    if ((lat_i > lat) != (lat_j > lat)) {
      const double cross = lon_i + (lat - lat_i) * (lon_j - lon_i) / (lat_j - lat_i);
      if (lon < cross) inside = !inside;
    }
  }
  return inside;
}

std::optional<LocationCategory> resolve_location(const Timestamp& at, std::span<const GpsRecord> gps,
                                                 const PlacesTable& places, double radius_m,
                                                 std::int64_t tolerance_ms) {
  const GpsRecord* fix = map_nearest(at, gps, tolerance_ms);
  if (!fix) return std::nullopt;
  check_coordinates(fix->lat, fix->lon);

  const Place* nearest = nullptr;
  double nearest_d = 0.0;
  for (const auto& p : places.places) {
    const double d = haversine_m(fix->lat, fix->lon, p.lat, p.lon);
    if (!nearest || d < nearest_d) {
      nearest = &p;
      nearest_d = d;
    }
  }
  if (nearest && nearest_d <= radius_m) return nearest->category;
  if (places.campus_polygon.size() >= 3 && !inside_polygon(fix->lat, fix->lon, places.campus_polygon)) {
    return LocationCategory::OutsideCampus;
  }
  return std::nullopt;
}

AppCatalog load_app_catalog(std::istream& in) {
  AppCatalog catalog;
  for_each_json_line(in, [&](std::size_t line_no, const Json& doc) {
    try {
      const auto package = doc.at("package").get<std::string>();
      const auto cat = doc.at("category").get<std::string>();
      const auto parsed = parse_app_category(cat);
      if (!parsed) throw IngestError("unknown app category '" + cat + "'");
      catalog[package] = *parsed;
    } catch (const Json::exception& e) {
      throw IngestError("app catalog line " + std::to_string(line_no) + ": " + e.what());
    }
  });
  return catalog;
}

AppCategory categorize_app(std::string_view package, const AppCatalog& catalog) {
  auto it = catalog.find(package);
  return it == catalog.end() ? AppCategory::Other : it->second;
}

std::optional<TimeOfDay> time_of_day(const Timestamp& ts) {
  const std::int32_t s = ts.local_seconds_of_day();
  const std::int64_t ms_extra = ((ts.local_ms() % 1000) + 1000) % 1000;
  if (s < 7 * 3600) return std::nullopt;
  if (s < 12 * 3600) return TimeOfDay::Morning;
  if (s < 16 * 3600) return TimeOfDay::Afternoon;
  if (s < 20 * 3600 || (s == 20 * 3600 && ms_extra == 0)) return TimeOfDay::Evening;
  return std::nullopt;
}

WeekType1 week_type_1(Weekday day) {
  switch (day) {
    case Weekday::Monday:
    case Weekday::Tuesday:
      return WeekType1::EarlyWeek;
    case Weekday::Saturday:
    case Weekday::Sunday:
      return WeekType1::Weekend;
    default:
      return WeekType1::MidWeek;
  }
}

WeekType2 week_type_2(Weekday day) {
  return (day == Weekday::Saturday || day == Weekday::Sunday) ? WeekType2::Weekend : WeekType2::Weekday;
}

BatteryLevel battery_level_category(int level) {
  if (level < 0 || level > 100) throw IngestError("battery level out of range: " + std::to_string(level));
  if (level <= 10) return BatteryLevel::Critical;
  if (level <= 20) return BatteryLevel::Low;
  if (level <= 60) return BatteryLevel::Medium;
  return BatteryLevel::High;
}

FeatureRow derive_features(const NotificationEvent& notification, const UserStreams& streams,
                           const FeatureCatalogs& catalogs, const JoinTolerances& tol) {
  FeatureRow row;
  row.notification = notification;
  const Timestamp& at = notification.notified_at;

  row.time_of_day = time_of_day(at);
  row.day_of_week = at.local_weekday();
  row.week_cat_1 = week_type_1(row.day_of_week);
  row.week_cat_2 = week_type_2(row.day_of_week);

  if (const auto* b = map_nearest(at, std::span<const BatteryRecord>(streams.battery), tol.battery_ms)) {
    row.battery_level_cat = battery_level_category(b->level);
    row.battery_status = b->status;
    row.power_saving = b->power_saving;
  }
  if (const auto* s = map_nearest(at, std::span<const ScreenRecord>(streams.screen), tol.screen_ms)) {
    row.screen_on = s->screen_on;
    row.unlocked = s->unlocked;
  }
  row.activity_label = activity_mode_window(at, streams.activity, tol.activity_window_ms);
  if (const auto* a = latest_within(at, std::span<const AppUsageRecord>(streams.app_usage), tol.app_lookback_ms)) {
    row.app_category = categorize_app(a->package, catalogs.apps);
  }
  row.on_call = on_call(at, streams.calls);
  row.location_category = resolve_location(at, streams.gps, catalogs.places, tol.place_radius_m, tol.gps_ms);
  return row;
}

std::vector<FeatureRow> derive_all(const EventStore& store, const FeatureCatalogs& catalogs,
                                   const JoinTolerances& tol) {
  std::vector<FeatureRow> rows;
  rows.reserve(store.notification_count());
  for (const auto& [user, streams] : store.users) {
    for (const auto& n : streams.notifications) rows.push_back(derive_features(n, streams, catalogs, tol));
  }
  return rows;
}

std::span<const std::string_view> feature_names() { return kFeatureNames; }

std::optional<std::string> feature_value(const FeatureRow& row, std::string_view feature) {
  auto token = [](const auto& opt) -> std::optional<std::string> {
    if (!opt) return std::nullopt;
    return std::string(to_token(*opt));
  };
  auto flag = [](const std::optional<bool>& b) -> std::optional<std::string> {
    if (!b) return std::nullopt;
    return *b ? "true" : "false";
  };
  if (feature == "time_of_day") return token(row.time_of_day);
  if (feature == "day_of_week") return std::string(to_token(row.day_of_week));
  if (feature == "week_cat_1") return std::string(to_token(row.week_cat_1));
  if (feature == "week_cat_2") return std::string(to_token(row.week_cat_2));
  if (feature == "battery_level_cat") return token(row.battery_level_cat);
  if (feature == "battery_status") return token(row.battery_status);
  if (feature == "power_saving") return flag(row.power_saving);
  if (feature == "screen_on") return flag(row.screen_on);
  if (feature == "unlocked") return flag(row.unlocked);
  if (feature == "activity_label") return token(row.activity_label);
  if (feature == "app_category") return token(row.app_category);
  if (feature == "on_call") return flag(row.on_call);
  if (feature == "location_category") return token(row.location_category);
  if (feature == "activity_context") return token(row.notification.activity_context);
  if (feature == "social_context") return token(row.notification.social_context);
  throw IngestError("unknown feature: " + std::string(feature));
}

Json notification_to_json(const NotificationEvent& n) {
  auto opt = [](const auto& v) -> Json {
    if (!v) return nullptr;
    return std::string(to_token(*v));
  };
  return Json{{"user", n.user_id},
              {"notified_at", format_rfc3339(n.notified_at)},
              {"responded_at", n.responded_at ? Json(format_rfc3339(*n.responded_at)) : Json(nullptr)},
              {"response", to_token(n.response)},
              {"activity_context", opt(n.activity_context)},
              {"social_context", opt(n.social_context)},
              {"arm", n.suggested_arm ? Json(*n.suggested_arm) : Json(nullptr)}};
}

NotificationEvent notification_from_json(const Json& doc) {
  try {
    return parse_notification(doc, doc.at("user").get<std::string>());
  } catch (const RecordError& e) {
    throw IngestError(e.what());
  } catch (const Json::exception& e) {
    throw IngestError(e.what());
  }
}

Json feature_row_to_json(const FeatureRow& row) {
  Json doc = notification_to_json(row.notification);
  for (auto name : kFeatureNames) {
    if (name == "activity_context" || name == "social_context") continue;
    const auto value = feature_value(row, name);
    doc[std::string(name)] = value ? Json(*value) : Json(nullptr);
  }
  return doc;
}

FeatureRow feature_row_from_json(const Json& doc) {
  FeatureRow row;
  row.notification = notification_from_json(doc);
  const Timestamp& at = row.notification.notified_at;
  row.day_of_week = at.local_weekday();
  row.week_cat_1 = week_type_1(row.day_of_week);
  row.week_cat_2 = week_type_2(row.day_of_week);

  auto text = [&](const char* key) -> std::optional<std::string> {
    if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
    return doc.at(key).get<std::string>();
  };
  auto flag = [&](const char* key) -> std::optional<bool> {
    const auto v = text(key);
    if (!v) return std::nullopt;
    if (*v == "true") return true;
    if (*v == "false") return false;
    throw IngestError(std::string("bad boolean feature ") + key);
  };
  if (auto v = text("time_of_day")) {
    row.time_of_day = lookup(*v, kTimeOfDay);
    if (!row.time_of_day) throw IngestError("bad time_of_day " + *v);
  }
  if (auto v = text("battery_level_cat")) {
    row.battery_level_cat = lookup(*v, kBatteryLevel);
    if (!row.battery_level_cat) throw IngestError("bad battery_level_cat " + *v);
  }
  if (auto v = text("battery_status")) {
    row.battery_status = parse_battery_status(*v);
    if (!row.battery_status) throw IngestError("bad battery_status " + *v);
  }
  row.power_saving = flag("power_saving");
  row.screen_on = flag("screen_on");
  row.unlocked = flag("unlocked");
  if (auto v = text("activity_label")) {
    row.activity_label = parse_activity_label(*v);
    if (!row.activity_label) throw IngestError("bad activity_label " + *v);
  }
  if (auto v = text("app_category")) {
    row.app_category = parse_app_category(*v);
    if (!row.app_category) throw IngestError("bad app_category " + *v);
  }
  row.on_call = flag("on_call").value_or(false);
  if (auto v = text("location_category")) {
    row.location_category = parse_location_category(*v);
    if (!row.location_category) throw IngestError("bad location_category " + *v);
  }
  return row;
}

std::vector<FeatureRow> load_feature_rows(std::istream& in) {
  std::vector<FeatureRow> rows;
  for_each_json_line(in, [&](std::size_t line_no, const Json& doc) {
    try {
      rows.push_back(feature_row_from_json(doc));
    } catch (const IngestError& e) {
      throw IngestError("feature row line " + std::to_string(line_no) + ": " + e.what());
    }
  });
  return rows;
}

}  // namespace jitai
