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


#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "jitai/ingest.hpp"
#include "jitai/rng.hpp"
#include "pipeline_check.hpp"

using namespace jitai;

namespace {

Timestamp at(const char* text) { return parse_rfc3339(text); }

std::vector<BatteryRecord> battery_at(std::initializer_list<const char*> times) {
  std::vector<BatteryRecord> out;
  int level = 10;
  for (const char* t : times) out.push_back(BatteryRecord{at(t), BatteryStatus::Discharging, level += 10});
  return out;
}

EventStore parse_text(const std::string& text) {
  std::istringstream in(text);
  EventStore store;
  parse_log_stream(in, "mem", store);
  finalize_store(store);
  return store;
}

}  // namespace

TEST_CASE("nearest record within tolerance") {
  const auto stream = battery_at({"2024-03-04T10:00:00Z", "2024-03-04T10:40:00Z"});
  std::span<const BatteryRecord> s(stream);
  const std::int64_t tol = 30 * kMinuteMs;
  CHECK(map_nearest(at("2024-03-04T10:10:00Z"), s, tol)->level == 20);
  CHECK(map_nearest(at("2024-03-04T10:35:00Z"), s, tol)->level == 30);
  // equidistant resolves to the earlier record
  CHECK(map_nearest(at("2024-03-04T10:20:00Z"), s, tol)->level == 20);
  // tolerance is inclusive
  CHECK(map_nearest(at("2024-03-04T09:30:00Z"), s, tol)->level == 20);
  CHECK(map_nearest(at("2024-03-04T09:29:59.999Z"), s, tol) == nullptr);
  CHECK(map_nearest(at("2024-03-04T11:10:00Z"), s, tol)->level == 30);
  CHECK(map_nearest(at("2024-03-04T11:10:00.001Z"), s, tol) == nullptr);
  CHECK(map_nearest(at("2024-03-04T10:00:00Z"), std::span<const BatteryRecord>(), tol) == nullptr);
}

TEST_CASE("nearest matches a brute-force scan") {
  Rng rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<BatteryRecord> stream;
    const auto base = at("2024-03-04T00:00:00Z");
    for (int i = 0; i < 12; ++i) {
      stream.push_back(BatteryRecord{base.plus_ms(static_cast<std::int64_t>(rng.uniform_index(7200)) * 1000),
                                     BatteryStatus::Full, i});
    }
    std::sort(stream.begin(), stream.end(), [](auto& a, auto& b) { return a.ts < b.ts; });
    const Timestamp q = base.plus_ms(static_cast<std::int64_t>(rng.uniform_index(7200)) * 1000);
    const std::int64_t tol = static_cast<std::int64_t>(rng.uniform_index(1800)) * 1000;
    const BatteryRecord* best = nullptr;
    std::int64_t gap = 0;
    for (const auto& r : stream) {
      const std::int64_t g = std::llabs(r.ts.epoch_ms - q.epoch_ms);
      if (g <= tol && (!best || g < gap)) {
        best = &r;
        gap = g;
      }
    }
    const BatteryRecord* got = map_nearest(q, std::span<const BatteryRecord>(stream), tol);
    CHECK((got == nullptr) == (best == nullptr));
    if (got && best) CHECK(std::llabs(got->ts.epoch_ms - q.epoch_ms) == gap);
  }
}

TEST_CASE("latest record within lookback") {
  std::vector<AppUsageRecord> apps{{at("2024-03-04T10:00:00Z"), "a", 1}, {at("2024-03-04T10:20:00Z"), "b", 1},
                                   {at("2024-03-04T10:31:00Z"), "c", 1}};
  std::span<const AppUsageRecord> s(apps);
  CHECK(latest_within(at("2024-03-04T10:30:00Z"), s, 30 * kMinuteMs)->package == "b");
  CHECK(latest_within(at("2024-03-04T10:20:00Z"), s, 30 * kMinuteMs)->package == "b");
  CHECK(latest_within(at("2024-03-04T10:19:59Z"), s, 30 * kMinuteMs)->package == "a");
  CHECK(latest_within(at("2024-03-04T10:30:00Z"), s.first(1), 30 * kMinuteMs)->package == "a");
  CHECK(latest_within(at("2024-03-04T10:30:01Z"), s.first(1), 30 * kMinuteMs) == nullptr);
  CHECK(latest_within(at("2024-03-04T09:59:59Z"), s, 30 * kMinuteMs) == nullptr);
}

TEST_CASE("activity mode over the closed window") {
  std::vector<ActivityRecord> acts{{at("2024-03-04T09:54:59Z"), ActivityLabel::Running, 90},
                                   {at("2024-03-04T09:55:00Z"), ActivityLabel::Still, 90},
                                   {at("2024-03-04T09:56:00Z"), ActivityLabel::OnFoot, 90},
                                   {at("2024-03-04T09:57:00Z"), ActivityLabel::Walking, 90},
                                   {at("2024-03-04T09:58:00Z"), ActivityLabel::Still, 90},
                                   {at("2024-03-04T10:00:01Z"), ActivityLabel::InVehicle, 90}};
  std::span<const ActivityRecord> s(acts);
  // still x2 and walking x2 (on_foot merged); still was seen last
  CHECK(activity_mode_window(at("2024-03-04T10:00:00Z"), s) == ActivityLabel::Still);
  CHECK(activity_mode_window(at("2024-03-04T09:57:30Z"), s) == ActivityLabel::Walking);
  CHECK(activity_mode_window(at("2024-03-04T09:59:59Z"), s.subspan(2, 2)) == ActivityLabel::Walking);
  CHECK_FALSE(activity_mode_window(at("2024-03-04T11:00:00Z"), s).has_value());
  CHECK(merge_activity(ActivityLabel::OnFoot) == ActivityLabel::Walking);
}

TEST_CASE("call containment is closed on both ends") {
  std::vector<CallRecord> calls{{at("2024-03-04T10:00:00Z"), at("2024-03-04T10:05:00Z"), "incoming", "complete", "h"}};
  std::span<const CallRecord> s(calls);
  CHECK(on_call(at("2024-03-04T10:00:00Z"), s));
  CHECK(on_call(at("2024-03-04T10:05:00Z"), s));
  CHECK(on_call(at("2024-03-04T10:02:00Z"), s));
  CHECK_FALSE(on_call(at("2024-03-04T10:05:00.001Z"), s));
  CHECK_FALSE(on_call(at("2024-03-04T09:59:59Z"), s));
}

TEST_CASE("haversine against a spherical law of cosines oracle") {
  const double r = 6'371'008.8;
  const double k = std::numbers::pi / 180.0;
  auto cosines = [&](double a1, double o1, double a2, double o2) {
    return r * std::acos(std::sin(a1 * k) * std::sin(a2 * k) + std::cos(a1 * k) * std::cos(a2 * k) * std::cos((o2 - o1) * k));
  };
  CHECK(haversine_m(22.3, 87.3, 22.3, 87.3) == 0.0);
  CHECK(haversine_m(0, 0, 1, 0) == doctest::Approx(r * k).epsilon(1e-12));
  CHECK(haversine_m(22.3, 87.3, 22.31, 87.31) == doctest::Approx(cosines(22.3, 87.3, 22.31, 87.31)).epsilon(1e-6));
  CHECK(haversine_m(51.5, -0.12, 40.7, -74.0) == doctest::Approx(cosines(51.5, -0.12, 40.7, -74.0)).epsilon(1e-9));
}

TEST_CASE("point in polygon") {
  const std::vector<std::pair<double, double>> square{{0, 0}, {0, 1}, {1, 1}, {1, 0}};
  CHECK(inside_polygon(0.5, 0.5, square));
  CHECK_FALSE(inside_polygon(1.5, 0.5, square));
  CHECK_FALSE(inside_polygon(0.5, -0.1, square));
}

TEST_CASE("location resolution") {
  auto in = open_input(test::data_file("places.jsonl"));
  const PlacesTable places = load_places(in);
  const Timestamp t = at("2024-03-04T10:00:00Z");
  const Place& lab = *std::find_if(places.places.begin(), places.places.end(),
                                   [](const Place& p) { return p.name == "computing_lab"; });
  std::vector<GpsRecord> gps{{t.plus_minutes(-15), lab.lat, lab.lon, 0}};
  CHECK(resolve_location(t, gps, places) == LocationCategory::AcademicBuildingLab);
  CHECK_FALSE(resolve_location(t.plus_ms(1), gps, places).has_value());
  gps = {{t, 10.0, 10.0, 0}};
  CHECK(resolve_location(t, gps, places) == LocationCategory::OutsideCampus);
  gps = {{t, 95.0, 10.0, 0}};
  CHECK_THROWS(resolve_location(t, gps, places));
}

TEST_CASE("app categorization") {
  auto in = open_input(test::data_file("app_categories.jsonl"));
  const AppCatalog apps = load_app_catalog(in);
  CHECK(categorize_app("com.whatsapp", apps) == AppCategory::CommunicationSocial);
  CHECK(categorize_app("org.unknown.thing", apps) == AppCategory::Other);
}

TEST_CASE("time of day buckets") {
  CHECK_FALSE(time_of_day(at("2024-03-04T06:59:59+05:30")).has_value());
  CHECK(time_of_day(at("2024-03-04T07:00:00+05:30")) == TimeOfDay::Morning);
  CHECK(time_of_day(at("2024-03-04T11:59:59+05:30")) == TimeOfDay::Morning);
  CHECK(time_of_day(at("2024-03-04T12:00:00+05:30")) == TimeOfDay::Afternoon);
  CHECK(time_of_day(at("2024-03-04T16:00:00+05:30")) == TimeOfDay::Evening);
  CHECK(time_of_day(at("2024-03-04T20:00:00+05:30")) == TimeOfDay::Evening);
  CHECK_FALSE(time_of_day(at("2024-03-04T20:00:01+05:30")).has_value());
  // local clock, not UTC
  CHECK(time_of_day(at("2024-03-04T02:00:00-04:00")) == std::nullopt);
  CHECK(time_of_day(at("2024-03-04T08:00:00-04:00")) == TimeOfDay::Morning);
}

TEST_CASE("week and battery buckets") {
  CHECK(week_type_1(Weekday::Monday) == WeekType1::EarlyWeek);
  CHECK(week_type_1(Weekday::Tuesday) == WeekType1::EarlyWeek);
  CHECK(week_type_1(Weekday::Wednesday) == WeekType1::MidWeek);
  CHECK(week_type_1(Weekday::Friday) == WeekType1::MidWeek);
  CHECK(week_type_1(Weekday::Saturday) == WeekType1::Weekend);
  CHECK(week_type_2(Weekday::Sunday) == WeekType2::Weekend);
  CHECK(week_type_2(Weekday::Thursday) == WeekType2::Weekday);
  CHECK(battery_level_category(0) == BatteryLevel::Critical);
  CHECK(battery_level_category(10) == BatteryLevel::Critical);
  CHECK(battery_level_category(11) == BatteryLevel::Low);
  CHECK(battery_level_category(20) == BatteryLevel::Low);
  CHECK(battery_level_category(21) == BatteryLevel::Medium);
  CHECK(battery_level_category(60) == BatteryLevel::Medium);
  CHECK(battery_level_category(61) == BatteryLevel::High);
  CHECK(battery_level_category(100) == BatteryLevel::High);
}

TEST_CASE("malformed lines become rejects") {
  const EventStore store = parse_text(
      R"({"stream":"battery","user":"u","ts":"2024-03-04T10:00:00Z","status":"Full","level":101,"power_saving":false}
not json
{"stream":"gps","user":"u","ts":"2024-03-04T10:00:00Z","lat":1,"lon":500}
{"stream":"screen","user":"u","ts":"yesterday","screen_on":true,"unlocked":false}
{"stream":"screen","user":"u","ts":"2024-03-04T10:00:00Z","screen_on":true,"unlocked":false}
)");
  CHECK(store.rejects.size() == 4);
  CHECK(store.rejects[1].line == 2);
  CHECK(store.users.at("u").screen.size() == 1);
  CHECK(store.populated_streams() == 1);
  std::ostringstream out;
  write_rejects_jsonl(out, store.rejects);
  const std::string text = out.str();
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
}

TEST_CASE("unknown stream tag is an error") {
  CHECK_THROWS_AS(parse_text(R"({"stream":"teleport","user":"u","ts":"2024-03-04T10:00:00Z"})"), IngestError);
  CHECK(parse_logs({}).users.empty());
}

TEST_CASE("exact repeats collapse, conflicting repeats fail") {
  const std::string line =
      R"({"stream":"screen","user":"u","ts":"2024-03-04T10:00:00Z","screen_on":true,"unlocked":false})";
  CHECK(parse_text(line + "\n" + line + "\n").users.at("u").screen.size() == 1);
  const std::string other =
      R"({"stream":"screen","user":"u","ts":"2024-03-04T10:00:00Z","screen_on":false,"unlocked":false})";
  CHECK_THROWS_AS(parse_text(line + "\n" + other + "\n"), IngestError);
}

TEST_CASE("feature row JSON round trip") {
  FeatureRow row;
  row.notification.user_id = "u7";
  row.notification.notified_at = at("2024-03-04T10:55:00+05:30");
  row.notification.responded_at = at("2024-03-04T10:56:00+05:30");
  row.notification.response = Response::NotFeasibleNow;
  row.notification.activity_context = ActivityContext::Studying;
  row.notification.social_context = SocialContext::Alone;
  row.notification.suggested_arm = "neck_rolls";
  row.time_of_day = TimeOfDay::Morning;
  row.battery_status = BatteryStatus::NotCharging;
  row.screen_on = true;
  row.on_call = true;
  row.location_category = LocationCategory::DormitoryArea;
  const FeatureRow back = feature_row_from_json(Json::parse(feature_row_to_json(row).dump()));
  CHECK(back == row);
  CHECK(feature_value(back, "battery_status") == "Not Charging");
  CHECK(feature_value(back, "unlocked") == std::nullopt);
  CHECK(feature_value(back, "on_call") == "true");
}

TEST_CASE("pipeline fixture matches hand-built expectations") {
  const auto result = test::check_pipeline_fixture();
  CHECK(result.expected_rows == 100);
  CHECK(result.derived_rows == 100);
  CHECK(result.rejects == 4);
  for (const auto& m : result.mismatches) FAIL_CHECK(m);
  CHECK(result.matched == 100);
}
