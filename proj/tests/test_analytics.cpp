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
#include <set>

#include "jitai/analytics.hpp"
#include "jitai/rng.hpp"

using namespace jitai;

namespace {

FeatureRow row(const std::string& user, Response response, bool call, std::optional<TimeOfDay> tod,
               std::int64_t delay_s = 60) {
  FeatureRow r;
  r.notification.user_id = user;
  r.notification.notified_at = parse_rfc3339("2024-03-04T10:55:00+05:30");
  r.notification.response = response;
  if (response != Response::Missed) r.notification.responded_at = r.notification.notified_at.plus_ms(delay_s * 1000);
  r.on_call = call;
  r.time_of_day = tod;
  return r;
}

std::vector<FeatureRow> synthetic_rows(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  const Response kinds[] = {Response::Yes, Response::No, Response::NotFeasibleNow, Response::Missed};
  const TimeOfDay tods[] = {TimeOfDay::Morning, TimeOfDay::Afternoon, TimeOfDay::Evening};
  std::vector<FeatureRow> out;
  for (std::size_t i = 0; i < n; ++i) {
    const bool call = rng.bernoulli(0.3);
    std::optional<TimeOfDay> tod;
    if (rng.bernoulli(0.9)) tod = tods[rng.uniform_index(3)];
    out.push_back(row("u" + std::to_string(rng.uniform_index(6)), kinds[rng.uniform_index(4)], call, tod,
                      static_cast<std::int64_t>(rng.uniform_index(600))));
  }
  return out;
}

}  // namespace

TEST_CASE("completion rate on reference filled and missed totals") {
  CHECK(std::abs(*completion_rate(8162, 2525) - 0.7637) < 1e-4);
  CHECK(*completion_rate(8162, 2525) == 8162.0 / 10687.0);
  CHECK_FALSE(completion_rate(0, 0).has_value());
  CHECK(*completion_rate(0, 5) == 0.0);
}

TEST_CASE("average reward") {
  const std::vector<Response> r{Response::Yes, Response::NotFeasibleNow, Response::No};
  CHECK(*average_reward(r) == 0.5);
  const std::vector<Response> with_missed{Response::Yes, Response::Missed};
  CHECK(*average_reward(with_missed) == 1.0);
  const std::vector<Response> none{Response::Missed};
  CHECK_FALSE(average_reward(none).has_value());
}

TEST_CASE("response times skip misses and reject negative durations") {
  std::vector<NotificationEvent> n(4);
  const Timestamp t0 = parse_rfc3339("2024-03-04T10:55:00Z");
  for (auto& e : n) {
    e.user_id = "u";
    e.notified_at = t0;
  }
  n[0].response = Response::Yes;
  n[0].responded_at = t0.plus_ms(90'000);
  n[1].response = Response::Missed;
  n[2].response = Response::No;
  n[2].responded_at = t0.plus_ms(-1000);
  n[3].response = Response::NotFeasibleNow;
  const auto rt = response_times(n);
  CHECK(rt.seconds == std::vector<double>{90.0});
  CHECK(rt.source_index == std::vector<std::size_t>{0});
  REQUIRE(rt.rejects.size() == 2);
  CHECK(rt.rejects[0].index == 2);
  CHECK(rt.rejects[1].index == 3);
}

TEST_CASE("group metrics by feature") {
  const std::vector<FeatureRow> rows{row("a", Response::Yes, true, TimeOfDay::Morning, 30),
                                     row("a", Response::Missed, true, TimeOfDay::Morning),
                                     row("b", Response::No, false, TimeOfDay::Evening, 90),
                                     row("c", Response::NotFeasibleNow, false, std::nullopt, 60)};
  const auto tod = group_metrics(rows, "time_of_day");
  REQUIRE(tod.size() == 2);
  CHECK(tod[0].group == "evening");
  CHECK(tod[1].group == "morning");
  CHECK(tod[1].filled == 1);
  CHECK(tod[1].missed == 1);
  CHECK(*tod[1].completion_rate == 0.5);
  CHECK(tod[1].participants == 1);
  CHECK(*tod[1].mean_response_time_s == 30.0);
  const auto call = group_metrics(rows, "on_call");
  REQUIRE(call.size() == 2);
  CHECK(call[0].group == "false");
  CHECK(*call[0].average_reward == 0.25);
  CHECK(*call[0].median_response_time_s == 75.0);
}

TEST_CASE("two-level features use Mann-Whitney, three-level use Kruskal-Wallis with Dunn") {
  const auto rows = synthetic_rows(3, 400);
  const std::vector<std::string> features{"on_call", "time_of_day"};
  const Report report = build_report(rows, features);
  REQUIRE(report.features.size() == 2);
  const auto& call = report.features[0];
  CHECK(call.rows_with_value == 400);
  REQUIRE(call.tests.size() == 4);
  for (const auto& t : call.tests) {
    REQUIRE(t.omnibus);
    CHECK(t.omnibus->test == TestKind::MannWhitneyU);
    CHECK(t.post_hoc.empty());
    CHECK(t.significant == (t.omnibus->p_value < 0.05));
  }
  const auto& tod = report.features[1];
  CHECK(tod.rows_with_value < 400);
  for (const auto& t : tod.tests) {
    REQUIRE(t.omnibus);
    CHECK(t.omnibus->test == TestKind::KruskalWallis);
    CHECK(t.post_hoc.size() == 3);
  }
}

TEST_CASE("pooled completion test equals a direct test on 0/1 outcomes") {
  const auto rows = synthetic_rows(4, 300);
  const std::vector<std::string> features{"on_call"};
  const Report report = build_report(rows, features);
  Sample no{"false", {}}, yes{"true", {}};
  for (const auto& r : rows) (r.on_call ? yes : no).values.push_back(r.notification.response == Response::Missed ? 0 : 1);
  const auto direct = mann_whitney_u(no, yes);
  const auto& t = report.features[0].tests[0];
  CHECK(t.metric == "completion_rate");
  CHECK(t.variant == "pooled");
  CHECK(t.omnibus->p_value == doctest::Approx(direct.p_value).epsilon(1e-12));
}

TEST_CASE("report errors and skips") {
  const std::vector<FeatureRow> rows{row("a", Response::Yes, false, std::nullopt)};
  const std::vector<std::string> unknown{"horoscope"};
  CHECK_THROWS_AS(build_report(rows, unknown), AnalyticsError);
  const std::vector<std::string> absent{"time_of_day"};
  CHECK_THROWS_AS(build_report(rows, absent), AnalyticsError);
  const std::vector<std::string> call{"on_call"};
  const Report r = build_report(rows, call);
  for (const auto& t : r.features[0].tests) CHECK(t.skipped.has_value());
}

TEST_CASE("report serializations") {
  const auto rows = synthetic_rows(5, 120);
  const std::vector<std::string> features{"on_call", "time_of_day"};
  const Report report = build_report(rows, features, ReportOptions{0.01, false});
  const Json doc = report_to_json(report);
  CHECK(doc.at("rows") == 120);
  CHECK(doc.at("alpha") == 0.01);
  CHECK(doc.at("features").size() == 2);
  CHECK(doc.at("features")[1].at("tests")[0].at("post_hoc").size() == 3);
  const std::string csv = report_csv(report);
  CHECK(csv.rfind("feature,group,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 + 3);
  const std::string text = render_text(report);
  CHECK(text.find("on_call") != std::string::npos);
  CHECK(text.find("Kruskal") != std::string::npos);
}

TEST_CASE("property: group counts partition the rows with a value") {
  for (std::uint64_t seed = 10; seed < 30; ++seed) {
    const auto rows = synthetic_rows(seed, 80);
    for (auto feature : feature_names()) {
      std::size_t with_value = 0;
      for (const auto& r : rows) with_value += feature_value(r, feature).has_value();
      std::size_t total = 0;
      for (const auto& g : group_metrics(rows, feature)) {
        total += g.notifications;
        CHECK(g.filled + g.missed == g.notifications);
        if (g.completion_rate) CHECK_UNARY(*g.completion_rate >= 0.0 && *g.completion_rate <= 1.0);
        if (g.average_reward) CHECK_UNARY(*g.average_reward >= 0.0 && *g.average_reward <= 1.0);
      }
      CHECK(total == with_value);
    }
  }
}
