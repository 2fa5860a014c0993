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


#include "jitai/analytics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

namespace jitai {
namespace {

std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::optional<double> median_of(std::vector<double> v) {
  if (v.empty()) return std::nullopt;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

bool responded(Response r) { return r != Response::Missed; }

using Groups = std::map<std::string, std::vector<const FeatureRow*>>;

std::vector<NotificationEvent> notifications_of(const std::vector<const FeatureRow*>& rows) {
  std::vector<NotificationEvent> out;
  out.reserve(rows.size());
  for (const auto* r : rows) out.push_back(r->notification);
  return out;
}

// One sample per group for the requested metric and variant.
std::vector<Sample> samples_for(const Groups& groups, std::string_view metric, std::string_view variant) {
  std::vector<Sample> out;
  for (const auto& [label, rows] : groups) {
    Sample s{label, {}};
    if (metric == "completion_rate" && variant == "pooled") {
      for (const auto* r : rows) s.values.push_back(responded(r->notification.response) ? 1.0 : 0.0);
    } else if (metric == "completion_rate") {
      std::map<std::string, std::pair<std::size_t, std::size_t>> per_user;
      for (const auto* r : rows) {
        auto& [filled, missed] = per_user[r->notification.user_id];
        (responded(r->notification.response) ? filled : missed) += 1;
      }
      for (const auto& [user, counts] : per_user) {
        if (auto rate = completion_rate(counts.first, counts.second)) s.values.push_back(*rate);
      }
    } else if (metric == "response_time_s") {
      s.values = response_times(notifications_of(rows)).seconds;
    } else if (metric == "average_reward") {
      for (const auto* r : rows) {
        if (auto reward = map_reward(r->notification.response)) s.values.push_back(*reward);
      }
    }
    if (!s.values.empty()) out.push_back(std::move(s));
  }
  return out;
}

MetricTest run_test(const Groups& groups, std::string metric, std::string variant, const ReportOptions& opt) {
  MetricTest t;
  t.metric = std::move(metric);
  t.variant = std::move(variant);
  const auto samples = samples_for(groups, t.metric, t.variant);
  if (samples.size() < 2) {
    t.skipped = "fewer than two non-empty groups";
    return t;
  }
  if (samples.size() == 2) {
    t.omnibus = mann_whitney_u(samples[0], samples[1], opt.continuity_correction);
  } else {
    std::size_t total = 0;
    for (const auto& s : samples) total += s.values.size();
    if (total < 3) {
      t.skipped = "fewer than three observations";
      return t;
    }
    t.omnibus = kruskal_wallis(samples);
    t.post_hoc = dunn_posthoc(samples, Correction::Bonferroni);
  }
  t.significant = t.omnibus->p_value < opt.alpha;
  return t;
}

std::string fmt(std::optional<double> v, const char* spec = "%.4f") {
  if (!v) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, *v);
  return buf;
}

Json opt_json(std::optional<double> v) { return v ? Json(*v) : Json(nullptr); }

Json test_json(const StatTestResult& r) {
  Json j{{"test", to_token(r.test)}, {"statistic", r.statistic}, {"p", r.p_value}, {"groups", r.groups}};
  j["z"] = opt_json(r.z);
  j["df"] = r.df ? Json(*r.df) : Json(nullptr);
  j["adjusted_p"] = opt_json(r.adjusted_p);
  return j;
}

}  // namespace

std::optional<double> completion_rate(std::size_t filled, std::size_t missed) {
  if (filled + missed == 0) return std::nullopt;
  return static_cast<double>(filled) / static_cast<double>(filled + missed);
}

ResponseTimes response_times(std::span<const NotificationEvent> notifications) {
  ResponseTimes out;
  for (std::size_t i = 0; i < notifications.size(); ++i) {
    const auto& n = notifications[i];
    if (n.response == Response::Missed) continue;
    if (!n.responded_at) {
      out.rejects.push_back({i, n.user_id, "responded notification lacks responded_at"});
      continue;
    }
    const std::int64_t delta = n.responded_at->epoch_ms - n.notified_at.epoch_ms;
    if (delta < 0) {
      out.rejects.push_back({i, n.user_id, "responded_at precedes notified_at"});
      continue;
    }
    out.seconds.push_back(static_cast<double>(delta) / 1000.0);
    out.source_index.push_back(i);
  }
  return out;
}

std::optional<double> average_reward(std::span<const Response> responses) {
  double sum = 0.0;
  std::size_t n = 0;
  for (Response r : responses) {
    if (auto reward = map_reward(r)) {
      sum += *reward;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::map<std::string, std::vector<const FeatureRow*>> group_rows(std::span<const FeatureRow> rows,
                                                                 std::string_view feature) {
  Groups groups;
  for (const auto& row : rows) {
    if (auto value = feature_value(row, feature)) groups[*value].push_back(&row);
  }
  return groups;
}

std::vector<GroupMetrics> group_metrics(std::span<const FeatureRow> rows, std::string_view feature) {
  std::vector<GroupMetrics> out;
  for (const auto& [label, members] : group_rows(rows, feature)) {
    GroupMetrics g;
    g.group = label;
    g.notifications = members.size();
    std::set<std::string> users;
    std::vector<Response> responses;
    for (const auto* r : members) {
      users.insert(r->notification.user_id);
      responses.push_back(r->notification.response);
      (responded(r->notification.response) ? g.filled : g.missed) += 1;
    }
    g.participants = users.size();
    g.completion_rate = completion_rate(g.filled, g.missed);
    const auto times = response_times(notifications_of(members));
    g.mean_response_time_s = mean_of(times.seconds);
    g.median_response_time_s = median_of(times.seconds);
    g.response_time_rejects = times.rejects.size();
    g.average_reward = average_reward(responses);
    out.push_back(std::move(g));
  }
  return out;
}

Report build_report(std::span<const FeatureRow> rows, std::span<const std::string> features,
                    const ReportOptions& options) {
  Report report;
  report.options = options;
  report.rows = rows.size();
  for (const auto& feature : features) {
    const auto names = feature_names();
    if (std::find(names.begin(), names.end(), feature) == names.end()) {
      throw AnalyticsError("unknown feature '" + feature + "'");
    }
    const Groups groups = group_rows(rows, feature);
    if (groups.empty()) throw AnalyticsError("feature '" + feature + "' is absent from every row");

    FeatureReport fr;
    fr.feature = feature;
    for (const auto& [label, members] : groups) fr.rows_with_value += members.size();
    fr.groups = group_metrics(rows, feature);
    fr.tests.push_back(run_test(groups, "completion_rate", "pooled", options));
    fr.tests.push_back(run_test(groups, "completion_rate", "per_participant", options));
    fr.tests.push_back(run_test(groups, "response_time_s", "pooled", options));
    fr.tests.push_back(run_test(groups, "average_reward", "pooled", options));
    report.features.push_back(std::move(fr));
  }
  return report;
}

std::string render_text(const Report& report) {
  std::ostringstream out;
  char line[256];
  out << "rows: " << report.rows << "  alpha: " << report.options.alpha << "\n";
  for (const auto& f : report.features) {
    out << "\n== " << f.feature << " (" << f.rows_with_value << " rows with a value) ==\n";
    std::snprintf(line, sizeof line, "%-28s %6s %6s %6s %5s %10s %10s %10s\n", "group", "n", "filled", "missed",
                  "users", "completion", "resp_s_med", "avg_reward");
    out << line;
    for (const auto& g : f.groups) {
      std::snprintf(line, sizeof line, "%-28s %6zu %6zu %6zu %5zu %10s %10s %10s\n", g.group.c_str(),
                    g.notifications, g.filled, g.missed, g.participants, fmt(g.completion_rate).c_str(),
                    fmt(g.median_response_time_s, "%.1f").c_str(), fmt(g.average_reward).c_str());
      out << line;
    }
    for (const auto& t : f.tests) {
      out << "  " << t.metric << " [" << t.variant << "]: ";
      if (t.skipped) {
        out << "skipped (" << *t.skipped << ")\n";
        continue;
      }
      const auto& r = *t.omnibus;
      if (r.test == TestKind::KruskalWallis) {
        std::snprintf(line, sizeof line, "Kruskal-Wallis H=%.4f df=%d p=%.4g%s\n", r.statistic, *r.df, r.p_value,
                      t.significant ? " *" : "");
      } else {
        std::snprintf(line, sizeof line, "Mann-Whitney U=%.1f z=%.4f p=%.4g%s\n", r.statistic, r.z.value_or(0.0),
                      r.p_value, t.significant ? " *" : "");
      }
      out << line;
      for (const auto& d : t.post_hoc) {
        std::snprintf(line, sizeof line, "    dunn %s vs %s: z=%.4f p=%.4g adj=%.4g%s\n", d.groups[0].c_str(),
                      d.groups[1].c_str(), d.statistic, d.p_value, *d.adjusted_p,
                      *d.adjusted_p < report.options.alpha ? " *" : "");
        out << line;
      }
    }
  }
  return out.str();
}

Json report_to_json(const Report& report) {
  Json doc{{"rows", report.rows}, {"alpha", report.options.alpha}, {"features", Json::array()}};
  for (const auto& f : report.features) {
    Json jf{{"feature", f.feature}, {"rows_with_value", f.rows_with_value}, {"groups", Json::array()},
            {"tests", Json::array()}};
    for (const auto& g : f.groups) {
      jf["groups"].push_back(Json{{"group", g.group},
                                  {"n", g.notifications},
                                  {"filled", g.filled},
                                  {"missed", g.missed},
                                  {"participants", g.participants},
                                  {"completion_rate", opt_json(g.completion_rate)},
                                  {"mean_response_time_s", opt_json(g.mean_response_time_s)},
                                  {"median_response_time_s", opt_json(g.median_response_time_s)},
                                  {"response_time_rejects", g.response_time_rejects},
                                  {"average_reward", opt_json(g.average_reward)}});
    }
    for (const auto& t : f.tests) {
      Json jt{{"metric", t.metric}, {"variant", t.variant}, {"significant", t.significant}};
      jt["skipped"] = t.skipped ? Json(*t.skipped) : Json(nullptr);
      if (t.omnibus) {
        jt["omnibus"] = test_json(*t.omnibus);
        jt["statistic"] = t.omnibus->statistic;
        jt["df"] = t.omnibus->df ? Json(*t.omnibus->df) : Json(nullptr);
        jt["p"] = t.omnibus->p_value;
      }
      jt["post_hoc"] = Json::array();
      for (const auto& d : t.post_hoc) jt["post_hoc"].push_back(test_json(d));
      jf["tests"].push_back(std::move(jt));
    }
    doc["features"].push_back(std::move(jf));
  }
  return doc;
}

std::string report_csv(const Report& report) {
  std::ostringstream out;
  out << "feature,group,notifications,filled,missed,participants,completion_rate,mean_response_time_s,"
         "median_response_time_s,average_reward\n";
  for (const auto& f : report.features) {
    for (const auto& g : f.groups) {
      out << f.feature << ',' << g.group << ',' << g.notifications << ',' << g.filled << ',' << g.missed << ','
          << g.participants << ',' << fmt(g.completion_rate, "%.6f") << ',' << fmt(g.mean_response_time_s, "%.3f")
          << ',' << fmt(g.median_response_time_s, "%.3f") << ',' << fmt(g.average_reward, "%.6f") << '\n';
    }
  }
  return out.str();
}

}  // namespace jitai
