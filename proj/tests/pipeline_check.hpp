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

// Compares the pipeline fixture against its hand-built expected rows.

#include <algorithm>
#include <string>
#include <vector>

#include "jitai/ingest.hpp"
#include "test_support.hpp"

namespace jitai::test {

struct PipelineCheck {
  std::size_t expected_rows = 0;
  std::size_t derived_rows = 0;
  std::size_t matched = 0;
  std::size_t rejects = 0;
  std::vector<std::string> mismatches;
};

inline std::string expected_token(const Json& v) { return v.is_null() ? std::string("<absent>") : v.get<std::string>(); }

inline PipelineCheck check_pipeline_fixture() {
  PipelineCheck out;
  const std::vector<std::filesystem::path> logs{fixture_file("pipeline/logs.jsonl")};
  const EventStore store = parse_logs(logs);
  out.rejects = store.rejects.size();

  FeatureCatalogs catalogs;
  auto places = open_input(fixture_file("pipeline/places.jsonl"));
  catalogs.places = load_places(places);
  auto apps = open_input(data_file("app_categories.jsonl"));
  catalogs.apps = load_app_catalog(apps);

  const auto rows = derive_all(store, catalogs);
  out.derived_rows = rows.size();

  std::vector<Json> expected;
  auto in = open_input(fixture_file("pipeline/expected.jsonl"));
  for_each_json_line(in, [&](std::size_t, const Json& doc) { expected.push_back(doc); });
  out.expected_rows = expected.size();

  for (std::size_t i = 0; i < std::min(rows.size(), expected.size()); ++i) {
    const FeatureRow& row = rows[i];
    const Json& exp = expected[i];
    std::vector<std::string> diffs;
    auto cmp = [&](const std::string& key, const std::string& got) {
      const std::string want = expected_token(exp.at(key));
      if (want != got) diffs.push_back(key + " expected " + want + " got " + got);
    };
    const NotificationEvent& n = row.notification;
    cmp("user", n.user_id);
    cmp("notified_at", format_rfc3339(n.notified_at));
    cmp("responded_at", n.responded_at ? format_rfc3339(*n.responded_at) : "<absent>");
    cmp("response", std::string(to_token(n.response)));
    cmp("arm", n.suggested_arm.value_or("<absent>"));
    for (auto name : feature_names()) {
      cmp(std::string(name), feature_value(row, name).value_or("<absent>"));
    }
    if (diffs.empty()) {
      ++out.matched;
    } else {
      std::string msg = "case " + exp.at("case").dump() + ":";
      for (const auto& d : diffs) msg += " " + d + ";";
      out.mismatches.push_back(msg);
    }
  }
  return out;
}

}  // namespace jitai::test
