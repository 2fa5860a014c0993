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

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "jitai/domain.hpp"
#include "jitai/jsonl.hpp"

namespace jitai::test {

inline std::filesystem::path data_file(const char* name) { return std::filesystem::path(JITAI_DATA_DIR) / name; }
inline std::filesystem::path fixture_file(const char* name) {
  return std::filesystem::path(JITAI_FIXTURE_DIR) / name;
}

inline InterventionCatalog shipped_catalog() {
  auto in = open_input(data_file("catalog.jsonl"));
  return load_catalog(in);
}

inline PriorMatrix shipped_priors() {
  const auto catalog = shipped_catalog();
  auto in = open_input(data_file("prior_table.csv"));
  return read_prior_table(in, catalog);
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("jitai-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace jitai::test
