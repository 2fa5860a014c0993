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
#include <vector>

#include "jitai/rng.hpp"

using namespace jitai;

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

template <class Draw>
Moments moments(int n, Draw draw) {
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = draw();
    sum += x;
    sq += x * x;
  }
  Moments m;
  m.mean = sum / n;
  m.var = sq / n - m.mean * m.mean;
  return m;
}

}  // namespace

TEST_CASE("engine matches the standard mt19937_64 sequence") {
  Rng rng(5489u);
  std::uint64_t last = 0;
  for (int i = 0; i < 10000; ++i) last = rng.next_u64();
  CHECK(last == 9981545732273789042ull);
}

TEST_CASE("fnv1a64 reference vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("derive_seed separates streams") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 1000; ++s) seen.insert(derive_seed(42, s));
  CHECK(seen.size() == 1000);
  CHECK(derive_seed(1, 7) != derive_seed(2, 7));
  CHECK(derive_seed(1, 7) == derive_seed(1, 7));
}

TEST_CASE("same seed gives the same variates") {
  Rng a(99);
  Rng b(99);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.beta(0.3 + i % 5, 2.0) == b.beta(0.3 + i % 5, 2.0));
    CHECK(a.normal() == b.normal());
  }
}

TEST_CASE("save and load state resumes the stream") {
  Rng a(7);
  for (int i = 0; i < 10; ++i) a.next_u64();
  const std::string state = a.save_state();
  std::vector<std::uint64_t> expected;
  for (int i = 0; i < 5; ++i) expected.push_back(a.next_u64());
  Rng b(0);
  b.load_state(state);
  for (auto v : expected) CHECK(b.next_u64() == v);
}

TEST_CASE("uniform ranges") {
  Rng rng(3);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    CHECK_UNARY(u >= 0.0 && u < 1.0);
    const double o = rng.uniform_open();
    CHECK_UNARY(o > 0.0 && o < 1.0);
  }
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) counts[rng.uniform_index(7)]++;
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}

TEST_CASE("variate moments") {
  Rng rng(11);
  const int n = 200000;
  SUBCASE("normal") {
    const auto m = moments(n, [&] { return rng.normal(); });
    CHECK(std::abs(m.mean) < 0.01);
    CHECK(std::abs(m.var - 1.0) < 0.02);
  }
  for (double shape : {0.05, 0.5, 1.0, 3.7, 19.0}) {
    CAPTURE(shape);
    const auto m = moments(n, [&] { return rng.gamma(shape); });
    CHECK(m.mean == doctest::Approx(shape).epsilon(0.03));
    CHECK(m.var == doctest::Approx(shape).epsilon(0.08));
  }
  for (auto [a, b] : std::vector<std::pair<double, double>>{{1, 1}, {0.05, 18.95}, {18.525, 0.475}, {7.3, 11.7}}) {
    CAPTURE(a);
    CAPTURE(b);
    const auto m = moments(n, [&] { return rng.beta(a, b); });
    const double mean = a / (a + b);
    const double var = a * b / ((a + b) * (a + b) * (a + b + 1));
    CHECK(std::abs(m.mean - mean) < 0.005);
    CHECK(m.var == doctest::Approx(var).epsilon(0.08));
  }
}

TEST_CASE("beta stays finite and in range for tiny shapes") {
  Rng rng(5);
  for (int i = 0; i < 10000; ++i) {
    const double x = rng.beta(0.05, 0.05);
    CHECK(std::isfinite(x));
    CHECK_UNARY(x >= 0.0 && x <= 1.0);
  }
  CHECK(std::isfinite(rng.log_gamma_variate(0.001)));
}
