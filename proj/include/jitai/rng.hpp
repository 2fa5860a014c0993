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

// Seed-stable random variates.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. Everything layered on top is implemented here rather than taken
// from <random> distributions, whose algorithms are left to the library
// vendor, so a seed yields the same variates with any conforming toolchain:
//
//   uniform   top 53 bits of one engine word, scaled by 2^-53
//   normal    Marsaglia polar method, spare value cached
//   gamma     Marsaglia-Tsang squeeze for shape >= 1; shape < 1 uses the
//             boost G(a) = G(a + 1) * U^(1/a), carried in log space
//   beta      G(a) / (G(a) + G(b)), evaluated in log space so that very
//             small shapes cannot produce 0/0

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>

namespace jitai {

std::uint64_t splitmix64(std::uint64_t& state);

// Derives an independent stream seed from a base seed and a stream label.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

// FNV-1a, used to turn identifiers into stream labels.
std::uint64_t fnv1a64(std::string_view text);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // [0, 1)
  double uniform();
  // (0, 1)
  double uniform_open();
  // Unbiased integer in [0, n); n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }

  double normal();
  double gamma(double shape);
  // log of a Gamma(shape, 1) variate; finite even when the variate underflows.
  double log_gamma_variate(double shape);
  double beta(double a, double b);

  // Serialized engine state (standard stream format of mt19937_64).
  std::string save_state() const;
  void load_state(const std::string& state);

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

}  // namespace jitai
