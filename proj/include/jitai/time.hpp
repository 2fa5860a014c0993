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

// RFC 3339 timestamps with the original UTC offset preserved. Ordering and
// arithmetic use the absolute instant; calendar bucketing uses local time.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace jitai {

class TimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Weekday { Monday, Tuesday, Wednesday, Thursday, Friday, Saturday, Sunday };

struct Timestamp {
  std::int64_t epoch_ms = 0;     // milliseconds since 1970-01-01T00:00:00Z
  std::int32_t offset_min = 0;   // local offset from UTC, minutes

  static Timestamp from_epoch_seconds(std::int64_t s, std::int32_t offset_min = 0) {
    return Timestamp{s * 1000, offset_min};
  }

  Timestamp plus_ms(std::int64_t ms) const { return Timestamp{epoch_ms + ms, offset_min}; }
  Timestamp plus_minutes(std::int64_t m) const { return plus_ms(m * 60'000); }

  // Local wall clock.
  std::int64_t local_ms() const { return epoch_ms + std::int64_t{offset_min} * 60'000; }
  std::int32_t local_seconds_of_day() const;
  Weekday local_weekday() const;

  friend bool operator==(const Timestamp& a, const Timestamp& b) {
    return a.epoch_ms == b.epoch_ms;
  }
  friend auto operator<=>(const Timestamp& a, const Timestamp& b) {
    return a.epoch_ms <=> b.epoch_ms;
  }
};

inline constexpr std::int64_t kMinuteMs = 60'000;

// Accepts YYYY-MM-DDTHH:MM:SS[.fff][Z|+HH:MM|-HH:MM]; 't'/' ' separators allowed.
Timestamp parse_rfc3339(std::string_view text);

// Emits seconds precision unless the instant carries milliseconds.
std::string format_rfc3339(const Timestamp& ts);

// Civil date helpers (proleptic Gregorian).
std::int64_t days_from_civil(int year, unsigned month, unsigned day);

std::string_view to_token(Weekday d);

}  // namespace jitai
