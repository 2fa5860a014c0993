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


#include "jitai/time.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <cstdio>

namespace jitai {
namespace {

constexpr std::int64_t kDayMs = 86'400'000;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

int parse_digits(std::string_view text, std::size_t pos, std::size_t count) {
  if (pos + count > text.size()) throw TimeError("truncated timestamp: " + std::string(text));
  int value = 0;
  auto first = text.data() + pos;
  auto [ptr, ec] = std::from_chars(first, first + count, value);
  if (ec != std::errc{} || ptr != first + count) {
    throw TimeError("bad digits in timestamp: " + std::string(text));
  }
  return value;
}

void expect(std::string_view text, std::size_t pos, char c) {
  if (pos >= text.size() || text[pos] != c) {
    throw TimeError("malformed timestamp: " + std::string(text));
  }
}

}  // namespace

std::int64_t days_from_civil(int year, unsigned month, unsigned day) {
  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
  if (!ymd.ok()) throw TimeError("invalid calendar date");
  return sys_days{ymd}.time_since_epoch().count();
}

std::int32_t Timestamp::local_seconds_of_day() const {
  const std::int64_t local = local_ms();
  const std::int64_t day = floor_div(local, kDayMs);
  return static_cast<std::int32_t>((local - day * kDayMs) / 1000);
}

Weekday Timestamp::local_weekday() const {
  // 1970-01-01 was a Thursday.
  const std::int64_t day = floor_div(local_ms(), kDayMs);
  const std::int64_t idx = ((day % 7) + 7 + 3) % 7;  // Monday = 0
  return static_cast<Weekday>(idx);
}

Timestamp parse_rfc3339(std::string_view text) {
  if (text.size() < 19) throw TimeError("malformed timestamp: " + std::string(text));
  const int year = parse_digits(text, 0, 4);
  expect(text, 4, '-');
  const int month = parse_digits(text, 5, 2);
  expect(text, 7, '-');
  const int day = parse_digits(text, 8, 2);
  if (text[10] != 'T' && text[10] != 't' && text[10] != ' ') {
    throw TimeError("malformed timestamp: " + std::string(text));
  }
  const int hour = parse_digits(text, 11, 2);
  expect(text, 13, ':');
  const int minute = parse_digits(text, 14, 2);
  expect(text, 16, ':');
  const int second = parse_digits(text, 17, 2);
  if (month < 1 || month > 12 || hour > 23 || minute > 59 || second > 60) {
    throw TimeError("field out of range in timestamp: " + std::string(text));
  }

  std::size_t pos = 19;
  int millis = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    int digits = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      if (digits < 3) millis = millis * 10 + (text[pos] - '0');
      ++digits;
      ++pos;
    }
    if (digits == 0) throw TimeError("empty fraction in timestamp: " + std::string(text));
    for (int i = digits; i < 3; ++i) millis *= 10;
  }

  int offset = 0;
  if (pos >= text.size()) throw TimeError("timestamp lacks UTC offset: " + std::string(text));
  if (text[pos] == 'Z' || text[pos] == 'z') {
    ++pos;
  } else if (text[pos] == '+' || text[pos] == '-') {
    const int sign = text[pos] == '-' ? -1 : 1;
    const int oh = parse_digits(text, pos + 1, 2);
    expect(text, pos + 3, ':');
    const int om = parse_digits(text, pos + 4, 2);
    if (oh > 23 || om > 59) throw TimeError("offset out of range: " + std::string(text));
    offset = sign * (oh * 60 + om);
    pos += 6;
  } else {
    throw TimeError("malformed UTC offset: " + std::string(text));
  }
  if (pos != text.size()) throw TimeError("trailing characters in timestamp: " + std::string(text));

  const std::int64_t days = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
  const std::int64_t local_ms =
      days * kDayMs + (std::int64_t{hour} * 3600 + minute * 60 + second) * 1000 + millis;
  return Timestamp{local_ms - std::int64_t{offset} * kMinuteMs, offset};
}

std::string format_rfc3339(const Timestamp& ts) {
  using namespace std::chrono;
  const std::int64_t local = ts.local_ms();
  const std::int64_t day = floor_div(local, kDayMs);
  const std::int64_t ms_of_day = local - day * kDayMs;
  const year_month_day ymd{sys_days{days{day}}};
  const int hh = static_cast<int>(ms_of_day / 3'600'000);
  const int mm = static_cast<int>((ms_of_day / 60'000) % 60);
  const int ss = static_cast<int>((ms_of_day / 1000) % 60);
  const int ms = static_cast<int>(ms_of_day % 1000);

  std::array<char, 48> buf{};
  int n = std::snprintf(buf.data(), buf.size(), "%04d-%02u-%02uT%02d:%02d:%02d",
                        static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                        static_cast<unsigned>(ymd.day()), hh, mm, ss);
  std::string out(buf.data(), static_cast<std::size_t>(n));
  if (ms != 0) {
    n = std::snprintf(buf.data(), buf.size(), ".%03d", ms);
    out.append(buf.data(), static_cast<std::size_t>(n));
  }
  if (ts.offset_min == 0) {
    out += 'Z';
  } else {
    const int off = ts.offset_min < 0 ? -ts.offset_min : ts.offset_min;
    n = std::snprintf(buf.data(), buf.size(), "%c%02d:%02d", ts.offset_min < 0 ? '-' : '+',
                      off / 60, off % 60);
    out.append(buf.data(), static_cast<std::size_t>(n));
  }
  return out;
}

std::string_view to_token(Weekday d) {
  static constexpr std::array<std::string_view, 7> kNames{
      "Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"};
  return kNames[static_cast<std::size_t>(d)];
}

}  // namespace jitai
