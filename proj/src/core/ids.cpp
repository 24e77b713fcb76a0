/* Copyright 2026 The Synthforge Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "synthforge/core/ids.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <ctime>

#include "synthforge/core/hash.hpp"

namespace synthforge {

double SplitMixStream::normal() {
  // 1 - u keeps the logarithm finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Clock wall_clock() {
  return [] {
    using namespace std::chrono;
    return static_cast<std::uint64_t>(
        duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count());
  };
}

Clock fixed_clock(std::uint64_t epoch_ms) {
  return [epoch_ms] { return epoch_ms; };
}

std::string format_iso8601(std::uint64_t epoch_ms) {
  const std::time_t secs = static_cast<std::time_t>(epoch_ms / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03uZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                static_cast<unsigned>(epoch_ms % 1000));
  return buf;
}

namespace {

constexpr std::string_view kCrockford = "0123456789ABCDEFGHJKMNPQRSTVWXYZ";

}  // namespace

IdFactory::IdFactory(std::uint64_t seed, Clock clock) : seed_(seed), clock_(std::move(clock)) {}

std::string IdFactory::make(std::string_view stream, std::uint64_t ordinal) const {
  const std::uint64_t time_ms = clock_() & ((1ULL << 48) - 1);
  SplitMixStream rng(hash_combine(hash_combine(seed_, fnv1a64(stream)), ordinal));
  const std::uint64_t hi = rng.next() & 0xFFFF;  // 16 bits
  const std::uint64_t lo = rng.next();           // 64 bits

  // 128-bit value: time(48) | hi(16) | lo(64), emitted as 26 base32 digits.
  std::array<std::uint8_t, 16> bytes{};
  for (int i = 0; i < 6; ++i) bytes[i] = static_cast<std::uint8_t>(time_ms >> (8 * (5 - i)));
  bytes[6] = static_cast<std::uint8_t>(hi >> 8);
  bytes[7] = static_cast<std::uint8_t>(hi);
  for (int i = 0; i < 8; ++i) bytes[8 + i] = static_cast<std::uint8_t>(lo >> (8 * (7 - i)));

  std::string out(26, '0');
  // The leading digit holds the top 3 bits; the rest take 5 bits each.
  int bit = -2;
  for (int d = 0; d < 26; ++d, bit += 5) {
    unsigned value = 0;
    for (int k = 0; k < 5; ++k) {
      const int b = bit + k;
      unsigned v = 0;
      if (b >= 0) v = (bytes[b / 8] >> (7 - b % 8)) & 1U;
      value = (value << 1) | v;
    }
    out[d] = kCrockford[value];
  }
  return out;
}

bool is_valid_ulid(std::string_view id) {
  if (id.size() != 26) return false;
  if (id[0] > '7') return false;
  for (char ch : id) {
    if (kCrockford.find(ch) == std::string_view::npos) return false;
  }
  return true;
}

}  // namespace synthforge
