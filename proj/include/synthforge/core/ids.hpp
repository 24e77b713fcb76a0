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

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace synthforge {

// Milliseconds since the Unix epoch.
using Clock = std::function<std::uint64_t()>;

Clock wall_clock();
// Always reports the same instant, which makes every timestamp and identifier
// in a simulated run reproducible.
Clock fixed_clock(std::uint64_t epoch_ms = 0);

std::string format_iso8601(std::uint64_t epoch_ms);

// Issues 26-character ULIDs. The random part is a pure function of
// (seed, stream, ordinal), so a stage that is resumed mid-way re-issues the
// same identifiers it would have issued in an uninterrupted run.
class IdFactory {
 public:
  IdFactory(std::uint64_t seed, Clock clock);

  std::string make(std::string_view stream, std::uint64_t ordinal) const;

  std::uint64_t now_ms() const { return clock_(); }

 private:
  std::uint64_t seed_;
  Clock clock_;
};

bool is_valid_ulid(std::string_view id);

}  // namespace synthforge
