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

#include <chrono>
#include <functional>
#include <string>
#include <thread>

#include "synthforge/backends/descriptor.hpp"
#include "synthforge/core/errors.hpp"

namespace synthforge::backends {

using Sleeper = std::function<void(std::chrono::milliseconds)>;

inline Sleeper real_sleeper() {
  return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

// Runs fn up to policy.max_attempts times, sleeping policy.backoff(k) before
// retry k. Only TransientProviderError is retried; once attempts run out it
// is rethrown as ProviderExhaustedError. Everything else propagates at once.
template <typename Fn>
auto call_with_retries(const RetryPolicy& policy, const Sleeper& sleep, const std::string& what, Fn&& fn)
    -> decltype(fn()) {
  for (int attempt = 1;; ++attempt) {
    try {
      return fn();
    } catch (const TransientProviderError& e) {
      if (attempt >= policy.max_attempts) {
        throw ProviderExhaustedError(what + ": gave up after " + std::to_string(attempt) +
                                     " attempts: " + e.what());
      }
      sleep(policy.backoff(attempt));
    }
  }
}

}  // namespace synthforge::backends
