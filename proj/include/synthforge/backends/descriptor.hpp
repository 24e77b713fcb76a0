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
#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace synthforge::backends {

enum class ProviderKind { text_generation, image_generation, embedding };

const char* to_string(ProviderKind kind);
ProviderKind provider_kind_from_string(const std::string& s);

struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{30'000};

  // Delay before retry number `retry` (1-based). Nondecreasing in `retry`
  // and never above max_backoff.
  std::chrono::milliseconds backoff(int retry) const;
  void validate() const;
};

// Describes one model endpoint. `endpoint` is a URL or the literal
// "simulated"; remote endpoints name an environment variable holding the API
// key rather than carrying the key itself.
struct ProviderDescriptor {
  ProviderKind kind = ProviderKind::text_generation;
  std::string endpoint = "simulated";
  std::string model_name = "simulator";
  std::string adapter = "internal";  // wire adapter: internal | openai
  std::size_t embedding_dim = 0;     // embedding kind only
  std::optional<std::uint64_t> seed;  // simulated only
  std::string credentials_env;       // remote only
  int requests_per_minute = 0;       // 0 = unlimited
  int max_concurrency = 4;
  std::size_t max_prompt_chars = 4000;
  std::chrono::milliseconds timeout{60'000};
  bool supports_inference_resize = true;
  RetryPolicy retry;

  bool simulated() const { return endpoint == "simulated"; }
  // Throws ConfigError on a descriptor that breaks its invariants.
  void validate() const;
  // Stable provider name used for cache directories and metadata.
  std::string identity() const;
};

void to_json(nlohmann::json& j, const ProviderDescriptor& d);
ProviderDescriptor descriptor_from_json(const nlohmann::json& j, ProviderKind kind);

}  // namespace synthforge::backends
