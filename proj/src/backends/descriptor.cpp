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

#include "synthforge/backends/descriptor.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "synthforge/core/errors.hpp"

namespace synthforge::backends {

const char* to_string(ProviderKind kind) {
  switch (kind) {
    case ProviderKind::text_generation: return "text_generation";
    case ProviderKind::image_generation: return "image_generation";
    case ProviderKind::embedding: return "embedding";
  }
  return "text_generation";
}

ProviderKind provider_kind_from_string(const std::string& s) {
  for (auto k : {ProviderKind::text_generation, ProviderKind::image_generation, ProviderKind::embedding}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown provider kind '" + s + "'");
}

std::chrono::milliseconds RetryPolicy::backoff(int retry) const {
  if (retry <= 0) return std::chrono::milliseconds(0);
  const double raw = static_cast<double>(initial_backoff.count()) * std::pow(multiplier, retry - 1);
  const double capped = std::min(raw, static_cast<double>(max_backoff.count()));
  return std::chrono::milliseconds(static_cast<std::int64_t>(capped));
}

void RetryPolicy::validate() const {
  if (max_attempts < 1) throw ConfigError("retry.max_attempts must be >= 1");
  if (initial_backoff.count() < 0 || max_backoff.count() < 0) throw ConfigError("retry backoff must be >= 0");
  if (multiplier < 1.0) throw ConfigError("retry.multiplier must be >= 1");
}

void ProviderDescriptor::validate() const {
  retry.validate();
  if (max_concurrency < 1) throw ConfigError("max_concurrency must be >= 1");
  if (requests_per_minute < 0) throw ConfigError("requests_per_minute must be >= 0");
  if (kind == ProviderKind::embedding && embedding_dim == 0) {
    throw ConfigError("embedding provider must declare embedding_dim");
  }
  if (simulated()) {
    if (!seed) throw ConfigError(std::string(to_string(kind)) + ": simulated provider requires a seed");
  } else {
    if (credentials_env.empty()) {
      throw ConfigError(std::string(to_string(kind)) +
                        ": remote provider requires credentials_env (an environment variable name)");
    }
    if (adapter != "internal" && adapter != "openai") throw ConfigError("unknown adapter '" + adapter + "'");
  }
}

std::string ProviderDescriptor::identity() const {
  std::string id = simulated() ? "simulated" : adapter;
  id += "-";
  id += model_name;
  for (char& c : id) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  }
  return id;
}

void to_json(nlohmann::json& j, const ProviderDescriptor& d) {
  j = nlohmann::json{{"kind", to_string(d.kind)},
                     {"endpoint", d.endpoint},
                     {"model_name", d.model_name},
                     {"adapter", d.adapter},
                     {"max_concurrency", d.max_concurrency},
                     {"requests_per_minute", d.requests_per_minute},
                     {"max_prompt_chars", d.max_prompt_chars},
                     {"timeout_ms", d.timeout.count()},
                     {"supports_inference_resize", d.supports_inference_resize},
                     {"retry",
                      {{"max_attempts", d.retry.max_attempts},
                       {"initial_backoff_ms", d.retry.initial_backoff.count()},
                       {"multiplier", d.retry.multiplier},
                       {"max_backoff_ms", d.retry.max_backoff.count()}}}};
  if (d.kind == ProviderKind::embedding) j["embedding_dim"] = d.embedding_dim;
  if (d.seed) j["seed"] = *d.seed;
  if (!d.credentials_env.empty()) j["credentials_env"] = d.credentials_env;
}

ProviderDescriptor descriptor_from_json(const nlohmann::json& j, ProviderKind kind) {
  ProviderDescriptor d;
  d.kind = kind;
  if (j.contains("kind") && provider_kind_from_string(j.at("kind").get<std::string>()) != kind) {
    throw ConfigError("provider descriptor kind does not match its slot");
  }
  d.endpoint = j.value("endpoint", d.endpoint);
  d.model_name = j.value("model_name", d.model_name);
  d.adapter = j.value("adapter", d.adapter);
  d.embedding_dim = j.value("embedding_dim", d.embedding_dim);
  if (j.contains("seed")) d.seed = j.at("seed").get<std::uint64_t>();
  d.credentials_env = j.value("credentials_env", d.credentials_env);
  if (j.contains("api_key")) {
    throw ConfigError("inline credentials are not accepted; use credentials_env");
  }
  d.requests_per_minute = j.value("requests_per_minute", d.requests_per_minute);
  d.max_concurrency = j.value("max_concurrency", d.max_concurrency);
  d.max_prompt_chars = j.value("max_prompt_chars", d.max_prompt_chars);
  d.timeout = std::chrono::milliseconds(j.value("timeout_ms", d.timeout.count()));
  d.supports_inference_resize = j.value("supports_inference_resize", d.supports_inference_resize);
  if (const auto it = j.find("retry"); it != j.end()) {
    d.retry.max_attempts = it->value("max_attempts", d.retry.max_attempts);
    d.retry.initial_backoff =
        std::chrono::milliseconds(it->value("initial_backoff_ms", d.retry.initial_backoff.count()));
    d.retry.multiplier = it->value("multiplier", d.retry.multiplier);
    d.retry.max_backoff = std::chrono::milliseconds(it->value("max_backoff_ms", d.retry.max_backoff.count()));
  }
  return d;
}

}  // namespace synthforge::backends
