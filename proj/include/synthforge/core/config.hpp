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
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "synthforge/backends/descriptor.hpp"
#include "synthforge/embedding/neighbor_index.hpp"

namespace synthforge {

struct PromptAgentSettings {
  double epsilon = 0.95;  // judge score needed to accept a prompt
  double delta = 0.92;    // raw-cosine ceiling against the memory buffer
  int prompts_per_class = 10;
  int max_refine_iterations = 5;
  // Candidates tried per class before giving up on reaching the quota,
  // as a multiple of prompts_per_class.
  int candidate_budget_factor = 4;
  int max_generation_attempts = 3;  // per candidate, for empty generations
  int max_judge_attempts = 3;       // per judge call, for unparseable replies
  std::string templates_dir;        // empty: built-in templates
  embedding::SearchMode index_mode = embedding::SearchMode::exact;
};

struct ImageAgentSettings {
  double gamma_text = 0.7;  // text-text gate on (1 + cos) / 2
  int top_n = 2;
  int fan_out = 1;          // images per prompt
  int max_retries = 2;      // per failed generation
  int image_side = 96;      // requested generation size in pixels
};

struct RelabelerSettings {
  int input_side = 384;
  int patch_side = 16;
  int inference_side = 960;  // used when the embedding provider supports it
  std::string head = "softmax";  // softmax | sigmoid
  int batch_size = 16;
  int epochs = 50;
  double learning_rate = 1e-3;
  int warmup_epochs = 2;  // epochs trained at learning_rate
  double decayed_learning_rate = 1e-4;
  double holdout_fraction = 0.1;
  double relabel_threshold = 0.5;
};

struct ProviderSettings {
  std::string mode = "simulated";  // simulated | remote
  bool cache = true;
  backends::ProviderDescriptor text;
  backends::ProviderDescriptor image;
  backends::ProviderDescriptor embedding;
};

struct PipelineConfig {
  std::filesystem::path vocabulary_path;
  std::filesystem::path output_dir;
  std::uint64_t random_seed = 0;
  int max_concurrency = 4;
  PromptAgentSettings prompts;
  ImageAgentSettings images;
  RelabelerSettings relabeler;
  ProviderSettings providers;

  PipelineConfig();

  // Throws ConfigError on any out-of-range value.
  void validate() const;

  // Switches every provider to the given mode. Simulated descriptors inherit
  // random_seed when they have no seed of their own.
  void apply_provider_mode(const std::string& mode);
  void apply_seed(std::uint64_t seed);

  // Canonical JSON of everything that influences outputs (not output_dir).
  nlohmann::json outputs_json() const;
  std::string hash() const;
};

nlohmann::json to_json(const PipelineConfig& config);
// Relative paths inside the document are resolved against base_dir.
PipelineConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace synthforge
