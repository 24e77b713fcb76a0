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
#include <optional>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "synthforge/core/vocabulary.hpp"
#include "synthforge/embedding/vector.hpp"

namespace synthforge {

enum class PromptStatus { candidate, refined, accepted, rejected_quality, rejected_duplicate };

const char* to_string(PromptStatus status);
PromptStatus prompt_status_from_string(const std::string& s);

struct PromptRecord {
  std::string prompt_id;
  ClassId class_id = 0;
  std::string text;
  std::optional<embedding::EmbeddingVector> embedding;
  std::optional<double> quality_score;
  PromptStatus status = PromptStatus::candidate;
  // Set when the refine loop ran out of iterations without clearing the
  // quality threshold; the record then carries its best attempt.
  bool below_threshold = false;
  int judge_calls = 0;
};

// Throws InvariantError when the record breaks its invariants (empty text,
// accepted without embedding or score, score outside [0, 1]).
void check_invariants(const PromptRecord& record);

enum class LabelSource { none, dual_filter, relabeler };

const char* to_string(LabelSource source);
LabelSource label_source_from_string(const std::string& s);

struct ImageRecord {
  std::string image_id;
  std::string prompt_id;
  ClassId prompt_class = 0;
  int fan_index = 0;
  // Relative to the run directory, e.g. images/dog/<image_id>.png.
  std::string file_path;
  std::int64_t provider_seed = 0;
  std::optional<embedding::EmbeddingVector> embedding;
  std::set<ClassId> pseudo_labels;
  LabelSource label_source = LabelSource::none;
};

// Embeddings are not serialized: prompt embeddings live in the memory-buffer
// snapshot and image embeddings are recomputed on demand.
void to_json(nlohmann::json& j, const PromptRecord& r);
void from_json(const nlohmann::json& j, PromptRecord& r);
void to_json(nlohmann::json& j, const ImageRecord& r);
void from_json(const nlohmann::json& j, ImageRecord& r);

}  // namespace synthforge
