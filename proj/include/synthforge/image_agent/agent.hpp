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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synthforge/backends/provider.hpp"
#include "synthforge/core/config.hpp"
#include "synthforge/core/ids.hpp"
#include "synthforge/core/records.hpp"
#include "synthforge/core/vocabulary.hpp"

namespace synthforge::image_agent {

struct CandidateEntry {
  ClassId class_id = 0;
  double text_score = 0.0;
  std::optional<double> image_score;

  friend bool operator==(const CandidateEntry&, const CandidateEntry&) = default;
};

// Classes whose text score against a prompt clears the text gate, in class
// id order.
struct CandidateLabelSet {
  std::string prompt_id;
  std::vector<CandidateEntry> entries;
};

struct HighConfidencePair {
  std::string image_id;
  std::string prompt_id;
  ClassId class_id = 0;
  double text_score = 0.0;
  double image_score = 0.0;

  friend bool operator==(const HighConfidencePair&, const HighConfidencePair&) = default;
};

void to_json(nlohmann::json& j, const HighConfidencePair& p);
void from_json(const nlohmann::json& j, HighConfidencePair& p);

struct FailedGeneration {
  std::string image_id;
  std::string prompt_id;
  int fan_index = 0;
  int attempts = 0;
  std::string reason;
};

void to_json(nlohmann::json& j, const FailedGeneration& f);
void from_json(const nlohmann::json& j, FailedGeneration& f);

struct ImageAgentContext {
  const ClassVocabulary& vocabulary;
  backends::ImageGenerator& generator;
  backends::Embedder& embedder;
  const IdFactory& ids;
  ImageAgentSettings settings;
  std::uint64_t seed = 0;
  // Image files are written below this directory.
  std::filesystem::path run_dir;
  int max_concurrency = 1;
};

// Normalized text embeddings of every class name, indexed by class id.
std::vector<embedding::EmbeddingVector> class_text_embeddings(const ClassVocabulary& vocab,
                                                              backends::Embedder& embedder);

struct SynthesisOutcome {
  std::optional<ImageRecord> image;
  std::optional<FailedGeneration> failure;
};

// Generates image fan_index of prompt p and writes it to
// images/<class_slug>/<image_id>.png. Provider failures, refusals and empty
// payloads are retried max_retries times with fresh seeds, then reported as a
// failure instead of thrown.
SynthesisOutcome synthesize(const PromptRecord& p, int fan_index, const ImageAgentContext& ctx);

// Text gate: entries for every class whose (1 + cos) / 2 against the prompt
// exceeds gamma_text. Uses p.embedding when present.
CandidateLabelSet text_candidate_labels(const PromptRecord& p, const ClassVocabulary& vocab, double gamma_text,
                                        const std::vector<embedding::EmbeddingVector>& class_embeddings,
                                        backends::Embedder& embedder);

// Fills image_score = (1 + cos) / 2 between the image and each candidate
// class. The image embedding is computed from the file (relative to run_dir)
// and cached on the record when absent.
CandidateLabelSet image_label_scores(ImageRecord& img, CandidateLabelSet candidates,
                                     const std::vector<embedding::EmbeddingVector>& class_embeddings,
                                     backends::Embedder& embedder, const std::filesystem::path& run_dir);

// The n classes with the highest image score (all of them when fewer),
// ties going to the lower class id.
std::vector<ClassId> select_top_n(const CandidateLabelSet& candidates, int n);

struct SynthesisBatch {
  std::vector<ImageRecord> images;  // by prompt id, then fan index
  std::vector<FailedGeneration> failures;
};

SynthesisBatch synthesize_all(const std::vector<PromptRecord>& prompts, const ImageAgentContext& ctx);

struct DualFilterResult {
  std::vector<HighConfidencePair> pairs;  // by prompt id, fan index, then rank
  std::vector<ImageRecord> images;        // pseudo_labels set from the gates
  std::vector<CandidateLabelSet> candidates;
};

// Text gate, image scoring and top-N selection for already synthesized images.
DualFilterResult dual_filter(const std::vector<PromptRecord>& prompts, std::vector<ImageRecord> images,
                             const ImageAgentContext& ctx);

struct HighConfidenceResult {
  DualFilterResult filtered;
  std::vector<FailedGeneration> failures;
};

// Synthesis followed by the dual filter; the pairs form the high-confidence
// training set.
HighConfidenceResult build_high_confidence_set(const std::vector<PromptRecord>& prompts,
                                               const ImageAgentContext& ctx);

}  // namespace synthforge::image_agent
