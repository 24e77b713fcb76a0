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

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synthforge/backends/provider.hpp"

namespace synthforge::backends {

// Canned answers that take precedence over the simulator's generative rules.
struct SimulatorFixtures {
  std::map<std::string, double> prompt_scores;          // judged prompt -> score
  std::map<std::string, std::string> judge_responses;   // judged prompt -> raw reply
  std::map<std::string, std::vector<std::string>> generations;  // subject -> text by ordinal
  std::map<std::string, std::vector<float>> text_embeddings;    // exact text -> vector
  std::map<std::string, std::vector<float>> image_embeddings;   // source prompt -> vector
  std::set<std::string> refusal_markers;      // image prompts containing one are refused
  std::set<std::string> blank_image_markers;  // image prompts containing one yield zero bytes

  static SimulatorFixtures from_json(const nlohmann::json& j);
};

// Deterministic offline stand-in for the LLM, the image generator and the
// CLIP-style encoder. Every output is a pure function of (seed, concepts,
// fixtures, request).
//
// Text and images share one embedding space built from per-concept unit
// directions u(c). A text embeds as the sum of u(c) over the concepts it
// names plus a text-specific noise direction. A generated image paints each
// named concept as a rectangle in that concept's palette colour (with a small
// chance of an unrequested extra concept), and the image and patch encoders
// read those colours back off the pixels.
struct SimulatorState {
  std::uint64_t seed = 0;
  std::size_t embedding_dim = 64;
  std::vector<std::string> concepts;
  SimulatorFixtures fixtures;
  double judge_score_low = 0.80;
  double judge_score_high = 1.0;
  double cooccurrence_probability = 0.35;
  double extra_object_probability = 0.15;
  double text_noise = 0.5;
  double image_noise = 0.1;
  double patch_noise = 0.3;
  int color_tolerance = 8;
};

class SimulatorModel {
 public:
  explicit SimulatorModel(SimulatorState state);

  const SimulatorState& state() const { return state_; }

  std::string generate_text(const TextRequest& request) const;
  GeneratedImage generate_image(const ImageRequest& request, std::size_t max_prompt_chars) const;
  embedding::EmbeddingVector embed_text(std::string_view text) const;
  embedding::EmbeddingVector embed_image(std::span<const std::uint8_t> png) const;
  relabeler::PatchEmbeddingMatrix embed_patches(std::span<const std::uint8_t> png,
                                                const relabeler::PatchGridConfig& grid) const;

  // Indices into concepts() named in the text, in vocabulary order.
  std::vector<std::size_t> mentioned_concepts(std::string_view text) const;
  std::array<std::uint8_t, 3> concept_color(std::size_t concept_index) const;
  std::vector<double> concept_direction(std::size_t concept_index) const;

 private:
  std::vector<double> noise_direction(std::uint64_t key) const;
  std::string generate_prompt(const TextRequest& request) const;
  std::string judge(const TextRequest& request) const;
  int classify_pixel(const std::uint8_t* rgb) const;

  SimulatorState state_;
  std::vector<std::vector<double>> directions_;
  std::vector<std::array<std::uint8_t, 3>> colors_;
};

class SimulatedTextGenerator final : public TextGenerator {
 public:
  SimulatedTextGenerator(std::shared_ptr<const SimulatorModel> model, ProviderDescriptor descriptor);
  std::string generate_text(const TextRequest& request) override;
  const ProviderDescriptor& descriptor() const override { return descriptor_; }

 private:
  std::shared_ptr<const SimulatorModel> model_;
  ProviderDescriptor descriptor_;
};

class SimulatedImageGenerator final : public ImageGenerator {
 public:
  SimulatedImageGenerator(std::shared_ptr<const SimulatorModel> model, ProviderDescriptor descriptor);
  GeneratedImage generate_image(const ImageRequest& request) override;
  const ProviderDescriptor& descriptor() const override { return descriptor_; }

 private:
  std::shared_ptr<const SimulatorModel> model_;
  ProviderDescriptor descriptor_;
};

class SimulatedEmbedder final : public Embedder {
 public:
  SimulatedEmbedder(std::shared_ptr<const SimulatorModel> model, ProviderDescriptor descriptor);
  embedding::EmbeddingVector embed_text(std::string_view text) override;
  embedding::EmbeddingVector embed_image(std::span<const std::uint8_t> png) override;
  relabeler::PatchEmbeddingMatrix embed_patches(std::span<const std::uint8_t> png,
                                                const relabeler::PatchGridConfig& grid) override;
  const ProviderDescriptor& descriptor() const override { return descriptor_; }

 private:
  std::shared_ptr<const SimulatorModel> model_;
  ProviderDescriptor descriptor_;
};

// All three simulated roles over one shared model. Descriptors default to
// simulated endpoints carrying `state.seed`.
ProviderSet make_simulated_providers(SimulatorState state);
ProviderSet make_simulated_providers(SimulatorState state, ProviderDescriptor text,
                                     ProviderDescriptor image, ProviderDescriptor embedder);

}  // namespace synthforge::backends
