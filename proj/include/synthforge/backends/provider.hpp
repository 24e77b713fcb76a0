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
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "synthforge/backends/descriptor.hpp"
#include "synthforge/embedding/vector.hpp"
#include "synthforge/relabeler/patch_grid.hpp"

namespace synthforge::backends {

enum class TextPurpose { generate, judge };

const char* to_string(TextPurpose purpose);

// A text-generation call. `text` is the fully instantiated instruction sent to
// the model; the remaining fields are structured context that remote adapters
// forward as metadata and the simulator uses directly.
struct TextRequest {
  TextPurpose purpose = TextPurpose::generate;
  std::string text;
  std::string subject;    // class name the request is about
  std::string candidate;  // prompt under judgement (judge requests)
  std::uint64_t ordinal = 0;  // distinguishes otherwise-identical requests

  nlohmann::json to_json() const;
};

struct ImageRequest {
  std::string prompt;
  std::int64_t seed = 0;
  int side = 96;

  nlohmann::json to_json() const;
};

struct GeneratedImage {
  std::vector<std::uint8_t> png;
  std::int64_t seed = 0;
};

class TextGenerator {
 public:
  virtual ~TextGenerator() = default;
  // May return an empty string; callers decide whether that is fatal.
  virtual std::string generate_text(const TextRequest& request) = 0;
  virtual const ProviderDescriptor& descriptor() const = 0;
};

class ImageGenerator {
 public:
  virtual ~ImageGenerator() = default;
  // Throws RefusalError on content refusals and InvalidRequestError on
  // oversized prompts. An empty `png` signals a blank generation.
  virtual GeneratedImage generate_image(const ImageRequest& request) = 0;
  virtual const ProviderDescriptor& descriptor() const = 0;
};

// Frozen joint text/image encoder. Returned vectors are NOT normalized.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual embedding::EmbeddingVector embed_text(std::string_view text) = 0;
  virtual embedding::EmbeddingVector embed_image(std::span<const std::uint8_t> png) = 0;
  // Resizes to grid.input_side, cuts row-major patches, embeds each one.
  virtual relabeler::PatchEmbeddingMatrix embed_patches(std::span<const std::uint8_t> png,
                                                        const relabeler::PatchGridConfig& grid) = 0;
  virtual const ProviderDescriptor& descriptor() const = 0;
  std::size_t dimension() const { return descriptor().embedding_dim; }
};

struct ProviderSet {
  std::shared_ptr<TextGenerator> text;
  std::shared_ptr<ImageGenerator> image;
  std::shared_ptr<Embedder> embedder;
};

// Contract-checking front doors used by the agents. They verify the provider
// kind, reject empty input, and check embedding dimensions against the
// descriptor. generate_image raises ProviderError for an empty or undecodable
// payload.
std::string generate_text(TextGenerator& provider, const TextRequest& request);
GeneratedImage generate_image(ImageGenerator& provider, const ImageRequest& request);
embedding::EmbeddingVector embed_text(Embedder& provider, std::string_view text);
embedding::EmbeddingVector embed_image(Embedder& provider, std::span<const std::uint8_t> png);
relabeler::PatchEmbeddingMatrix embed_patches(Embedder& provider, std::span<const std::uint8_t> png,
                                              const relabeler::PatchGridConfig& grid);

}  // namespace synthforge::backends
