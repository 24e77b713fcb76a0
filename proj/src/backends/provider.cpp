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

#include "synthforge/backends/provider.hpp"

#include "synthforge/backends/image.hpp"
#include "synthforge/core/errors.hpp"

namespace synthforge::backends {

namespace {

void require_kind(const ProviderDescriptor& d, ProviderKind kind) {
  if (d.kind != kind) {
    throw ConfigError(std::string("provider kind is ") + to_string(d.kind) + ", expected " + to_string(kind));
  }
}

void require_dimension(const ProviderDescriptor& d, std::size_t actual) {
  if (actual != d.embedding_dim) throw DimensionMismatchError(d.embedding_dim, actual);
}

}  // namespace

const char* to_string(TextPurpose purpose) {
  return purpose == TextPurpose::generate ? "generate" : "judge";
}

nlohmann::json TextRequest::to_json() const {
  return {{"purpose", backends::to_string(purpose)},
          {"text", text},
          {"subject", subject},
          {"candidate", candidate},
          {"ordinal", ordinal}};
}

nlohmann::json ImageRequest::to_json() const {
  return {{"prompt", prompt}, {"seed", seed}, {"side", side}};
}

std::string generate_text(TextGenerator& provider, const TextRequest& request) {
  require_kind(provider.descriptor(), ProviderKind::text_generation);
  if (request.text.empty()) throw InvalidRequestError("empty text-generation request");
  if (request.text.size() > provider.descriptor().max_prompt_chars) {
    throw InvalidRequestError("request exceeds " + std::to_string(provider.descriptor().max_prompt_chars) +
                              " characters");
  }
  return provider.generate_text(request);
}

GeneratedImage generate_image(ImageGenerator& provider, const ImageRequest& request) {
  require_kind(provider.descriptor(), ProviderKind::image_generation);
  if (request.prompt.empty()) throw InvalidRequestError("empty image prompt");
  if (request.prompt.size() > provider.descriptor().max_prompt_chars) {
    throw InvalidRequestError("image prompt exceeds " +
                              std::to_string(provider.descriptor().max_prompt_chars) + " characters");
  }
  GeneratedImage image = provider.generate_image(request);
  if (image.png.empty()) throw ProviderError("image provider returned zero bytes");
  try {
    decode_png(image.png);
  } catch (const InvalidRequestError& e) {
    throw ProviderError(std::string("image provider returned an undecodable payload: ") + e.what());
  }
  return image;
}

embedding::EmbeddingVector embed_text(Embedder& provider, std::string_view text) {
  require_kind(provider.descriptor(), ProviderKind::embedding);
  if (text.empty()) throw InvalidRequestError("cannot embed empty text");
  auto v = provider.embed_text(text);
  require_dimension(provider.descriptor(), v.dimension());
  return v;
}

embedding::EmbeddingVector embed_image(Embedder& provider, std::span<const std::uint8_t> png) {
  require_kind(provider.descriptor(), ProviderKind::embedding);
  if (png.empty()) throw InvalidRequestError("cannot embed an empty image");
  auto v = provider.embed_image(png);
  require_dimension(provider.descriptor(), v.dimension());
  return v;
}

relabeler::PatchEmbeddingMatrix embed_patches(Embedder& provider, std::span<const std::uint8_t> png,
                                              const relabeler::PatchGridConfig& grid) {
  require_kind(provider.descriptor(), ProviderKind::embedding);
  grid.validate();
  if (grid.embedding_dim != provider.descriptor().embedding_dim) {
    throw DimensionMismatchError(provider.descriptor().embedding_dim, grid.embedding_dim);
  }
  if (png.empty()) throw InvalidRequestError("cannot embed an empty image");
  auto f = provider.embed_patches(png, grid);
  relabeler::check_patch_matrix(f, grid);
  return f;
}

}  // namespace synthforge::backends
