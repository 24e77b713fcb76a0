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
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "synthforge/backends/provider.hpp"

namespace synthforge::backends {

// On-disk response store laid out as <root>/<provider>/<sha256 of request>.bin,
// each file a CBOR document. Writes go through a temporary file and a rename,
// so concurrent readers see either nothing or a complete entry.
class ResponseCache {
 public:
  ResponseCache(std::filesystem::path root, std::string provider);

  std::optional<nlohmann::json> get(const std::string& request_key) const;
  void put(const std::string& request_key, const nlohmann::json& value) const;
  std::filesystem::path entry_path(const std::string& request_key) const;

 private:
  std::filesystem::path dir_;
};

// Decorators that consult the cache before delegating to the wrapped provider.
// Errors are never cached.
class CachingTextGenerator final : public TextGenerator {
 public:
  CachingTextGenerator(std::shared_ptr<TextGenerator> inner, const std::filesystem::path& root);
  std::string generate_text(const TextRequest& request) override;
  const ProviderDescriptor& descriptor() const override { return inner_->descriptor(); }

 private:
  std::shared_ptr<TextGenerator> inner_;
  ResponseCache cache_;
};

class CachingImageGenerator final : public ImageGenerator {
 public:
  CachingImageGenerator(std::shared_ptr<ImageGenerator> inner, const std::filesystem::path& root);
  GeneratedImage generate_image(const ImageRequest& request) override;
  const ProviderDescriptor& descriptor() const override { return inner_->descriptor(); }

 private:
  std::shared_ptr<ImageGenerator> inner_;
  ResponseCache cache_;
};

class CachingEmbedder final : public Embedder {
 public:
  CachingEmbedder(std::shared_ptr<Embedder> inner, const std::filesystem::path& root);
  embedding::EmbeddingVector embed_text(std::string_view text) override;
  embedding::EmbeddingVector embed_image(std::span<const std::uint8_t> png) override;
  relabeler::PatchEmbeddingMatrix embed_patches(std::span<const std::uint8_t> png,
                                                const relabeler::PatchGridConfig& grid) override;
  const ProviderDescriptor& descriptor() const override { return inner_->descriptor(); }

 private:
  std::shared_ptr<Embedder> inner_;
  ResponseCache cache_;
};

}  // namespace synthforge::backends
