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

#include "synthforge/backends/cache.hpp"

#include <fstream>

#include <spdlog/spdlog.h>

#include "synthforge/core/io.hpp"
#include "synthforge/core/sha256.hpp"

namespace synthforge::backends {

using nlohmann::json;

ResponseCache::ResponseCache(std::filesystem::path root, std::string provider)
    : dir_(std::move(root) / std::move(provider)) {}

std::filesystem::path ResponseCache::entry_path(const std::string& request_key) const {
  return dir_ / (sha256_hex(request_key) + ".bin");
}

std::optional<json> ResponseCache::get(const std::string& request_key) const {
  const auto path = entry_path(request_key);
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  try {
    return json::from_cbor(read_file_bytes(path));
  } catch (const std::exception& e) {
    spdlog::warn("ignoring unreadable cache entry {}: {}", path.string(), e.what());
    return std::nullopt;
  }
}

void ResponseCache::put(const std::string& request_key, const json& value) const {
  const auto bytes = json::to_cbor(value);
  write_file_atomic(entry_path(request_key), std::span<const std::uint8_t>(bytes));
}

namespace {

std::string bytes_key(std::string_view op, std::span<const std::uint8_t> bytes) {
  return std::string(op) + ":" + sha256_hex(bytes);
}

}  // namespace

CachingTextGenerator::CachingTextGenerator(std::shared_ptr<TextGenerator> inner, const std::filesystem::path& root)
    : inner_(std::move(inner)), cache_(root, inner_->descriptor().identity()) {}

std::string CachingTextGenerator::generate_text(const TextRequest& request) {
  const std::string key = "generate_text:" + request.to_json().dump();
  if (auto hit = cache_.get(key)) return hit->at("text").get<std::string>();
  std::string text = inner_->generate_text(request);
  cache_.put(key, json{{"text", text}});
  return text;
}

CachingImageGenerator::CachingImageGenerator(std::shared_ptr<ImageGenerator> inner, const std::filesystem::path& root)
    : inner_(std::move(inner)), cache_(root, inner_->descriptor().identity()) {}

GeneratedImage CachingImageGenerator::generate_image(const ImageRequest& request) {
  const std::string key = "generate_image:" + request.to_json().dump();
  if (auto hit = cache_.get(key)) {
    return {hit->at("png").get_binary(), hit->at("seed").get<std::int64_t>()};
  }
  GeneratedImage image = inner_->generate_image(request);
  cache_.put(key, json{{"png", json::binary(image.png)}, {"seed", image.seed}});
  return image;
}

CachingEmbedder::CachingEmbedder(std::shared_ptr<Embedder> inner, const std::filesystem::path& root)
    : inner_(std::move(inner)), cache_(root, inner_->descriptor().identity()) {}

embedding::EmbeddingVector CachingEmbedder::embed_text(std::string_view text) {
  const std::string key = "embed_text:" + std::string(text);
  if (auto hit = cache_.get(key)) return embedding::EmbeddingVector(hit->get<std::vector<float>>());
  auto v = inner_->embed_text(text);
  cache_.put(key, json(std::vector<float>(v.values().begin(), v.values().end())));
  return v;
}

embedding::EmbeddingVector CachingEmbedder::embed_image(std::span<const std::uint8_t> png) {
  const std::string key = bytes_key("embed_image", png);
  if (auto hit = cache_.get(key)) return embedding::EmbeddingVector(hit->get<std::vector<float>>());
  auto v = inner_->embed_image(png);
  cache_.put(key, json(std::vector<float>(v.values().begin(), v.values().end())));
  return v;
}

relabeler::PatchEmbeddingMatrix CachingEmbedder::embed_patches(std::span<const std::uint8_t> png,
                                                               const relabeler::PatchGridConfig& grid) {
  const std::string key = bytes_key("embed_patches", png) + ":" + std::to_string(grid.input_side) + "/" +
                          std::to_string(grid.patch_side);
  if (auto hit = cache_.get(key)) {
    const auto rows = hit->at("rows").get<Eigen::Index>();
    const auto cols = hit->at("cols").get<Eigen::Index>();
    const auto values = hit->at("values").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(values.size()) == rows * cols) {
      relabeler::PatchEmbeddingMatrix f(rows, cols);
      for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) f(i, j) = values[static_cast<std::size_t>(i * cols + j)];
      return f;
    }
  }
  auto f = inner_->embed_patches(png, grid);
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(f.size()));
  for (Eigen::Index i = 0; i < f.rows(); ++i)
    for (Eigen::Index j = 0; j < f.cols(); ++j) values.push_back(f(i, j));
  cache_.put(key, json{{"rows", f.rows()}, {"cols", f.cols()}, {"values", values}});
  return f;
}

}  // namespace synthforge::backends
