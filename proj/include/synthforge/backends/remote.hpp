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
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>

#include <nlohmann/json.hpp>

#include "synthforge/backends/provider.hpp"
#include "synthforge/backends/retry.hpp"

namespace synthforge::backends {

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Seam between the providers and the network; tests substitute a double.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  // Connection-level failures raise TransientProviderError.
  virtual HttpResponse post(const std::string& url, const std::string& body,
                            const std::map<std::string, std::string>& headers,
                            std::chrono::milliseconds timeout) = 0;
};

std::shared_ptr<HttpTransport> make_http_transport();

struct WireCall {
  std::string url;
  nlohmann::json body;
};

// Translates between provider calls and one vendor's JSON API.
class WireAdapter {
 public:
  virtual ~WireAdapter() = default;
  virtual WireCall text(const ProviderDescriptor& d, const TextRequest& r, const std::string& request_id) const = 0;
  virtual std::string parse_text(const nlohmann::json& response) const = 0;
  virtual WireCall image(const ProviderDescriptor& d, const ImageRequest& r, const std::string& request_id) const = 0;
  virtual GeneratedImage parse_image(const nlohmann::json& response, std::int64_t seed) const = 0;
  virtual WireCall embed_text(const ProviderDescriptor& d, std::string_view text, const std::string& request_id) const = 0;
  virtual WireCall embed_image(const ProviderDescriptor& d, std::span<const std::uint8_t> png,
                               const std::string& request_id) const = 0;
  virtual WireCall embed_patches(const ProviderDescriptor& d, std::span<const std::uint8_t> png,
                                 const relabeler::PatchGridConfig& grid, const std::string& request_id) const = 0;
  virtual std::vector<float> parse_embedding(const nlohmann::json& response) const = 0;
  virtual relabeler::PatchEmbeddingMatrix parse_patches(const nlohmann::json& response) const = 0;
  // Maps a non-2xx reply to the matching ProviderError subclass and throws it.
  [[noreturn]] virtual void raise_for_status(const HttpResponse& response) const;
};

// POST <endpoint>/v1/<operation> with {"request_id", "model", "payload"};
// replies carry {"request_id", "payload", "usage"}.
std::unique_ptr<WireAdapter> make_internal_adapter();
// OpenAI-compatible chat/completions, images/generations and embeddings.
// Image and patch embeddings are not offered by that API.
std::unique_ptr<WireAdapter> make_openai_adapter();
std::unique_ptr<WireAdapter> make_adapter(const std::string& name);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

// Shared machinery for one remote endpoint: credentials, request ids, rate
// limiting, the concurrency cap and the retry loop.
class RemoteClient {
 public:
  RemoteClient(ProviderDescriptor descriptor, std::shared_ptr<HttpTransport> transport,
               std::unique_ptr<WireAdapter> adapter, Sleeper sleeper = real_sleeper());

  const ProviderDescriptor& descriptor() const { return descriptor_; }
  const WireAdapter& adapter() const { return *adapter_; }
  std::string next_request_id();
  nlohmann::json call(const std::string& what, const WireCall& call);

 private:
  void wait_for_rate_limit();

  ProviderDescriptor descriptor_;
  std::shared_ptr<HttpTransport> transport_;
  std::unique_ptr<WireAdapter> adapter_;
  Sleeper sleeper_;
  std::counting_semaphore<1024> slots_;
  std::mutex mutex_;
  std::chrono::steady_clock::time_point next_slot_{};
  std::uint64_t counter_ = 0;
};

class RemoteTextGenerator final : public TextGenerator {
 public:
  explicit RemoteTextGenerator(std::shared_ptr<RemoteClient> client) : client_(std::move(client)) {}
  std::string generate_text(const TextRequest& request) override;
  const ProviderDescriptor& descriptor() const override { return client_->descriptor(); }

 private:
  std::shared_ptr<RemoteClient> client_;
};

class RemoteImageGenerator final : public ImageGenerator {
 public:
  explicit RemoteImageGenerator(std::shared_ptr<RemoteClient> client) : client_(std::move(client)) {}
  GeneratedImage generate_image(const ImageRequest& request) override;
  const ProviderDescriptor& descriptor() const override { return client_->descriptor(); }

 private:
  std::shared_ptr<RemoteClient> client_;
};

class RemoteEmbedder final : public Embedder {
 public:
  explicit RemoteEmbedder(std::shared_ptr<RemoteClient> client) : client_(std::move(client)) {}
  embedding::EmbeddingVector embed_text(std::string_view text) override;
  embedding::EmbeddingVector embed_image(std::span<const std::uint8_t> png) override;
  relabeler::PatchEmbeddingMatrix embed_patches(std::span<const std::uint8_t> png,
                                                const relabeler::PatchGridConfig& grid) override;
  const ProviderDescriptor& descriptor() const override { return client_->descriptor(); }

 private:
  std::shared_ptr<RemoteClient> client_;
};

}  // namespace synthforge::backends
