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

#include "synthforge/backends/remote.hpp"

#include <openssl/evp.h>

#include <cstdlib>
#include <thread>

#include "synthforge/core/errors.hpp"

namespace synthforge::backends {

using nlohmann::json;

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw ProviderError("malformed base64 payload");
  std::vector<std::uint8_t> out(3 * text.size() / 4);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw ProviderError("malformed base64 payload");
  std::size_t padding = 0;
  if (!text.empty() && text.back() == '=') ++padding;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++padding;
  out.resize(static_cast<std::size_t>(n) - padding);
  return out;
}

void WireAdapter::raise_for_status(const HttpResponse& response) const {
  const int s = response.status;
  const std::string detail = "HTTP " + std::to_string(s) + ": " + response.body.substr(0, 300);
  if (s == 408 || s == 409 || s == 429 || s >= 500) throw TransientProviderError(detail, s);
  if (response.body.find("content_policy") != std::string::npos ||
      response.body.find("\"refusal\"") != std::string::npos) {
    throw RefusalError(detail);
  }
  throw ProviderError(detail);
}

namespace {

std::string join_url(const std::string& endpoint, const std::string& path) {
  if (!endpoint.empty() && endpoint.back() == '/') return endpoint + path;
  return endpoint + "/" + path;
}

relabeler::PatchEmbeddingMatrix matrix_from_json(const json& rows) {
  if (!rows.is_array() || rows.empty()) throw ProviderError("patch embedding reply has no rows");
  const auto s = static_cast<Eigen::Index>(rows.size());
  const auto e = static_cast<Eigen::Index>(rows.at(0).size());
  relabeler::PatchEmbeddingMatrix f(s, e);
  for (Eigen::Index i = 0; i < s; ++i) {
    const auto& row = rows.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != e) throw ProviderError("ragged patch embedding reply");
    for (Eigen::Index j = 0; j < e; ++j) f(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
  }
  return f;
}

class InternalAdapter final : public WireAdapter {
 public:
  WireCall text(const ProviderDescriptor& d, const TextRequest& r, const std::string& id) const override {
    return envelope(d, "generate_text", r.to_json(), id);
  }
  std::string parse_text(const json& response) const override {
    return response.at("payload").at("text").get<std::string>();
  }
  WireCall image(const ProviderDescriptor& d, const ImageRequest& r, const std::string& id) const override {
    return envelope(d, "generate_image", r.to_json(), id);
  }
  GeneratedImage parse_image(const json& response, std::int64_t seed) const override {
    const auto& payload = response.at("payload");
    if (payload.value("refused", false)) {
      throw RefusalError("provider refused: " + payload.value("reason", std::string("unspecified")));
    }
    return {base64_decode(payload.at("png_base64").get<std::string>()), payload.value("seed", seed)};
  }
  WireCall embed_text(const ProviderDescriptor& d, std::string_view text, const std::string& id) const override {
    return envelope(d, "embed_text", {{"text", text}}, id);
  }
  WireCall embed_image(const ProviderDescriptor& d, std::span<const std::uint8_t> png,
                       const std::string& id) const override {
    return envelope(d, "embed_image", {{"png_base64", base64_encode(png)}}, id);
  }
  WireCall embed_patches(const ProviderDescriptor& d, std::span<const std::uint8_t> png,
                         const relabeler::PatchGridConfig& grid, const std::string& id) const override {
    return envelope(d, "embed_patches",
                    {{"png_base64", base64_encode(png)},
                     {"input_side", grid.input_side},
                     {"patch_side", grid.patch_side}},
                    id);
  }
  std::vector<float> parse_embedding(const json& response) const override {
    return response.at("payload").at("embedding").get<std::vector<float>>();
  }
  relabeler::PatchEmbeddingMatrix parse_patches(const json& response) const override {
    return matrix_from_json(response.at("payload").at("patches"));
  }

 private:
  static WireCall envelope(const ProviderDescriptor& d, const std::string& op, json payload, const std::string& id) {
    return {join_url(d.endpoint, "v1/" + op),
            json{{"request_id", id}, {"model", d.model_name}, {"payload", std::move(payload)}}};
  }
};

class OpenAiAdapter final : public WireAdapter {
 public:
  WireCall text(const ProviderDescriptor& d, const TextRequest& r, const std::string&) const override {
    return {join_url(d.endpoint, "chat/completions"),
            json{{"model", d.model_name},
                 {"messages", json::array({json{{"role", "user"}, {"content", r.text}}})},
                 {"seed", r.ordinal}}};
  }
  std::string parse_text(const json& response) const override {
    return response.at("choices").at(0).at("message").at("content").get<std::string>();
  }
  WireCall image(const ProviderDescriptor& d, const ImageRequest& r, const std::string&) const override {
    const std::string size = std::to_string(r.side) + "x" + std::to_string(r.side);
    return {join_url(d.endpoint, "images/generations"),
            json{{"model", d.model_name}, {"prompt", r.prompt}, {"n", 1}, {"size", size}}};
  }
  GeneratedImage parse_image(const json& response, std::int64_t seed) const override {
    return {base64_decode(response.at("data").at(0).at("b64_json").get<std::string>()), seed};
  }
  WireCall embed_text(const ProviderDescriptor& d, std::string_view text, const std::string&) const override {
    return {join_url(d.endpoint, "embeddings"), json{{"model", d.model_name}, {"input", text}}};
  }
  WireCall embed_image(const ProviderDescriptor&, std::span<const std::uint8_t>, const std::string&) const override {
    throw ProviderError("the openai adapter does not offer image embeddings");
  }
  WireCall embed_patches(const ProviderDescriptor&, std::span<const std::uint8_t>, const relabeler::PatchGridConfig&,
                         const std::string&) const override {
    throw ProviderError("the openai adapter does not offer patch embeddings");
  }
  std::vector<float> parse_embedding(const json& response) const override {
    return response.at("data").at(0).at("embedding").get<std::vector<float>>();
  }
  relabeler::PatchEmbeddingMatrix parse_patches(const json&) const override {
    throw ProviderError("the openai adapter does not offer patch embeddings");
  }
};

}  // namespace

std::unique_ptr<WireAdapter> make_internal_adapter() { return std::make_unique<InternalAdapter>(); }
std::unique_ptr<WireAdapter> make_openai_adapter() { return std::make_unique<OpenAiAdapter>(); }

std::unique_ptr<WireAdapter> make_adapter(const std::string& name) {
  if (name == "internal") return make_internal_adapter();
  if (name == "openai") return make_openai_adapter();
  throw ConfigError("unknown wire adapter '" + name + "'");
}

RemoteClient::RemoteClient(ProviderDescriptor descriptor, std::shared_ptr<HttpTransport> transport,
                           std::unique_ptr<WireAdapter> adapter, Sleeper sleeper)
    : descriptor_(std::move(descriptor)),
      transport_(std::move(transport)),
      adapter_(std::move(adapter)),
      sleeper_(std::move(sleeper)),
      slots_(std::min(std::max(descriptor_.max_concurrency, 1), 1024)) {}

std::string RemoteClient::next_request_id() {
  std::lock_guard lock(mutex_);
  return descriptor_.identity() + "-" + std::to_string(++counter_);
}

void RemoteClient::wait_for_rate_limit() {
  if (descriptor_.requests_per_minute <= 0) return;
  const auto interval = std::chrono::milliseconds(60'000 / descriptor_.requests_per_minute);
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mutex_);
    const auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_slot_);
    next_slot_ = slot + interval;
  }
  std::this_thread::sleep_until(slot);
}

json RemoteClient::call(const std::string& what, const WireCall& wire) {
  std::map<std::string, std::string> headers{{"Content-Type", "application/json"}};
  if (!descriptor_.credentials_env.empty()) {
    const char* key = std::getenv(descriptor_.credentials_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw ConfigError("environment variable " + descriptor_.credentials_env + " is not set");
    }
    headers["Authorization"] = std::string("Bearer ") + key;
  }
  const std::string body = wire.body.dump();
  return call_with_retries(descriptor_.retry, sleeper_, what, [&] {
    wait_for_rate_limit();
    slots_.acquire();
    HttpResponse response;
    try {
      response = transport_->post(wire.url, body, headers, descriptor_.timeout);
    } catch (...) {
      slots_.release();
      throw;
    }
    slots_.release();
    if (response.status < 200 || response.status >= 300) adapter_->raise_for_status(response);
    try {
      return json::parse(response.body);
    } catch (const json::exception& e) {
      throw ProviderError(what + ": reply is not JSON: " + e.what());
    }
  });
}

std::string RemoteTextGenerator::generate_text(const TextRequest& request) {
  const auto& adapter = client_->adapter();
  const json reply = client_->call("generate_text", adapter.text(descriptor(), request, client_->next_request_id()));
  try {
    return adapter.parse_text(reply);
  } catch (const json::exception& e) {
    throw ProviderError(std::string("generate_text: unexpected reply: ") + e.what());
  }
}

GeneratedImage RemoteImageGenerator::generate_image(const ImageRequest& request) {
  const auto& adapter = client_->adapter();
  const json reply = client_->call("generate_image", adapter.image(descriptor(), request, client_->next_request_id()));
  try {
    return adapter.parse_image(reply, request.seed);
  } catch (const json::exception& e) {
    throw ProviderError(std::string("generate_image: unexpected reply: ") + e.what());
  }
}

embedding::EmbeddingVector RemoteEmbedder::embed_text(std::string_view text) {
  const auto& adapter = client_->adapter();
  const json reply = client_->call("embed_text", adapter.embed_text(descriptor(), text, client_->next_request_id()));
  try {
    return embedding::EmbeddingVector(adapter.parse_embedding(reply));
  } catch (const json::exception& e) {
    throw ProviderError(std::string("embed_text: unexpected reply: ") + e.what());
  }
}

embedding::EmbeddingVector RemoteEmbedder::embed_image(std::span<const std::uint8_t> png) {
  const auto& adapter = client_->adapter();
  const json reply = client_->call("embed_image", adapter.embed_image(descriptor(), png, client_->next_request_id()));
  try {
    return embedding::EmbeddingVector(adapter.parse_embedding(reply));
  } catch (const json::exception& e) {
    throw ProviderError(std::string("embed_image: unexpected reply: ") + e.what());
  }
}

relabeler::PatchEmbeddingMatrix RemoteEmbedder::embed_patches(std::span<const std::uint8_t> png,
                                                              const relabeler::PatchGridConfig& grid) {
  const auto& adapter = client_->adapter();
  const json reply =
      client_->call("embed_patches", adapter.embed_patches(descriptor(), png, grid, client_->next_request_id()));
  try {
    return adapter.parse_patches(reply);
  } catch (const json::exception& e) {
    throw ProviderError(std::string("embed_patches: unexpected reply: ") + e.what());
  }
}

}  // namespace synthforge::backends
