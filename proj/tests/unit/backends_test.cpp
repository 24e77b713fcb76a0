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

#include "doctest.h"

#include <cstdlib>
#include <deque>
#include <mutex>
#include <set>

#include "support/test_support.hpp"
#include "synthforge/backends/cache.hpp"
#include "synthforge/backends/image.hpp"
#include "synthforge/backends/remote.hpp"
#include "synthforge/backends/simulator.hpp"
#include "synthforge/core/errors.hpp"
#include "synthforge/embedding/vector.hpp"

using namespace synthforge;
using namespace synthforge::backends;
using synthforge::testing::TempDir;

namespace {

SimulatorState state(std::uint64_t seed = 7) {
  SimulatorState s;
  s.seed = seed;
  s.embedding_dim = 32;
  s.concepts = {"dog", "cat", "sofa", "horse", "person"};
  return s;
}

// Replays canned replies in order and records every request.
class ScriptedTransport final : public HttpTransport {
 public:
  explicit ScriptedTransport(std::deque<HttpResponse> replies) : replies_(std::move(replies)) {}
  HttpResponse post(const std::string& url, const std::string& body, const std::map<std::string, std::string>& headers,
                    std::chrono::milliseconds) override {
    std::lock_guard lock(mutex_);
    urls.push_back(url);
    bodies.push_back(nlohmann::json::parse(body));
    last_headers = headers;
    if (replies_.empty()) throw std::logic_error("no scripted reply left");
    auto r = replies_.front();
    if (replies_.size() > 1 || !repeat_last) replies_.pop_front();
    return r;
  }
  bool repeat_last = false;
  std::vector<std::string> urls;
  std::vector<nlohmann::json> bodies;
  std::map<std::string, std::string> last_headers;

 private:
  std::deque<HttpResponse> replies_;
  std::mutex mutex_;
};

ProviderDescriptor remote_descriptor(ProviderKind kind, const std::string& adapter = "internal") {
  ProviderDescriptor d;
  d.kind = kind;
  d.endpoint = "https://models.example.test";
  d.model_name = "m1";
  d.adapter = adapter;
  d.credentials_env = "SYNTHFORGE_TEST_TOKEN";
  d.retry.max_attempts = 3;
  d.retry.initial_backoff = std::chrono::milliseconds(100);
  if (kind == ProviderKind::embedding) d.embedding_dim = 3;
  return d;
}

std::string text_reply(const std::string& text) {
  return nlohmann::json{{"request_id", "r"}, {"payload", {{"text", text}}}, {"usage", nlohmann::json::object()}}.dump();
}

}  // namespace

TEST_CASE("simulator text generation is deterministic") {
  const auto a = make_simulated_providers(state(7));
  const auto b = make_simulated_providers(state(7));
  TextRequest r{TextPurpose::generate, "Describe a photo of a cat.", "cat", "", 3};
  const auto first = generate_text(*a.text, r);
  CHECK_FALSE(first.empty());
  CHECK(generate_text(*a.text, r) == first);
  CHECK(generate_text(*b.text, r) == first);
  r.ordinal = 4;
  CHECK(generate_text(*a.text, r) != first);
  r.text.clear();
  CHECK_THROWS_AS(generate_text(*a.text, r), InvalidRequestError);
}

TEST_CASE("simulator images are valid PNGs that depend on prompt and seed") {
  const auto p = make_simulated_providers(state());
  const ImageRequest r{"a dog sleeping on a sofa", 11, 96};
  const auto img = generate_image(*p.image, r);
  const auto decoded = decode_png(img.png);
  CHECK(decoded.image.width == 96);
  CHECK(decoded.image.height == 96);
  CHECK(decoded.text.at("prompt") == r.prompt);
  CHECK(decoded.text.at("seed") == "11");
  CHECK(generate_image(*p.image, r).png == img.png);
  CHECK(generate_image(*p.image, {r.prompt, 12, 96}).png != img.png);
  CHECK(generate_image(*p.image, {"a cat on a sofa", 11, 96}).png != img.png);
}

TEST_CASE("image request failures are typed") {
  auto s = state();
  s.fixtures.refusal_markers = {"forbidden"};
  s.fixtures.blank_image_markers = {"blank"};
  const auto p = make_simulated_providers(s);
  CHECK_THROWS_AS(generate_image(*p.image, {std::string(5000, 'x'), 1, 96}), InvalidRequestError);
  CHECK_THROWS_AS(generate_image(*p.image, {"a forbidden dog", 1, 96}), RefusalError);
  CHECK_THROWS_AS(generate_image(*p.image, {"a blank dog", 1, 96}), ProviderError);
  CHECK(p.image->generate_image({"a blank dog", 1, 96}).png.empty());
}

TEST_CASE("text embeddings") {
  auto s = state();
  s.fixtures.text_embeddings["dog"] = std::vector<float>(32, 0.0f);
  s.fixtures.text_embeddings["dog"][5] = 2.0f;
  const auto p = make_simulated_providers(s);
  const auto v = embed_text(*p.embedder, "a cat on a sofa");
  CHECK(v.dimension() == 32);
  CHECK(embed_text(*p.embedder, "a cat on a sofa") == v);
  CHECK(embed_text(*p.embedder, "dog") == embedding::EmbeddingVector(s.fixtures.text_embeddings["dog"]));
  CHECK_THROWS_AS(embed_text(*p.embedder, ""), InvalidRequestError);
  // Mentioned concepts pull the embedding toward their direction.
  const auto cat = embedding::normalize(embed_text(*p.embedder, "cat"));
  const auto cat_photo = embedding::normalize(embed_text(*p.embedder, "a photo of a cat in a garden"));
  const auto horse_photo = embedding::normalize(embed_text(*p.embedder, "a photo of a horse in a garden"));
  CHECK(embedding::cosine(cat, cat_photo) > embedding::cosine(cat, horse_photo));
}

TEST_CASE("image and patch embeddings") {
  const auto p = make_simulated_providers(state());
  const auto img = generate_image(*p.image, {"a dog", 1, 96});
  const auto v = embed_image(*p.embedder, img.png);
  CHECK(v.dimension() == 32);
  CHECK(embed_image(*p.embedder, img.png) == v);

  const relabeler::PatchGridConfig grid{384, 96, 32};
  const auto f = embed_patches(*p.embedder, img.png, grid);
  CHECK(f.rows() == 16);
  CHECK(f.cols() == 32);
  CHECK(embed_patches(*p.embedder, img.png, grid) == f);
  CHECK_THROWS_AS(embed_patches(*p.embedder, img.png, {384, 96, 16}), DimensionMismatchError);
  CHECK_THROWS_AS(embed_patches(*p.embedder, img.png, {384, 100, 32}), ConfigError);
  const std::vector<std::uint8_t> junk{1, 2, 3};
  CHECK_THROWS_AS(embed_image(*p.embedder, junk), InvalidRequestError);
}

TEST_CASE("one thousand distinct images give distinct embeddings") {
  const auto p = make_simulated_providers(state());
  std::set<std::vector<float>> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto img = generate_image(*p.image, {"a dog number " + std::to_string(i), i, 32});
    const auto v = embed_image(*p.embedder, img.png);
    seen.insert(std::vector<float>(v.values().begin(), v.values().end()));
  }
  CHECK(seen.size() == 1000);
}

TEST_CASE("embedder dimension must match the descriptor") {
  auto d = ProviderDescriptor{};
  d.kind = ProviderKind::embedding;
  d.seed = 1;
  d.embedding_dim = 16;
  auto model = std::make_shared<const SimulatorModel>(state());
  CHECK_THROWS_AS(SimulatedEmbedder(model, d), DimensionMismatchError);
}

TEST_CASE("png round trip and resize") {
  RgbImage img(4, 2);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<std::uint8_t>(i * 7);
  const auto png = encode_png(img, {{"k", "v"}});
  const auto back = decode_png(png);
  CHECK(back.image.pixels == img.pixels);
  CHECK(back.text.at("k") == "v");
  RgbImage flat(3, 3);
  std::fill(flat.pixels.begin(), flat.pixels.end(), 77);
  const auto big = resize_bilinear(flat, 9, 9);
  CHECK(big.width == 9);
  for (const auto px : big.pixels) CHECK(px == 77);
}

TEST_CASE("retry backoff is monotone and capped") {
  RetryPolicy p;
  p.max_attempts = 12;
  p.initial_backoff = std::chrono::milliseconds(100);
  p.multiplier = 3.0;
  p.max_backoff = std::chrono::milliseconds(5000);
  auto prev = std::chrono::milliseconds(0);
  for (int k = 1; k < 12; ++k) {
    const auto b = p.backoff(k);
    CHECK(b >= prev);
    CHECK(b <= p.max_backoff);
    prev = b;
  }
  CHECK(p.backoff(1) == std::chrono::milliseconds(100));
  p.max_attempts = 0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("call_with_retries never exceeds max attempts") {
  RetryPolicy p;
  p.max_attempts = 4;
  int calls = 0;
  std::vector<std::chrono::milliseconds> sleeps;
  CHECK_THROWS_AS(call_with_retries(p, [&](auto d) { sleeps.push_back(d); }, "x",
                                    [&]() -> int {
                                      ++calls;
                                      throw TransientProviderError("busy", 503);
                                    }),
                  ProviderExhaustedError);
  CHECK(calls == 4);
  CHECK(sleeps.size() == 3);
  calls = 0;
  CHECK_THROWS_AS(call_with_retries(p, [](auto) {}, "x",
                                    [&]() -> int {
                                      ++calls;
                                      throw RefusalError("no");
                                    }),
                  RefusalError);
  CHECK(calls == 1);
}

TEST_CASE("remote 429 then 200 succeeds after one backoff") {
  ::setenv("SYNTHFORGE_TEST_TOKEN", "token-value", 1);
  auto transport = std::make_shared<ScriptedTransport>(
      std::deque<HttpResponse>{{429, R"({"error":"slow down"})"}, {200, text_reply("a cat on a windowsill")}});
  std::vector<std::chrono::milliseconds> sleeps;
  auto client = std::make_shared<RemoteClient>(remote_descriptor(ProviderKind::text_generation), transport,
                                               make_internal_adapter(), [&](auto d) { sleeps.push_back(d); });
  RemoteTextGenerator gen(client);
  CHECK(generate_text(gen, {TextPurpose::generate, "Describe a cat", "cat", "", 0}) == "a cat on a windowsill");
  CHECK(sleeps.size() == 1);
  CHECK(transport->urls.size() == 2);
  CHECK(transport->urls[0] == "https://models.example.test/v1/generate_text");
  CHECK(transport->bodies[0].at("model") == "m1");
  CHECK(transport->last_headers.at("Authorization") == "Bearer token-value");
}

TEST_CASE("remote permanent 500 exhausts retries") {
  ::setenv("SYNTHFORGE_TEST_TOKEN", "token-value", 1);
  auto transport = std::make_shared<ScriptedTransport>(std::deque<HttpResponse>{{500, "oops"}});
  transport->repeat_last = true;
  int sleeps = 0;
  auto client = std::make_shared<RemoteClient>(remote_descriptor(ProviderKind::text_generation), transport,
                                               make_internal_adapter(), [&](auto) { ++sleeps; });
  RemoteTextGenerator gen(client);
  CHECK_THROWS_AS(gen.generate_text({TextPurpose::generate, "x", "cat", "", 0}), ProviderExhaustedError);
  CHECK(transport->urls.size() == 3);
  CHECK(sleeps == 2);
}

TEST_CASE("remote refusals, bad requests and missing credentials") {
  ::setenv("SYNTHFORGE_TEST_TOKEN", "token-value", 1);
  {
    auto transport = std::make_shared<ScriptedTransport>(
        std::deque<HttpResponse>{{400, R"({"error":{"code":"content_policy_violation"}})"}});
    auto client = std::make_shared<RemoteClient>(remote_descriptor(ProviderKind::image_generation), transport,
                                                 make_internal_adapter(), [](auto) {});
    RemoteImageGenerator gen(client);
    CHECK_THROWS_AS(gen.generate_image({"a dog", 1, 64}), RefusalError);
    CHECK(transport->urls.size() == 1);
  }
  {
    auto transport = std::make_shared<ScriptedTransport>(std::deque<HttpResponse>{{400, "bad"}});
    auto client = std::make_shared<RemoteClient>(remote_descriptor(ProviderKind::text_generation), transport,
                                                 make_internal_adapter(), [](auto) {});
    RemoteTextGenerator gen(client);
    CHECK_THROWS_AS(gen.generate_text({TextPurpose::generate, "x", "cat", "", 0}), ProviderError);
    CHECK(transport->urls.size() == 1);
  }
  {
    auto d = remote_descriptor(ProviderKind::text_generation);
    d.credentials_env = "SYNTHFORGE_TEST_TOKEN_UNSET";
    ::unsetenv("SYNTHFORGE_TEST_TOKEN_UNSET");
    auto transport = std::make_shared<ScriptedTransport>(std::deque<HttpResponse>{{200, text_reply("x")}});
    auto client = std::make_shared<RemoteClient>(d, transport, make_internal_adapter(), [](auto) {});
    RemoteTextGenerator gen(client);
    CHECK_THROWS_AS(gen.generate_text({TextPurpose::generate, "x", "cat", "", 0}), ConfigError);
  }
}

TEST_CASE("remote image and embedding replies") {
  ::setenv("SYNTHFORGE_TEST_TOKEN", "token-value", 1);
  const auto png = encode_png(RgbImage(2, 2));
  auto transport = std::make_shared<ScriptedTransport>(std::deque<HttpResponse>{
      {200, nlohmann::json{{"payload", {{"png_base64", base64_encode(png)}, {"seed", 5}}}}.dump()},
      {200, nlohmann::json{{"payload", {{"embedding", {1.0, 2.0, 2.0}}}}}.dump()},
      {200, nlohmann::json{{"payload", {{"embedding", {1.0, 2.0}}}}}.dump()}});
  auto image_client = std::make_shared<RemoteClient>(remote_descriptor(ProviderKind::image_generation), transport,
                                                     make_internal_adapter(), [](auto) {});
  RemoteImageGenerator gen(image_client);
  const auto img = generate_image(gen, {"a dog", 5, 2});
  CHECK(img.png == png);
  CHECK(img.seed == 5);

  auto embed_client = std::make_shared<RemoteClient>(remote_descriptor(ProviderKind::embedding), transport,
                                                     make_internal_adapter(), [](auto) {});
  RemoteEmbedder embedder(embed_client);
  CHECK(embed_text(embedder, "dog").norm() == doctest::Approx(3.0));
  CHECK_THROWS_AS(embed_text(embedder, "dog"), DimensionMismatchError);
}

TEST_CASE("openai adapter wire format") {
  const auto adapter = make_openai_adapter();
  const auto d = remote_descriptor(ProviderKind::text_generation, "openai");
  const auto call = adapter->text(d, {TextPurpose::generate, "hello", "cat", "", 0}, "id-1");
  CHECK(call.url == "https://models.example.test/chat/completions");
  CHECK(call.body.at("model") == "m1");
  CHECK(adapter->parse_text(nlohmann::json::parse(R"({"choices":[{"message":{"content":"hi"}}]})")) == "hi");
  CHECK(adapter->parse_embedding(nlohmann::json::parse(R"({"data":[{"embedding":[0.5,0.25]}]})")) ==
        std::vector<float>{0.5f, 0.25f});
  CHECK_THROWS(adapter->embed_image(d, std::vector<std::uint8_t>{1}, "id-2"));
}

TEST_CASE("base64 round trip") {
  CHECK(base64_encode(std::vector<std::uint8_t>{'f', 'o', 'o', 'b'}) == "Zm9vYg==");
  for (std::size_t n = 0; n < 20; ++n) {
    std::vector<std::uint8_t> bytes(n);
    for (std::size_t i = 0; i < n; ++i) bytes[i] = static_cast<std::uint8_t>(i * 37 + 1);
    CHECK(base64_decode(base64_encode(bytes)) == bytes);
  }
}

TEST_CASE("response cache serves repeated requests") {
  ::setenv("SYNTHFORGE_TEST_TOKEN", "token-value", 1);
  TempDir dir;
  auto transport = std::make_shared<ScriptedTransport>(std::deque<HttpResponse>{{200, text_reply("cached text")}});
  auto client = std::make_shared<RemoteClient>(remote_descriptor(ProviderKind::text_generation), transport,
                                               make_internal_adapter(), [](auto) {});
  CachingTextGenerator cached(std::make_shared<RemoteTextGenerator>(client), dir.path());
  const TextRequest r{TextPurpose::generate, "Describe a cat", "cat", "", 0};
  CHECK(cached.generate_text(r) == "cached text");
  CHECK(cached.generate_text(r) == "cached text");
  CHECK(transport->urls.size() == 1);

  ResponseCache cache(dir.path(), "p");
  CHECK_FALSE(cache.get("k").has_value());
  cache.put("k", {{"a", 1}});
  CHECK(cache.get("k")->at("a") == 1);
  CHECK(std::filesystem::exists(cache.entry_path("k")));
}

TEST_CASE("descriptor validation") {
  ProviderDescriptor d;
  d.kind = ProviderKind::text_generation;
  CHECK_THROWS_AS(d.validate(), ConfigError);
  d.seed = 3;
  CHECK_NOTHROW(d.validate());
  d.endpoint = "https://x";
  CHECK_THROWS_AS(d.validate(), ConfigError);
  d.credentials_env = "X_KEY";
  CHECK_NOTHROW(d.validate());
  d.kind = ProviderKind::embedding;
  CHECK_THROWS_AS(d.validate(), ConfigError);
  const auto back = descriptor_from_json(nlohmann::json(remote_descriptor(ProviderKind::embedding)),
                                         ProviderKind::embedding);
  CHECK(back.credentials_env == "SYNTHFORGE_TEST_TOKEN");
  CHECK(back.embedding_dim == 3);
}
