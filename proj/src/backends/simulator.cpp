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

#include "synthforge/backends/simulator.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

#include "synthforge/backends/image.hpp"
#include "synthforge/core/errors.hpp"
#include "synthforge/core/hash.hpp"

namespace synthforge::backends {

namespace {

using embedding::EmbeddingVector;

constexpr const char* kAdjectives[] = {"fluffy", "small", "large",  "young",   "old",    "muddy",
                                       "sleek",  "colorful", "weathered", "curious", "sleepy", "shiny"};
constexpr const char* kPoses[] = {"resting",         "standing still",        "in mid-motion",
                                  "seen from the side", "turned toward the camera", "partially hidden",
                                  "in close-up",     "seen from above"};
constexpr const char* kScenes[] = {"in a sunlit meadow",      "on a rainy city street",  "inside a cozy living room",
                                   "beside a quiet lake",     "in a snowy forest",       "on a busy market square",
                                   "in a dim garage",         "at a sandy beach",        "in a suburban backyard",
                                   "on a mountain trail",     "in a modern kitchen",     "near an old stone bridge"};
constexpr const char* kLighting[] = {"at golden hour",      "under overcast skies", "in soft morning light",
                                     "lit by neon signs",   "in harsh midday sun",  "at dusk"};
constexpr const char* kStyles[] = {"photorealistic", "documentary photo", "wide-angle shot",
                                   "shallow depth of field"};

template <std::size_t N>
const char* pick(const char* const (&pool)[N], SplitMixStream& rng) {
  return pool[rng.next() % N];
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// Whole-word, case-insensitive occurrence of `needle`, allowing a plural suffix.
bool mentions(const std::string& haystack_lower, const std::string& needle_lower) {
  if (needle_lower.empty()) return false;
  std::size_t pos = 0;
  while ((pos = haystack_lower.find(needle_lower, pos)) != std::string::npos) {
    const bool left_ok = pos == 0 || !is_word_char(haystack_lower[pos - 1]);
    std::size_t end = pos + needle_lower.size();
    if (end < haystack_lower.size() && haystack_lower[end] == 's') ++end;
    else if (haystack_lower.compare(end, 2, "es") == 0) end += 2;
    const bool right_ok = end >= haystack_lower.size() || !is_word_char(haystack_lower[end]);
    if (left_ok && right_ok) return true;
    ++pos;
  }
  return false;
}

std::vector<double> unit_from_key(std::uint64_t key, std::size_t dim) {
  SplitMixStream rng(key);
  std::vector<double> v(dim);
  double norm = 0.0;
  for (auto& x : v) {
    x = rng.normal();
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (auto& x : v) x /= norm;
  return v;
}

std::array<std::uint8_t, 3> hsv_to_rgb(double hue_deg, double s, double v) {
  const double c = v * s;
  const double h = std::fmod(hue_deg, 360.0) / 60.0;
  const double x = c * (1 - std::abs(std::fmod(h, 2.0) - 1));
  double r = 0, g = 0, b = 0;
  if (h < 1) { r = c; g = x; }
  else if (h < 2) { r = x; g = c; }
  else if (h < 3) { g = c; b = x; }
  else if (h < 4) { g = x; b = c; }
  else if (h < 5) { r = x; b = c; }
  else { r = c; b = x; }
  const double m = v - c;
  auto to8 = [&](double u) { return static_cast<std::uint8_t>(std::lround((u + m) * 255.0)); };
  return {to8(r), to8(g), to8(b)};
}

std::string article_for(const std::string& word) {
  if (word.empty()) return "a";
  const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(word[0])));
  return (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') ? "An" : "A";
}

}  // namespace

SimulatorFixtures SimulatorFixtures::from_json(const nlohmann::json& j) {
  SimulatorFixtures f;
  f.prompt_scores = j.value("prompt_scores", f.prompt_scores);
  f.judge_responses = j.value("judge_responses", f.judge_responses);
  f.generations = j.value("generations", f.generations);
  f.text_embeddings = j.value("text_embeddings", f.text_embeddings);
  f.image_embeddings = j.value("image_embeddings", f.image_embeddings);
  f.refusal_markers = j.value("refusal_markers", f.refusal_markers);
  f.blank_image_markers = j.value("blank_image_markers", f.blank_image_markers);
  return f;
}

SimulatorModel::SimulatorModel(SimulatorState state) : state_(std::move(state)) {
  if (state_.embedding_dim == 0) throw ConfigError("simulator embedding_dim must be positive");
  const std::size_t n = state_.concepts.size();
  for (std::size_t i = 0; i < n; ++i) {
    directions_.push_back(unit_from_key(
        hash_combine(hash_combine(state_.seed, fnv1a64("concept")), fnv1a64(lower(state_.concepts[i]))),
        state_.embedding_dim));
    const double hue = 360.0 * static_cast<double>(i) / static_cast<double>(n);
    const double value = (n > 12 && i % 2 == 1) ? 0.7 : 1.0;
    colors_.push_back(hsv_to_rgb(hue, 1.0, value));
  }
}

std::vector<std::size_t> SimulatorModel::mentioned_concepts(std::string_view text) const {
  const std::string hay = lower(text);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < state_.concepts.size(); ++i) {
    if (mentions(hay, lower(state_.concepts[i]))) out.push_back(i);
  }
  return out;
}

std::array<std::uint8_t, 3> SimulatorModel::concept_color(std::size_t i) const { return colors_.at(i); }

std::vector<double> SimulatorModel::concept_direction(std::size_t i) const { return directions_.at(i); }

std::vector<double> SimulatorModel::noise_direction(std::uint64_t key) const {
  return unit_from_key(hash_combine(state_.seed, key), state_.embedding_dim);
}

std::string SimulatorModel::generate_text(const TextRequest& request) const {
  return request.purpose == TextPurpose::judge ? judge(request) : generate_prompt(request);
}

std::string SimulatorModel::generate_prompt(const TextRequest& request) const {
  if (const auto it = state_.fixtures.generations.find(request.subject);
      it != state_.fixtures.generations.end() && request.ordinal < it->second.size()) {
    return it->second[request.ordinal];
  }
  SplitMixStream rng(hash_combine(
      hash_combine(hash_combine(state_.seed, fnv1a64("generate")), fnv1a64(request.subject)),
      hash_combine(request.ordinal, fnv1a64(request.text))));
  const std::string adjective = pick(kAdjectives, rng);
  std::string out = article_for(adjective) + " " + adjective + " " + request.subject + " " + pick(kPoses, rng) +
                    " " + pick(kScenes, rng);
  if (state_.concepts.size() > 1 && rng.uniform() < state_.cooccurrence_probability) {
    std::string other;
    for (int tries = 0; tries < 8 && other.empty(); ++tries) {
      const auto& candidate = state_.concepts[rng.next() % state_.concepts.size()];
      if (lower(candidate) != lower(request.subject)) other = candidate;
    }
    if (!other.empty()) out += ", next to " + lower(article_for(other)) + " " + other;
  }
  out += ", ";
  out += pick(kLighting, rng);
  out += ", ";
  out += pick(kStyles, rng);
  out += ".";
  return out;
}

std::string SimulatorModel::judge(const TextRequest& request) const {
  const auto& fx = state_.fixtures;
  if (const auto it = fx.judge_responses.find(request.candidate); it != fx.judge_responses.end()) {
    return it->second;
  }
  double score;
  if (const auto it = fx.prompt_scores.find(request.candidate); it != fx.prompt_scores.end()) {
    score = it->second;
  } else {
    SplitMixStream rng(hash_combine(hash_combine(state_.seed, fnv1a64("judge")), fnv1a64(request.candidate)));
    score = state_.judge_score_low + (state_.judge_score_high - state_.judge_score_low) * rng.uniform();
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", score);
  return "Background variation, pose and fluency reviewed.\nRealism score:\n" + std::string(buf);
}

GeneratedImage SimulatorModel::generate_image(const ImageRequest& request, std::size_t max_prompt_chars) const {
  if (request.prompt.size() > max_prompt_chars) throw InvalidRequestError("image prompt too long");
  const std::string prompt_lower = lower(request.prompt);
  for (const auto& marker : state_.fixtures.refusal_markers) {
    if (prompt_lower.find(lower(marker)) != std::string::npos) {
      throw RefusalError("content policy refusal for prompt containing '" + marker + "'");
    }
  }
  for (const auto& marker : state_.fixtures.blank_image_markers) {
    if (prompt_lower.find(lower(marker)) != std::string::npos) return {{}, request.seed};
  }
  if (request.side <= 0) throw InvalidRequestError("image side must be positive");

  SplitMixStream rng(hash_combine(hash_combine(hash_combine(state_.seed, fnv1a64("image")), fnv1a64(request.prompt)),
                                  static_cast<std::uint64_t>(request.seed)));
  const int side = request.side;
  RgbImage img(side, side);
  const int base = 60 + static_cast<int>(rng.next() % 140);
  for (int y = 0; y < side; ++y) {
    for (int x = 0; x < side; ++x) {
      auto* px = img.at(x, y);
      for (int ch = 0; ch < 3; ++ch) px[ch] = static_cast<std::uint8_t>(base + static_cast<int>(rng.next() % 25) - 12);
    }
  }

  std::vector<std::size_t> painted;
  if (!state_.concepts.empty() && rng.uniform() < state_.extra_object_probability) {
    painted.push_back(rng.next() % state_.concepts.size());
  }
  for (std::size_t c : mentioned_concepts(request.prompt)) painted.push_back(c);

  for (std::size_t c : painted) {
    const int w = std::max(1, static_cast<int>(side * (0.35 + 0.3 * rng.uniform())));
    const int h = std::max(1, static_cast<int>(side * (0.35 + 0.3 * rng.uniform())));
    const int x0 = static_cast<int>(rng.next() % static_cast<std::uint64_t>(side - w + 1));
    const int y0 = static_cast<int>(rng.next() % static_cast<std::uint64_t>(side - h + 1));
    const auto color = colors_[c];
    for (int y = y0; y < y0 + h; ++y) {
      for (int x = x0; x < x0 + w; ++x) {
        auto* px = img.at(x, y);
        for (int ch = 0; ch < 3; ++ch) {
          const int jitter = static_cast<int>(rng.next() % 7) - 3;
          px[ch] = static_cast<std::uint8_t>(std::clamp(color[ch] + jitter, 0, 255));
        }
      }
    }
  }
  return {encode_png(img, {{"prompt", request.prompt}, {"seed", std::to_string(request.seed)}}), request.seed};
}

int SimulatorModel::classify_pixel(const std::uint8_t* rgb) const {
  int best = -1;
  int best_dist = state_.color_tolerance + 1;
  for (std::size_t i = 0; i < colors_.size(); ++i) {
    int dist = 0;
    for (int ch = 0; ch < 3; ++ch) dist = std::max(dist, std::abs(static_cast<int>(rgb[ch]) - colors_[i][ch]));
    if (dist < best_dist) {
      best_dist = dist;
      best = static_cast<int>(i);
    }
  }
  return best;
}

EmbeddingVector SimulatorModel::embed_text(std::string_view text) const {
  if (text.empty()) throw InvalidRequestError("cannot embed empty text");
  if (const auto it = state_.fixtures.text_embeddings.find(std::string(text));
      it != state_.fixtures.text_embeddings.end()) {
    return EmbeddingVector(it->second);
  }
  std::vector<double> v = noise_direction(hash_combine(fnv1a64("text"), fnv1a64(text)));
  const auto concepts = mentioned_concepts(text);
  if (!concepts.empty()) {
    for (auto& x : v) x *= state_.text_noise;
    for (std::size_t c : concepts) {
      for (std::size_t d = 0; d < v.size(); ++d) v[d] += directions_[c][d];
    }
  }
  return EmbeddingVector::from_doubles(v);
}

EmbeddingVector SimulatorModel::embed_image(std::span<const std::uint8_t> png) const {
  const DecodedPng decoded = decode_png(png);
  if (const auto prompt = decoded.text.find("prompt"); prompt != decoded.text.end()) {
    if (const auto it = state_.fixtures.image_embeddings.find(prompt->second);
        it != state_.fixtures.image_embeddings.end()) {
      return EmbeddingVector(it->second);
    }
  }
  const auto& img = decoded.image;
  std::vector<double> counts(colors_.size(), 0.0);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (const int c = classify_pixel(img.at(x, y)); c >= 0) counts[static_cast<std::size_t>(c)] += 1.0;
    }
  }
  const double total = static_cast<double>(img.width) * img.height;
  std::vector<double> v = noise_direction(hash_combine(fnv1a64("image-embed"), fnv1a64(png)));
  for (auto& x : v) x *= state_.image_noise;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0.0) continue;
    const double f = counts[c] / total;
    for (std::size_t d = 0; d < v.size(); ++d) v[d] += f * directions_[c][d];
  }
  return EmbeddingVector::from_doubles(v);
}

relabeler::PatchEmbeddingMatrix SimulatorModel::embed_patches(std::span<const std::uint8_t> png,
                                                              const relabeler::PatchGridConfig& grid) const {
  grid.validate();
  if (grid.embedding_dim != state_.embedding_dim) throw DimensionMismatchError(state_.embedding_dim, grid.embedding_dim);
  const RgbImage img = resize_bilinear(decode_png(png).image, grid.input_side, grid.input_side);
  const int per_side = grid.patches_per_side();
  const int d = grid.patch_side;
  const std::size_t e = state_.embedding_dim;
  const double scale = std::sqrt(static_cast<double>(e));

  std::vector<int> labels(static_cast<std::size_t>(img.width) * img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) labels[static_cast<std::size_t>(y) * img.width + x] = classify_pixel(img.at(x, y));
  }

  relabeler::PatchEmbeddingMatrix f(grid.patch_count(), static_cast<Eigen::Index>(e));
  std::vector<double> counts(colors_.size());
  std::vector<std::uint8_t> patch_bytes(static_cast<std::size_t>(d) * d * 3);
  for (int py = 0; py < per_side; ++py) {
    for (int px = 0; px < per_side; ++px) {
      std::fill(counts.begin(), counts.end(), 0.0);
      std::size_t k = 0;
      for (int y = py * d; y < (py + 1) * d; ++y) {
        for (int x = px * d; x < (px + 1) * d; ++x) {
          const auto* p = img.at(x, y);
          patch_bytes[k++] = p[0];
          patch_bytes[k++] = p[1];
          patch_bytes[k++] = p[2];
          if (const int c = labels[static_cast<std::size_t>(y) * img.width + x]; c >= 0) counts[static_cast<std::size_t>(c)] += 1.0;
        }
      }
      std::vector<double> v = noise_direction(hash_combine(fnv1a64("patch"), fnv1a64(patch_bytes)));
      for (auto& x : v) x *= state_.patch_noise;
      const double area = static_cast<double>(d) * d;
      for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] == 0.0) continue;
        for (std::size_t j = 0; j < e; ++j) v[j] += counts[c] / area * directions_[c][j];
      }
      const Eigen::Index row = static_cast<Eigen::Index>(py) * per_side + px;
      for (std::size_t j = 0; j < e; ++j) f(row, static_cast<Eigen::Index>(j)) = scale * v[j];
    }
  }
  return f;
}

SimulatedTextGenerator::SimulatedTextGenerator(std::shared_ptr<const SimulatorModel> model,
                                               ProviderDescriptor descriptor)
    : model_(std::move(model)), descriptor_(std::move(descriptor)) {}

std::string SimulatedTextGenerator::generate_text(const TextRequest& request) {
  return model_->generate_text(request);
}

SimulatedImageGenerator::SimulatedImageGenerator(std::shared_ptr<const SimulatorModel> model,
                                                 ProviderDescriptor descriptor)
    : model_(std::move(model)), descriptor_(std::move(descriptor)) {}

GeneratedImage SimulatedImageGenerator::generate_image(const ImageRequest& request) {
  return model_->generate_image(request, descriptor_.max_prompt_chars);
}

SimulatedEmbedder::SimulatedEmbedder(std::shared_ptr<const SimulatorModel> model, ProviderDescriptor descriptor)
    : model_(std::move(model)), descriptor_(std::move(descriptor)) {
  if (descriptor_.embedding_dim != model_->state().embedding_dim) {
    throw DimensionMismatchError(descriptor_.embedding_dim, model_->state().embedding_dim);
  }
}

EmbeddingVector SimulatedEmbedder::embed_text(std::string_view text) { return model_->embed_text(text); }

EmbeddingVector SimulatedEmbedder::embed_image(std::span<const std::uint8_t> png) {
  return model_->embed_image(png);
}

relabeler::PatchEmbeddingMatrix SimulatedEmbedder::embed_patches(std::span<const std::uint8_t> png,
                                                                 const relabeler::PatchGridConfig& grid) {
  return model_->embed_patches(png, grid);
}

ProviderSet make_simulated_providers(SimulatorState state) {
  ProviderDescriptor text;
  text.kind = ProviderKind::text_generation;
  text.seed = state.seed;
  ProviderDescriptor image = text;
  image.kind = ProviderKind::image_generation;
  ProviderDescriptor embed = text;
  embed.kind = ProviderKind::embedding;
  embed.embedding_dim = state.embedding_dim;
  return make_simulated_providers(std::move(state), text, image, embed);
}

ProviderSet make_simulated_providers(SimulatorState state, ProviderDescriptor text, ProviderDescriptor image,
                                     ProviderDescriptor embedder) {
  auto model = std::make_shared<const SimulatorModel>(std::move(state));
  return {std::make_shared<SimulatedTextGenerator>(model, std::move(text)),
          std::make_shared<SimulatedImageGenerator>(model, std::move(image)),
          std::make_shared<SimulatedEmbedder>(model, std::move(embedder))};
}

}  // namespace synthforge::backends
