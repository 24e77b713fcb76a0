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

#include "synthforge/image_agent/agent.hpp"

#include <algorithm>
#include <map>

#include <spdlog/spdlog.h>

#include "synthforge/core/errors.hpp"
#include "synthforge/core/hash.hpp"
#include "synthforge/core/io.hpp"
#include "synthforge/core/parallel.hpp"

namespace synthforge::image_agent {

using embedding::EmbeddingVector;
using nlohmann::json;

void to_json(json& j, const HighConfidencePair& p) {
  j = json{{"image_id", p.image_id},
           {"prompt_id", p.prompt_id},
           {"class_id", p.class_id},
           {"text_score", p.text_score},
           {"image_score", p.image_score}};
}

void from_json(const json& j, HighConfidencePair& p) {
  j.at("image_id").get_to(p.image_id);
  p.prompt_id = j.value("prompt_id", std::string());
  j.at("class_id").get_to(p.class_id);
  j.at("text_score").get_to(p.text_score);
  j.at("image_score").get_to(p.image_score);
}

void to_json(json& j, const FailedGeneration& f) {
  j = json{{"image_id", f.image_id},
           {"prompt_id", f.prompt_id},
           {"fan_index", f.fan_index},
           {"attempts", f.attempts},
           {"reason", f.reason}};
}

void from_json(const json& j, FailedGeneration& f) {
  j.at("image_id").get_to(f.image_id);
  j.at("prompt_id").get_to(f.prompt_id);
  j.at("fan_index").get_to(f.fan_index);
  f.attempts = j.value("attempts", 0);
  f.reason = j.value("reason", std::string());
}

std::vector<EmbeddingVector> class_text_embeddings(const ClassVocabulary& vocab, backends::Embedder& embedder) {
  std::vector<EmbeddingVector> out;
  out.reserve(vocab.size());
  for (const auto& c : vocab.classes()) out.push_back(embedding::normalize(backends::embed_text(embedder, c.name)));
  return out;
}

namespace {

std::int64_t image_seed(std::uint64_t run_seed, const std::string& prompt_id, int fan_index, int attempt) {
  const std::uint64_t h = hash_combine(hash_combine(hash_combine(run_seed, fnv1a64("image-seed")), fnv1a64(prompt_id)),
                                       hash_combine(static_cast<std::uint64_t>(fan_index),
                                                    static_cast<std::uint64_t>(attempt)));
  return static_cast<std::int64_t>(h >> 1);
}

bool by_prompt_then_fan(const ImageRecord& a, const ImageRecord& b) {
  return std::tie(a.prompt_id, a.fan_index) < std::tie(b.prompt_id, b.fan_index);
}

}  // namespace

SynthesisOutcome synthesize(const PromptRecord& p, int fan_index, const ImageAgentContext& ctx) {
  if (p.status != PromptStatus::accepted) throw InvariantError("prompt " + p.prompt_id + " is not accepted");
  const std::string image_id = ctx.ids.make("image/" + p.prompt_id, static_cast<std::uint64_t>(fan_index));
  const int attempts_allowed = 1 + std::max(ctx.settings.max_retries, 0);
  std::string reason;
  for (int attempt = 0; attempt < attempts_allowed; ++attempt) {
    backends::ImageRequest request;
    request.prompt = p.text;
    request.seed = image_seed(ctx.seed, p.prompt_id, fan_index, attempt);
    request.side = ctx.settings.image_side;
    try {
      const auto generated = backends::generate_image(ctx.generator, request);
      ImageRecord record;
      record.image_id = image_id;
      record.prompt_id = p.prompt_id;
      record.prompt_class = p.class_id;
      record.fan_index = fan_index;
      record.file_path = "images/" + class_slug(ctx.vocabulary.name(p.class_id)) + "/" + image_id + ".png";
      record.provider_seed = generated.seed;
      write_file_atomic(ctx.run_dir / record.file_path, std::span<const std::uint8_t>(generated.png));
      return {std::move(record), std::nullopt};
    } catch (const ProviderError& e) {
      reason = e.what();
      spdlog::warn("image {} for prompt {} failed (attempt {} of {}): {}", fan_index, p.prompt_id, attempt + 1,
                   attempts_allowed, reason);
    }
  }
  return {std::nullopt, FailedGeneration{image_id, p.prompt_id, fan_index, attempts_allowed, reason}};
}

CandidateLabelSet text_candidate_labels(const PromptRecord& p, const ClassVocabulary& vocab, double gamma_text,
                                        const std::vector<EmbeddingVector>& class_embeddings,
                                        backends::Embedder& embedder) {
  if (p.text.empty()) throw InvariantError("prompt " + p.prompt_id + " has empty text");
  if (class_embeddings.size() != vocab.size()) {
    throw DimensionMismatchError(vocab.size(), class_embeddings.size());
  }
  const EmbeddingVector prompt_vec =
      p.embedding ? embedding::normalize(*p.embedding) : embedding::normalize(backends::embed_text(embedder, p.text));
  CandidateLabelSet set;
  set.prompt_id = p.prompt_id;
  for (const auto& c : vocab.classes()) {
    const double score = embedding::scaled_similarity(prompt_vec, class_embeddings[static_cast<std::size_t>(c.id)]);
    if (score > gamma_text) set.entries.push_back({c.id, score, std::nullopt});
  }
  return set;
}

CandidateLabelSet image_label_scores(ImageRecord& img, CandidateLabelSet candidates,
                                     const std::vector<EmbeddingVector>& class_embeddings,
                                     backends::Embedder& embedder, const std::filesystem::path& run_dir) {
  if (!img.embedding) {
    const auto bytes = read_file_bytes(run_dir / img.file_path);
    img.embedding = embedding::normalize(backends::embed_image(embedder, bytes));
  }
  const EmbeddingVector image_vec = embedding::normalize(*img.embedding);
  for (auto& entry : candidates.entries) {
    entry.image_score =
        embedding::scaled_similarity(image_vec, class_embeddings.at(static_cast<std::size_t>(entry.class_id)));
  }
  return candidates;
}

std::vector<ClassId> select_top_n(const CandidateLabelSet& candidates, int n) {
  if (n < 1) throw ConfigError("top_n must be positive");
  std::vector<const CandidateEntry*> order;
  for (const auto& e : candidates.entries) {
    if (!e.image_score) throw InvariantError("candidate class " + std::to_string(e.class_id) + " has no image score");
    order.push_back(&e);
  }
  std::sort(order.begin(), order.end(), [](const CandidateEntry* a, const CandidateEntry* b) {
    if (*a->image_score != *b->image_score) return *a->image_score > *b->image_score;
    return a->class_id < b->class_id;
  });
  std::vector<ClassId> out;
  for (std::size_t i = 0; i < order.size() && i < static_cast<std::size_t>(n); ++i) out.push_back(order[i]->class_id);
  return out;
}

SynthesisBatch synthesize_all(const std::vector<PromptRecord>& prompts, const ImageAgentContext& ctx) {
  const int fan_out = std::max(ctx.settings.fan_out, 1);
  std::vector<const PromptRecord*> ordered;
  for (const auto& p : prompts) ordered.push_back(&p);
  std::sort(ordered.begin(), ordered.end(),
            [](const PromptRecord* a, const PromptRecord* b) { return a->prompt_id < b->prompt_id; });

  std::vector<SynthesisOutcome> outcomes(ordered.size() * static_cast<std::size_t>(fan_out));
  parallel_for(outcomes.size(), ctx.max_concurrency, [&](std::size_t i) {
    outcomes[i] = synthesize(*ordered[i / fan_out], static_cast<int>(i % fan_out), ctx);
  });

  SynthesisBatch batch;
  for (auto& o : outcomes) {
    if (o.image) batch.images.push_back(std::move(*o.image));
    if (o.failure) batch.failures.push_back(std::move(*o.failure));
  }
  return batch;
}

DualFilterResult dual_filter(const std::vector<PromptRecord>& prompts, std::vector<ImageRecord> images,
                             const ImageAgentContext& ctx) {
  std::map<std::string, const PromptRecord*> by_id;
  for (const auto& p : prompts) by_id.emplace(p.prompt_id, &p);
  std::sort(images.begin(), images.end(), by_prompt_then_fan);

  const auto class_embeddings = class_text_embeddings(ctx.vocabulary, ctx.embedder);

  // The text gate depends only on the prompt; compute it once per prompt.
  std::map<std::string, CandidateLabelSet> text_sets;
  for (const auto& img : images) {
    const auto it = by_id.find(img.prompt_id);
    if (it == by_id.end()) throw InvariantError("image " + img.image_id + " refers to unknown prompt " + img.prompt_id);
    if (!text_sets.count(img.prompt_id)) {
      text_sets.emplace(img.prompt_id, text_candidate_labels(*it->second, ctx.vocabulary, ctx.settings.gamma_text,
                                                             class_embeddings, ctx.embedder));
    }
  }

  DualFilterResult result;
  result.candidates.resize(images.size());
  std::vector<std::vector<ClassId>> selected(images.size());
  parallel_for(images.size(), ctx.max_concurrency, [&](std::size_t i) {
    auto& img = images[i];
    const auto& text_set = text_sets.at(img.prompt_id);
    if (text_set.entries.empty()) {
      result.candidates[i] = text_set;
      return;
    }
    try {
      result.candidates[i] = image_label_scores(img, text_set, class_embeddings, ctx.embedder, ctx.run_dir);
    } catch (const ProviderError& e) {
      spdlog::warn("skipping image {}: {}", img.image_id, e.what());
      result.candidates[i] = CandidateLabelSet{img.prompt_id, {}};
      return;
    }
    selected[i] = select_top_n(result.candidates[i], ctx.settings.top_n);
  });

  for (std::size_t i = 0; i < images.size(); ++i) {
    auto& img = images[i];
    img.pseudo_labels.clear();
    img.label_source = LabelSource::none;
    for (const ClassId c : selected[i]) {
      const auto& entries = result.candidates[i].entries;
      const auto e = std::find_if(entries.begin(), entries.end(), [c](const CandidateEntry& x) { return x.class_id == c; });
      result.pairs.push_back({img.image_id, img.prompt_id, c, e->text_score, *e->image_score});
      img.pseudo_labels.insert(c);
      img.label_source = LabelSource::dual_filter;
    }
  }
  result.images = std::move(images);
  return result;
}

HighConfidenceResult build_high_confidence_set(const std::vector<PromptRecord>& prompts,
                                               const ImageAgentContext& ctx) {
  auto batch = synthesize_all(prompts, ctx);
  HighConfidenceResult result;
  result.filtered = dual_filter(prompts, std::move(batch.images), ctx);
  result.failures = std::move(batch.failures);
  return result;
}

}  // namespace synthforge::image_agent
