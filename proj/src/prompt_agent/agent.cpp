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

#include "synthforge/prompt_agent/agent.hpp"

#include <algorithm>
#include <cstdlib>
#include <regex>

#include <spdlog/spdlog.h>

#include "synthforge/core/errors.hpp"
#include "synthforge/core/parallel.hpp"

namespace synthforge::prompt_agent {

using backends::TextPurpose;
using backends::TextRequest;

RefinementPolicy RefinementPolicy::from_settings(const PromptAgentSettings& settings, TemplateSet templates) {
  RefinementPolicy policy;
  policy.epsilon = settings.epsilon;
  policy.max_refine_iterations = settings.max_refine_iterations;
  policy.max_generation_attempts = settings.max_generation_attempts;
  policy.max_judge_attempts = settings.max_judge_attempts;
  policy.generate = std::move(templates.generate);
  policy.refine = std::move(templates.judge);
  return policy;
}

void RefinementPolicy::validate() const {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
  if (max_refine_iterations < 1) throw ConfigError("max_refine_iterations must be at least 1");
  if (max_generation_attempts < 1) throw ConfigError("max_generation_attempts must be at least 1");
  if (max_judge_attempts < 1) throw ConfigError("max_judge_attempts must be at least 1");
}

TextRequest instantiate_template(const PromptTemplate& tmpl, std::string_view class_name) {
  TextRequest request;
  request.purpose = TextPurpose::generate;
  request.text = tmpl.instantiate(class_name);
  request.subject = std::string(class_name);
  return request;
}

double parse_quality_score(std::string_view reply) {
  static const std::regex number(R"([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)");
  const std::string text(reply);
  std::string last;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), number); it != std::sregex_iterator(); ++it) {
    last = it->str();
  }
  if (last.empty()) throw ScoringError("judge reply carries no score: '" + text.substr(0, 120) + "'");
  const double raw = std::strtod(last.c_str(), nullptr);
  const double clamped = std::clamp(raw, 0.0, 1.0);
  if (clamped != raw) spdlog::warn("judge score {} outside [0, 1], clamped to {}", raw, clamped);
  return clamped;
}

std::uint64_t generation_ordinal(const RefinementPolicy& policy, std::uint64_t slot, int iteration) {
  return slot * static_cast<std::uint64_t>(policy.max_refine_iterations) + static_cast<std::uint64_t>(iteration);
}

namespace {

// Retries of an empty generation are pushed far away from the ordinals used by
// other slots.
constexpr std::uint64_t kRetryStride = 1ULL << 40;

std::string generate_text_for(ClassId c, std::uint64_t ordinal, const AgentContext& ctx) {
  const auto& name = ctx.vocabulary.name(c);
  TextRequest request = instantiate_template(ctx.policy.generate, name);
  for (int attempt = 0; attempt < ctx.policy.max_generation_attempts; ++attempt) {
    request.ordinal = ordinal + static_cast<std::uint64_t>(attempt) * kRetryStride;
    std::string text = backends::generate_text(ctx.text, request);
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos) {
      const auto last = text.find_last_not_of(" \t\r\n");
      return text.substr(first, last - first + 1);
    }
    spdlog::warn("empty generation for class '{}' (ordinal {}, attempt {})", name, ordinal, attempt + 1);
  }
  throw ProviderError("generation for class '" + name + "' stayed empty after " +
                      std::to_string(ctx.policy.max_generation_attempts) + " attempts");
}

std::string prompt_id_for(ClassId c, std::uint64_t slot, const AgentContext& ctx) {
  return ctx.ids.make("prompt/" + std::to_string(c), slot);
}

}  // namespace

std::vector<PromptRecord> generate_candidates(ClassId c, int n, const AgentContext& ctx, std::uint64_t first_slot) {
  if (!ctx.vocabulary.contains(c)) throw ConfigError("class id " + std::to_string(c) + " not in vocabulary");
  if (n < 1) throw ConfigError("candidate count must be at least 1");
  std::vector<PromptRecord> out(static_cast<std::size_t>(n));
  parallel_for(out.size(), ctx.max_concurrency, [&](std::size_t i) {
    const std::uint64_t slot = first_slot + i;
    PromptRecord& r = out[i];
    r.prompt_id = prompt_id_for(c, slot, ctx);
    r.class_id = c;
    r.text = generate_text_for(c, generation_ordinal(ctx.policy, slot, 0), ctx);
    r.status = PromptStatus::candidate;
  });
  return out;
}

double quality_score(const PromptRecord& p, const AgentContext& ctx, int* calls) {
  if (p.text.empty()) throw InvariantError("cannot judge an empty prompt");
  TextRequest request;
  request.purpose = TextPurpose::judge;
  request.subject = ctx.vocabulary.name(p.class_id);
  request.candidate = p.text;
  request.text = ctx.policy.refine.instantiate(request.subject, p.text);
  std::string last_error;
  for (int attempt = 0; attempt < ctx.policy.max_judge_attempts; ++attempt) {
    request.ordinal = static_cast<std::uint64_t>(attempt);
    if (calls) ++*calls;
    const std::string reply = backends::generate_text(ctx.text, request);
    try {
      return parse_quality_score(reply);
    } catch (const ScoringError& e) {
      last_error = e.what();
      spdlog::warn("unparseable judge reply (attempt {}): {}", attempt + 1, last_error);
    }
  }
  throw ScoringError("no usable judge score after " + std::to_string(ctx.policy.max_judge_attempts) +
                     " attempts: " + last_error);
}

PromptRecord refine(PromptRecord initial, const AgentContext& ctx, std::uint64_t slot) {
  PromptRecord current = std::move(initial);
  current.judge_calls = 0;
  PromptRecord best;
  bool have_best = false;
  int calls = 0;
  for (int i = 0; i < ctx.policy.max_refine_iterations; ++i) {
    if (i > 0) current.text = generate_text_for(current.class_id, generation_ordinal(ctx.policy, slot, i), ctx);
    current.quality_score = quality_score(current, ctx, &calls);
    if (*current.quality_score >= ctx.policy.epsilon) {
      current.status = PromptStatus::refined;
      current.below_threshold = false;
      current.judge_calls = calls;
      return current;
    }
    if (!have_best || *current.quality_score > *best.quality_score) {
      best = current;
      have_best = true;
    }
  }
  best.status = PromptStatus::refined;
  best.below_threshold = true;
  best.judge_calls = calls;
  return best;
}

PromptRecord refine_until_accepted(ClassId c, const AgentContext& ctx, std::uint64_t slot) {
  ctx.policy.validate();
  auto candidates = generate_candidates(c, 1, ctx, slot);
  return refine(std::move(candidates.front()), ctx, slot);
}

std::vector<PromptRecord> diversity_filter(std::vector<PromptRecord>& candidates, MemoryBuffer& memory,
                                           double delta) {
  std::vector<PromptRecord> accepted;
  for (auto& candidate : candidates) {
    if (!candidate.embedding) {
      throw InvariantError("candidate " + candidate.prompt_id + " reached the novelty gate without an embedding");
    }
    const auto neighbour = memory.nearest(*candidate.embedding);
    if (!neighbour || neighbour->similarity < delta) {
      candidate.status = PromptStatus::accepted;
      memory.add(candidate);
      accepted.push_back(candidate);
    } else {
      candidate.status = PromptStatus::rejected_duplicate;
    }
  }
  return accepted;
}

PromptAgentResult run_prompt_agent(ClassId c, const PromptAgentSettings& settings, const AgentContext& ctx,
                                   MemoryBuffer& memory) {
  if (!ctx.vocabulary.contains(c)) throw ConfigError("class id " + std::to_string(c) + " not in vocabulary");
  ctx.policy.validate();
  PromptAgentResult result;
  if (settings.prompts_per_class <= 0) return result;

  const auto quota = static_cast<std::size_t>(settings.prompts_per_class);
  const std::uint64_t budget =
      static_cast<std::uint64_t>(settings.prompts_per_class) * static_cast<std::uint64_t>(settings.candidate_budget_factor);

  while (result.accepted.size() < quota && result.next_slot < budget) {
    const std::uint64_t batch = std::min<std::uint64_t>(quota - result.accepted.size(), budget - result.next_slot);
    const std::uint64_t first = result.next_slot;
    std::vector<PromptRecord> batch_records(batch);
    parallel_for(batch, ctx.max_concurrency, [&](std::size_t i) {
      const std::uint64_t slot = first + i;
      PromptRecord r;
      r.prompt_id = prompt_id_for(c, slot, ctx);
      r.class_id = c;
      r.text = generate_text_for(c, generation_ordinal(ctx.policy, slot, 0), ctx);
      r = refine(std::move(r), ctx, slot);
      if (!r.below_threshold) r.embedding = embedding::normalize(backends::embed_text(ctx.embedder, r.text));
      batch_records[i] = std::move(r);
    });
    result.next_slot += batch;

    // The novelty gate is sequential in slot order; that ordering is part of
    // its meaning.
    for (auto& r : batch_records) {
      if (r.below_threshold) {
        r.status = PromptStatus::rejected_quality;
      } else {
        std::vector<PromptRecord> one{r};
        auto kept = diversity_filter(one, memory, settings.delta);
        r.status = one.front().status;
        if (!kept.empty()) result.accepted.push_back(std::move(kept.front()));
      }
      check_invariants(r);
      result.examined.push_back(std::move(r));
    }
  }
  if (result.accepted.size() < quota) {
    spdlog::warn("class '{}': accepted {} of {} prompts within a budget of {} candidates",
                 ctx.vocabulary.name(c), result.accepted.size(), quota, budget);
  }
  return result;
}

}  // namespace synthforge::prompt_agent
