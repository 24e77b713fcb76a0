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
#include <string_view>
#include <vector>

#include "synthforge/backends/provider.hpp"
#include "synthforge/core/config.hpp"
#include "synthforge/core/ids.hpp"
#include "synthforge/core/records.hpp"
#include "synthforge/core/vocabulary.hpp"
#include "synthforge/prompt_agent/memory.hpp"
#include "synthforge/prompt_agent/template.hpp"

namespace synthforge::prompt_agent {

struct RefinementPolicy {
  double epsilon = 0.95;
  int max_refine_iterations = 5;
  int max_generation_attempts = 3;
  int max_judge_attempts = 3;
  PromptTemplate generate = default_generation_template();
  PromptTemplate refine = default_judge_template();

  static RefinementPolicy from_settings(const PromptAgentSettings& settings, TemplateSet templates);
  // Throws ConfigError unless epsilon is in [0, 1] and every bound is >= 1.
  void validate() const;
};

// Everything the agent needs besides per-call arguments.
struct AgentContext {
  const ClassVocabulary& vocabulary;
  backends::TextGenerator& text;
  backends::Embedder& embedder;
  const IdFactory& ids;
  RefinementPolicy policy;
  int max_concurrency = 1;
};

backends::TextRequest instantiate_template(const PromptTemplate& tmpl, std::string_view class_name);

// Takes the last number in a judge reply and clamps it to [0, 1], logging a
// warning when clamping was needed. ScoringError when there is no number.
double parse_quality_score(std::string_view reply);

// Candidate slot k of class c owns generation ordinals
// [k * max_refine_iterations, (k + 1) * max_refine_iterations); iteration i of
// the refine loop uses the i-th of them. Prompt ids derive from (c, k).
std::uint64_t generation_ordinal(const RefinementPolicy& policy, std::uint64_t slot, int iteration);

// Records for slots first_slot .. first_slot + n - 1, status candidate.
// Empty generations are retried up to max_generation_attempts times.
std::vector<PromptRecord> generate_candidates(ClassId c, int n, const AgentContext& ctx,
                                              std::uint64_t first_slot = 0);

// Judge score for p. Unparseable replies are retried up to
// max_judge_attempts times. `calls` (if given) is incremented per judge call.
double quality_score(const PromptRecord& p, const AgentContext& ctx, int* calls = nullptr);

// Judges `initial`, regenerating until a candidate scores >= epsilon or
// max_refine_iterations candidates have been judged. The result has status
// refined; when no candidate cleared epsilon it is the best one seen (earliest
// on ties) with below_threshold set.
PromptRecord refine(PromptRecord initial, const AgentContext& ctx, std::uint64_t slot);
PromptRecord refine_until_accepted(ClassId c, const AgentContext& ctx, std::uint64_t slot = 0);

// Sequential novelty gate. Walks `candidates` in order; a candidate is accepted
// when memory is empty or the raw cosine to its nearest stored neighbour is
// below delta, and is added to memory before the next one is examined.
// Statuses are updated in place; the accepted records are returned in order.
std::vector<PromptRecord> diversity_filter(std::vector<PromptRecord>& candidates, MemoryBuffer& memory,
                                           double delta);

struct PromptAgentResult {
  std::vector<PromptRecord> accepted;
  // Every candidate examined, in slot order, with its final status.
  std::vector<PromptRecord> examined;
  std::uint64_t next_slot = 0;
};

// Runs the generate-judge-refine loop and the novelty gate for one class until
// prompts_per_class prompts are accepted or the candidate budget
// (prompts_per_class * candidate_budget_factor slots) is spent.
PromptAgentResult run_prompt_agent(ClassId c, const PromptAgentSettings& settings, const AgentContext& ctx,
                                   MemoryBuffer& memory);

}  // namespace synthforge::prompt_agent
