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

#include "synthforge/prompt_agent/memory.hpp"

#include "synthforge/core/errors.hpp"

namespace synthforge::prompt_agent {

MemoryBuffer::MemoryBuffer(std::size_t dimension, embedding::SearchMode mode) : index_(dimension, mode) {}

MemoryBuffer::MemoryBuffer(embedding::NeighborIndex index) : index_(std::move(index)) {}

void MemoryBuffer::add(const PromptRecord& record) {
  if (!record.embedding) throw InvariantError("prompt " + record.prompt_id + " has no embedding");
  index_.insert(record.prompt_id, *record.embedding);
  texts_.emplace(record.prompt_id, record.text);
}

std::optional<embedding::Neighbor> MemoryBuffer::nearest(const embedding::EmbeddingVector& query) const {
  return index_.nearest(query);
}

std::optional<std::string> MemoryBuffer::text(const std::string& prompt_id) const {
  if (const auto it = texts_.find(prompt_id); it != texts_.end()) return it->second;
  return std::nullopt;
}

MemoryBuffer MemoryBuffer::load(const std::filesystem::path& path) {
  return MemoryBuffer(embedding::NeighborIndex::load(path));
}

}  // namespace synthforge::prompt_agent
