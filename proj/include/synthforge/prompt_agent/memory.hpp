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
#include <optional>
#include <string>
#include <unordered_map>

#include "synthforge/core/records.hpp"
#include "synthforge/embedding/neighbor_index.hpp"

namespace synthforge::prompt_agent {

// Accepted prompts and their unit-norm embeddings. One buffer serves the
// whole run, across all classes.
class MemoryBuffer {
 public:
  explicit MemoryBuffer(std::size_t dimension, embedding::SearchMode mode = embedding::SearchMode::exact);
  explicit MemoryBuffer(embedding::NeighborIndex index);

  // Requires a unit-norm embedding and an unused prompt id.
  void add(const PromptRecord& record);
  std::optional<embedding::Neighbor> nearest(const embedding::EmbeddingVector& query) const;

  std::size_t size() const { return index_.size(); }
  bool contains(const std::string& prompt_id) const { return index_.contains(prompt_id); }
  const embedding::NeighborIndex& index() const { return index_; }
  // Text of an accepted prompt, when it was added in this process.
  std::optional<std::string> text(const std::string& prompt_id) const;

  void save(const std::filesystem::path& path) const { index_.save(path); }
  static MemoryBuffer load(const std::filesystem::path& path);

 private:
  embedding::NeighborIndex index_;
  std::unordered_map<std::string, std::string> texts_;
};

}  // namespace synthforge::prompt_agent
