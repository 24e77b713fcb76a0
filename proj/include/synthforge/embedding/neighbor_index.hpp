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
#include <filesystem>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "synthforge/embedding/vector.hpp"

namespace synthforge::embedding {

enum class SearchMode : std::uint8_t { exact = 0, approximate = 1 };

const char* to_string(SearchMode mode);
SearchMode search_mode_from_string(const std::string& s);

// Inverted-file parameters for approximate mode. Below `min_train_size`
// stored vectors the index answers exactly; past it, vectors are bucketed
// around sqrt(n) spherical k-means centroids and a query scans the
// `probe_fraction` closest buckets. Centroids are retrained whenever the
// index doubles in size.
struct ApproximateParams {
  std::size_t min_train_size = 256;
  double probe_fraction = 0.35;
  int kmeans_iterations = 6;
  std::size_t train_sample_per_list = 32;
};

struct Neighbor {
  std::string id;
  double similarity = 0.0;  // cosine
  std::size_t position = 0;  // insertion order
};

// Cosine nearest-neighbour store. Readers may run concurrently; insert takes
// an exclusive lock. Exact mode returns the stored vector maximizing cosine
// with the query, ties going to the earliest insertion.
class NeighborIndex {
 public:
  explicit NeighborIndex(std::size_t dimension, SearchMode mode = SearchMode::exact,
                         ApproximateParams params = {});
  NeighborIndex(NeighborIndex&&) noexcept;
  NeighborIndex& operator=(NeighborIndex&&) noexcept;
  ~NeighborIndex();

  // v must be unit-norm (InvariantError otherwise); ids must be unique
  // (DuplicateIdError).
  void insert(const std::string& id, const EmbeddingVector& v);

  // Empty optional for an empty index.
  std::optional<Neighbor> nearest(const EmbeddingVector& query) const;

  std::size_t size() const;
  std::size_t dimension() const { return dimension_; }
  SearchMode mode() const { return mode_; }
  const ApproximateParams& params() const { return params_; }
  bool contains(const std::string& id) const;
  std::vector<std::string> ids() const;
  EmbeddingVector vector_at(std::size_t position) const;

  // Header (magic, version, dimension, count, mode, probe fraction), id table,
  // then count*dimension little-endian float32 values.
  void save(const std::filesystem::path& path) const;
  static NeighborIndex load(const std::filesystem::path& path);

 private:
  struct Partition;

  double similarity_at(std::size_t position, std::span<const float> q, double q_norm) const;
  std::optional<Neighbor> scan_all(std::span<const float> q, double q_norm) const;
  std::optional<Neighbor> scan_partitions(std::span<const float> q, double q_norm) const;
  void maybe_retrain();

  std::size_t dimension_;
  SearchMode mode_;
  ApproximateParams params_;
  std::vector<float> data_;
  std::vector<double> norms_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> positions_;
  std::unique_ptr<Partition> partition_;
  std::unique_ptr<std::shared_mutex> mutex_;
};

}  // namespace synthforge::embedding
