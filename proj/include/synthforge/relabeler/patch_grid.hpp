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

#include <cstddef>

#include <Eigen/Dense>

namespace synthforge::relabeler {

// Square input of side h cut into non-overlapping d x d patches, giving
// s = (h / d)^2 rows of embedding_dim columns.
struct PatchGridConfig {
  int input_side = 384;
  int patch_side = 16;
  std::size_t embedding_dim = 0;

  int patches_per_side() const { return input_side / patch_side; }
  int patch_count() const { return patches_per_side() * patches_per_side(); }
  // Throws ConfigError unless both sides are positive and h mod d == 0.
  void validate() const;
};

// s x e matrix of patch embeddings, rows in row-major patch order.
using PatchEmbeddingMatrix = Eigen::MatrixXd;

// Throws unless F has exactly (patch_count, embedding_dim) shape and finite entries.
void check_patch_matrix(const PatchEmbeddingMatrix& f, const PatchGridConfig& grid);

}  // namespace synthforge::relabeler
