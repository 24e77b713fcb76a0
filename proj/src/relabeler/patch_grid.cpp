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

#include "synthforge/relabeler/patch_grid.hpp"

#include <string>

#include "synthforge/core/errors.hpp"

namespace synthforge::relabeler {

void PatchGridConfig::validate() const {
  if (input_side <= 0 || patch_side <= 0) throw ConfigError("patch grid sides must be positive");
  if (input_side % patch_side != 0) {
    throw ConfigError("input side " + std::to_string(input_side) + " is not divisible by patch side " +
                      std::to_string(patch_side));
  }
}

void check_patch_matrix(const PatchEmbeddingMatrix& f, const PatchGridConfig& grid) {
  if (f.rows() != grid.patch_count()) {
    throw DimensionMismatchError(static_cast<std::size_t>(grid.patch_count()), static_cast<std::size_t>(f.rows()));
  }
  if (static_cast<std::size_t>(f.cols()) != grid.embedding_dim) {
    throw DimensionMismatchError(grid.embedding_dim, static_cast<std::size_t>(f.cols()));
  }
  if (!f.allFinite()) throw InvariantError("patch embedding matrix has non-finite entries");
}

}  // namespace synthforge::relabeler
