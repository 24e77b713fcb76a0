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

#include "synthforge/relabeler/relabel.hpp"

#include "synthforge/core/errors.hpp"
#include "synthforge/core/io.hpp"

namespace synthforge::relabeler {

PatchEmbeddingMatrix patch_embed(const ImageRecord& img, const PatchGridConfig& grid, backends::Embedder& embedder,
                                 const std::filesystem::path& run_dir) {
  const auto bytes = read_file_bytes(run_dir / img.file_path);
  return backends::embed_patches(embedder, bytes, grid);
}

PatchGridConfig inference_grid(const PatchGridConfig& training_grid, int inference_side,
                               const backends::ProviderDescriptor& embedder) {
  PatchGridConfig grid = training_grid;
  if (embedder.supports_inference_resize && inference_side > 0 && inference_side % training_grid.patch_side == 0) {
    grid.input_side = inference_side;
  }
  return grid;
}

MultiLabelTarget target_from_labels(const std::set<ClassId>& labels, std::size_t num_classes) {
  MultiLabelTarget y = MultiLabelTarget::Zero(static_cast<Eigen::Index>(num_classes));
  for (const ClassId c : labels) {
    if (c < 0 || static_cast<std::size_t>(c) >= num_classes) {
      throw InvariantError("label " + std::to_string(c) + " outside the vocabulary");
    }
    y(c) = 1.0;
  }
  return y;
}

std::set<ClassId> relabel(const ImageRecord& img, const LinearClassifier& classifier, const PatchGridConfig& grid,
                          backends::Embedder& embedder, double threshold, const std::filesystem::path& run_dir) {
  if (grid.embedding_dim != classifier.embedding_dim()) {
    throw DimensionMismatchError(classifier.embedding_dim(), grid.embedding_dim);
  }
  return labels_from_prediction(classifier.predict(patch_embed(img, grid, embedder, run_dir)), threshold);
}

}  // namespace synthforge::relabeler
