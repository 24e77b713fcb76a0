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
#include <set>

#include "synthforge/backends/provider.hpp"
#include "synthforge/core/records.hpp"
#include "synthforge/relabeler/classifier.hpp"

namespace synthforge::relabeler {

// Reads the image file (relative to run_dir) and asks the frozen encoder for
// its row-major patch embeddings on `grid`.
PatchEmbeddingMatrix patch_embed(const ImageRecord& img, const PatchGridConfig& grid, backends::Embedder& embedder,
                                 const std::filesystem::path& run_dir);

// Grid used at relabel time: the training grid enlarged to inference_side when
// the embedding provider accepts a resize and the side divides evenly.
PatchGridConfig inference_grid(const PatchGridConfig& training_grid, int inference_side,
                               const backends::ProviderDescriptor& embedder);

MultiLabelTarget target_from_labels(const std::set<ClassId>& labels, std::size_t num_classes);

// Label set predicted for the image: every class with y_hat >= threshold, or
// the argmax class alone when none qualifies.
std::set<ClassId> relabel(const ImageRecord& img, const LinearClassifier& classifier, const PatchGridConfig& grid,
                          backends::Embedder& embedder, double threshold, const std::filesystem::path& run_dir);

}  // namespace synthforge::relabeler
