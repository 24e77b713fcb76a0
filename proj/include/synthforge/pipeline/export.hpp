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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synthforge/core/manifest.hpp"
#include "synthforge/core/records.hpp"
#include "synthforge/image_agent/agent.hpp"

namespace synthforge::pipeline {

// One line of the train list: "<relative path> <class> [<class> ...]", with
// class names written in their whitespace-free slug form.
struct TrainListEntry {
  std::string image_path;
  std::vector<std::string> class_names;

  friend bool operator==(const TrainListEntry&, const TrainListEntry&) = default;
};

std::string format_train_list(const DatasetManifest& manifest);
std::vector<TrainListEntry> parse_train_list(const std::string& text);

// Copies every relabeled image from source_dir into out_dir/images/..., then
// writes out_dir/train_list.txt, out_dir/manifest.jsonl and
// out_dir/quarantine.jsonl (generations that never produced an image).
// Records must carry relabeler labels. An empty record set is an error.
DatasetManifest export_dataset(const std::vector<ImageRecord>& records, const ClassVocabulary& vocab,
                               const std::filesystem::path& source_dir, const std::filesystem::path& out_dir,
                               nlohmann::json generation_metadata,
                               const std::vector<image_agent::FailedGeneration>& quarantine = {});

}  // namespace synthforge::pipeline
