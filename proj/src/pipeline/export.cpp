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

#include "synthforge/pipeline/export.hpp"

#include <sstream>

#include "synthforge/core/errors.hpp"
#include "synthforge/core/io.hpp"

namespace synthforge::pipeline {

namespace fs = std::filesystem;

std::string format_train_list(const DatasetManifest& manifest) {
  std::string out;
  for (const auto& entry : manifest.entries) {
    out += entry.image_path;
    for (const ClassId c : entry.labels) {
      out += ' ';
      out += class_slug(manifest.vocabulary.name(c));
    }
    out += '\n';
  }
  return out;
}

std::vector<TrainListEntry> parse_train_list(const std::string& text) {
  std::vector<TrainListEntry> entries;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    std::istringstream fields(line);
    TrainListEntry entry;
    if (!(fields >> entry.image_path)) continue;
    for (std::string name; fields >> name;) entry.class_names.push_back(name);
    entries.push_back(std::move(entry));
  }
  return entries;
}

DatasetManifest export_dataset(const std::vector<ImageRecord>& records, const ClassVocabulary& vocab,
                               const fs::path& source_dir, const fs::path& out_dir,
                               nlohmann::json generation_metadata,
                               const std::vector<image_agent::FailedGeneration>& quarantine) {
  if (records.empty()) throw StageError("export", "no relabeled images to export");
  DatasetManifest manifest{vocab, {}, std::move(generation_metadata)};
  for (const auto& r : records) {
    if (r.label_source != LabelSource::relabeler) {
      throw InvariantError("image " + r.image_id + " has not been relabeled");
    }
    if (r.pseudo_labels.empty()) throw InvariantError("image " + r.image_id + " carries no labels");
    for (const ClassId c : r.pseudo_labels) {
      if (!vocab.contains(c)) throw InvariantError("image " + r.image_id + " has out-of-vocabulary label");
    }
    const fs::path target = out_dir / r.file_path;
    fs::create_directories(target.parent_path());
    fs::copy_file(source_dir / r.file_path, target, fs::copy_options::overwrite_existing);
    manifest.entries.push_back({r.file_path, std::vector<ClassId>(r.pseudo_labels.begin(), r.pseudo_labels.end())});
  }

  std::vector<nlohmann::json> failed;
  for (const auto& f : quarantine) failed.emplace_back(f);
  write_jsonl_atomic(out_dir / "quarantine.jsonl", failed);
  write_file_atomic(out_dir / "train_list.txt", format_train_list(manifest));
  save_manifest(out_dir / "manifest.jsonl", manifest);
  return manifest;
}

}  // namespace synthforge::pipeline
