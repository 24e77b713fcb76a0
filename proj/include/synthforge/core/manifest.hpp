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
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synthforge/core/vocabulary.hpp"

namespace synthforge {

inline constexpr const char* kManifestSchema = "synthforge/1";

struct ManifestEntry {
  std::string image_path;       // relative to the manifest's directory
  std::vector<ClassId> labels;  // ascending

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

// The exported dataset: image paths with image-level label sets, plus the
// vocabulary and a snapshot of how the data was generated.
struct DatasetManifest {
  ClassVocabulary vocabulary;
  std::vector<ManifestEntry> entries;
  nlohmann::json generation_metadata = nlohmann::json::object();

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

// Line-delimited: a header record carrying the schema tag, vocabulary and
// metadata, then one record per image.
void write_manifest(std::ostream& out, const DatasetManifest& manifest);
DatasetManifest read_manifest(std::istream& in);
void save_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);
DatasetManifest load_manifest(const std::filesystem::path& path);

struct Violation {
  std::ptrdiff_t entry = -1;  // -1 for manifest-level problems
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }

  friend bool operator==(const ValidationReport&, const ValidationReport&) = default;
};

// Lists every invariant violation; image paths are resolved against base_dir.
// Never throws for bad data.
ValidationReport validate_manifest(const DatasetManifest& manifest,
                                   const std::filesystem::path& base_dir);

}  // namespace synthforge
