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

#include "synthforge/core/manifest.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "synthforge/core/errors.hpp"
#include "synthforge/core/io.hpp"

namespace synthforge {

namespace fs = std::filesystem;

void write_manifest(std::ostream& out, const DatasetManifest& manifest) {
  nlohmann::json header{{"schema", kManifestSchema},
                        {"record", "header"},
                        {"vocabulary", manifest.vocabulary},
                        {"generation_metadata", manifest.generation_metadata}};
  out << header.dump() << '\n';
  for (const auto& e : manifest.entries) {
    nlohmann::json names = nlohmann::json::array();
    for (ClassId id : e.labels) {
      names.push_back(manifest.vocabulary.contains(id) ? manifest.vocabulary.name(id) : "");
    }
    nlohmann::json record{{"record", "image"},
                          {"image_path", e.image_path},
                          {"labels", e.labels},
                          {"label_names", names}};
    out << record.dump() << '\n';
  }
}

DatasetManifest read_manifest(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<DatasetManifest> manifest;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!manifest) {
      if (j.value("schema", std::string()) != kManifestSchema) {
        throw Error("manifest header missing schema tag '" + std::string(kManifestSchema) + "'");
      }
      manifest.emplace(DatasetManifest{vocabulary_from_json(j.at("vocabulary")), {},
                                       j.value("generation_metadata", nlohmann::json::object())});
      continue;
    }
    manifest->entries.push_back(
        {j.at("image_path").get<std::string>(), j.at("labels").get<std::vector<ClassId>>()});
  }
  if (!manifest) throw Error("manifest is empty");
  return std::move(*manifest);
}

void save_manifest(const fs::path& path, const DatasetManifest& manifest) {
  std::ostringstream out;
  write_manifest(out, manifest);
  write_file_atomic(path, out.str());
}

DatasetManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path.string());
  return read_manifest(in);
}

ValidationReport validate_manifest(const DatasetManifest& manifest, const fs::path& base_dir) {
  ValidationReport report;
  if (manifest.entries.empty()) report.violations.push_back({-1, "manifest has no entries"});
  std::set<std::string> seen;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const auto& e = manifest.entries[i];
    const auto idx = static_cast<std::ptrdiff_t>(i);
    if (e.image_path.empty()) {
      report.violations.push_back({idx, "entry has an empty image path"});
    } else {
      std::error_code ec;
      if (!fs::is_regular_file(base_dir / e.image_path, ec)) {
        report.violations.push_back({idx, "image file does not exist: " + e.image_path});
      }
      if (!seen.insert(e.image_path).second) {
        report.violations.push_back({idx, "duplicate image path: " + e.image_path});
      }
    }
    if (e.labels.empty()) {
      report.violations.push_back({idx, "empty label set for " + e.image_path});
    }
    std::set<ClassId> distinct;
    for (ClassId id : e.labels) {
      if (!manifest.vocabulary.contains(id)) {
        report.violations.push_back(
            {idx, "label id " + std::to_string(id) + " not in vocabulary for " + e.image_path});
      }
      if (!distinct.insert(id).second) {
        report.violations.push_back(
            {idx, "label id " + std::to_string(id) + " repeated for " + e.image_path});
      }
    }
  }
  return report;
}

}  // namespace synthforge
