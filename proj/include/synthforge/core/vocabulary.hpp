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
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace synthforge {

using ClassId = int;

struct ClassEntry {
  ClassId id;
  std::string name;

  friend bool operator==(const ClassEntry&, const ClassEntry&) = default;
};

// Ordered class list. Ids follow construction order (never alphabetical) and
// are contiguous from 0; names are unique ignoring case.
class ClassVocabulary {
 public:
  ClassVocabulary(std::string dataset_name, const std::vector<std::string>& names);

  std::size_t size() const { return classes_.size(); }
  const std::string& dataset_name() const { return dataset_name_; }
  const std::vector<ClassEntry>& classes() const { return classes_; }
  const std::string& name(ClassId id) const;
  bool contains(ClassId id) const { return id >= 0 && static_cast<std::size_t>(id) < size(); }
  std::optional<ClassId> find(std::string_view name) const;
  std::vector<std::string> names() const;

  friend bool operator==(const ClassVocabulary&, const ClassVocabulary&) = default;

 private:
  std::string dataset_name_;
  std::vector<ClassEntry> classes_;
};

// Whitespace-free form of a class name used in paths and train lists
// ("dining table" -> "dining_table").
std::string class_slug(std::string_view name);

// Reads one class name per line ('#' starts a comment, blank lines skipped),
// or a JSON document {"dataset_name": ..., "classes": [...]} / [...] when the
// file ends in .json. The dataset name defaults to the file stem.
ClassVocabulary load_vocabulary(const std::filesystem::path& path);

void to_json(nlohmann::json& j, const ClassVocabulary& vocab);
ClassVocabulary vocabulary_from_json(const nlohmann::json& j);

}  // namespace synthforge
