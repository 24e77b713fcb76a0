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

#include "synthforge/core/vocabulary.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "synthforge/core/errors.hpp"

namespace synthforge {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

ClassVocabulary::ClassVocabulary(std::string dataset_name, const std::vector<std::string>& names)
    : dataset_name_(std::move(dataset_name)) {
  if (names.empty()) throw InvariantError("vocabulary is empty");
  std::set<std::string> seen;
  std::set<std::string> seen_slugs;
  classes_.reserve(names.size());
  for (const auto& raw : names) {
    const std::string name = trim(raw);
    if (name.empty()) throw InvariantError("vocabulary contains an empty class name");
    if (!seen.insert(lower(name)).second) {
      throw InvariantError("duplicate class name '" + name + "'");
    }
    if (!seen_slugs.insert(lower(class_slug(name))).second) {
      throw InvariantError("class name '" + name + "' collides with another after slugging");
    }
    classes_.push_back({static_cast<ClassId>(classes_.size()), name});
  }
}

const std::string& ClassVocabulary::name(ClassId id) const {
  if (!contains(id)) throw InvariantError("class id " + std::to_string(id) + " out of range");
  return classes_[static_cast<std::size_t>(id)].name;
}

std::optional<ClassId> ClassVocabulary::find(std::string_view name) const {
  const std::string key = lower(trim(name));
  for (const auto& c : classes_) {
    if (lower(c.name) == key) return c.id;
  }
  return std::nullopt;
}

std::vector<std::string> ClassVocabulary::names() const {
  std::vector<std::string> out;
  out.reserve(classes_.size());
  for (const auto& c : classes_) out.push_back(c.name);
  return out;
}

std::string class_slug(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  for (unsigned char ch : name) {
    out.push_back(std::isspace(ch) ? '_' : static_cast<char>(ch));
  }
  return out;
}

ClassVocabulary load_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open vocabulary file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  std::string dataset = path.stem().string();
  std::vector<std::string> names;
  if (path.extension() == ".json") {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("vocabulary " + path.string() + ": " + e.what());
    }
    const nlohmann::json* list = &doc;
    if (doc.is_object()) {
      dataset = doc.value("dataset_name", dataset);
      if (!doc.contains("classes")) throw ConfigError("vocabulary JSON lacks 'classes'");
      list = &doc.at("classes");
    }
    if (!list->is_array()) throw ConfigError("vocabulary 'classes' must be an array");
    for (const auto& item : *list) names.push_back(item.get<std::string>());
  } else {
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (!line.empty()) names.push_back(line);
    }
  }
  if (names.empty()) throw ConfigError("vocabulary file " + path.string() + " has no classes");
  try {
    return ClassVocabulary(dataset, names);
  } catch (const InvariantError& e) {
    throw ConfigError("vocabulary " + path.string() + ": " + e.what());
  }
}

void to_json(nlohmann::json& j, const ClassVocabulary& vocab) {
  j = nlohmann::json{{"dataset_name", vocab.dataset_name()}, {"classes", vocab.names()}};
}

ClassVocabulary vocabulary_from_json(const nlohmann::json& j) {
  return ClassVocabulary(j.at("dataset_name").get<std::string>(),
                         j.at("classes").get<std::vector<std::string>>());
}

}  // namespace synthforge
