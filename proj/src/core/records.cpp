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

#include "synthforge/core/records.hpp"

#include "synthforge/core/errors.hpp"

namespace synthforge {

const char* to_string(PromptStatus status) {
  switch (status) {
    case PromptStatus::candidate: return "candidate";
    case PromptStatus::refined: return "refined";
    case PromptStatus::accepted: return "accepted";
    case PromptStatus::rejected_quality: return "rejected_quality";
    case PromptStatus::rejected_duplicate: return "rejected_duplicate";
  }
  return "candidate";
}

PromptStatus prompt_status_from_string(const std::string& s) {
  for (auto status : {PromptStatus::candidate, PromptStatus::refined, PromptStatus::accepted,
                      PromptStatus::rejected_quality, PromptStatus::rejected_duplicate}) {
    if (s == to_string(status)) return status;
  }
  throw InvariantError("unknown prompt status '" + s + "'");
}

void check_invariants(const PromptRecord& record) {
  if (record.text.empty()) throw InvariantError("prompt " + record.prompt_id + " has empty text");
  if (record.quality_score && (*record.quality_score < 0.0 || *record.quality_score > 1.0)) {
    throw InvariantError("prompt " + record.prompt_id + " has a quality score outside [0, 1]");
  }
  if (record.status == PromptStatus::accepted && (!record.embedding || !record.quality_score)) {
    throw InvariantError("accepted prompt " + record.prompt_id + " lacks embedding or score");
  }
}

const char* to_string(LabelSource source) {
  switch (source) {
    case LabelSource::none: return "none";
    case LabelSource::dual_filter: return "dual_filter";
    case LabelSource::relabeler: return "relabeler";
  }
  return "none";
}

LabelSource label_source_from_string(const std::string& s) {
  if (s == "none") return LabelSource::none;
  if (s == "dual_filter") return LabelSource::dual_filter;
  if (s == "relabeler") return LabelSource::relabeler;
  throw InvariantError("unknown label source '" + s + "'");
}

void to_json(nlohmann::json& j, const PromptRecord& r) {
  j = nlohmann::json{{"prompt_id", r.prompt_id},
                     {"class_id", r.class_id},
                     {"text", r.text},
                     {"status", to_string(r.status)},
                     {"judge_calls", r.judge_calls}};
  j["score"] = r.quality_score ? nlohmann::json(*r.quality_score) : nlohmann::json(nullptr);
  if (r.below_threshold) j["below_threshold"] = true;
}

void from_json(const nlohmann::json& j, PromptRecord& r) {
  r.prompt_id = j.at("prompt_id").get<std::string>();
  r.class_id = j.at("class_id").get<ClassId>();
  r.text = j.at("text").get<std::string>();
  r.status = prompt_status_from_string(j.at("status").get<std::string>());
  r.judge_calls = j.value("judge_calls", 0);
  r.below_threshold = j.value("below_threshold", false);
  r.embedding.reset();
  if (const auto it = j.find("score"); it != j.end() && !it->is_null()) {
    r.quality_score = it->get<double>();
  } else {
    r.quality_score.reset();
  }
}

void to_json(nlohmann::json& j, const ImageRecord& r) {
  j = nlohmann::json{{"image_id", r.image_id},
                     {"prompt_id", r.prompt_id},
                     {"prompt_class", r.prompt_class},
                     {"fan_index", r.fan_index},
                     {"file_path", r.file_path},
                     {"provider_seed", r.provider_seed},
                     {"pseudo_labels", r.pseudo_labels},
                     {"label_source", to_string(r.label_source)}};
}

void from_json(const nlohmann::json& j, ImageRecord& r) {
  r.image_id = j.at("image_id").get<std::string>();
  r.prompt_id = j.at("prompt_id").get<std::string>();
  r.prompt_class = j.at("prompt_class").get<ClassId>();
  r.fan_index = j.value("fan_index", 0);
  r.file_path = j.at("file_path").get<std::string>();
  r.provider_seed = j.at("provider_seed").get<std::int64_t>();
  r.pseudo_labels = j.value("pseudo_labels", std::set<ClassId>{});
  r.label_source = label_source_from_string(j.value("label_source", std::string("none")));
  r.embedding.reset();
}

}  // namespace synthforge
