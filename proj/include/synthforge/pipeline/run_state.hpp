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

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace synthforge::pipeline {

enum class Stage { prompts, images, dhigh, classifier, relabel, export_ };

inline constexpr std::array<Stage, 6> kStages = {Stage::prompts,    Stage::images,  Stage::dhigh,
                                                 Stage::classifier, Stage::relabel, Stage::export_};

const char* to_string(Stage stage);
Stage stage_from_string(const std::string& s);
std::size_t stage_index(Stage stage);

// Progress of one run directory, persisted as run_state.json. Stages complete
// strictly in order.
struct RunState {
  std::string run_id;
  std::string config_hash;
  std::vector<Stage> completed;
  nlohmann::json counts = nlohmann::json::object();  // stage name -> counters
  std::string created_at;

  bool is_complete(Stage stage) const;
  std::optional<Stage> next_stage() const;
  // Throws StageError unless `stage` is the next stage in order.
  void mark_complete(Stage stage, nlohmann::json stage_counts);

  void save(const std::filesystem::path& run_dir) const;
  static std::optional<RunState> load(const std::filesystem::path& run_dir);
};

nlohmann::json to_json(const RunState& state);
RunState run_state_from_json(const nlohmann::json& j);

// Exclusive advisory lock on <run_dir>/run.lock for the lifetime of the
// object. Throws Error when another process holds it.
class RunLock {
 public:
  explicit RunLock(const std::filesystem::path& run_dir);
  ~RunLock();
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  int fd_ = -1;
};

}  // namespace synthforge::pipeline
