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

#include "synthforge/pipeline/run_state.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

#include "synthforge/core/errors.hpp"
#include "synthforge/core/io.hpp"

namespace synthforge::pipeline {

using nlohmann::json;

const char* to_string(Stage stage) {
  switch (stage) {
    case Stage::prompts: return "prompts";
    case Stage::images: return "images";
    case Stage::dhigh: return "dhigh";
    case Stage::classifier: return "classifier";
    case Stage::relabel: return "relabel";
    case Stage::export_: return "export";
  }
  return "unknown";
}

Stage stage_from_string(const std::string& s) {
  for (const Stage stage : kStages)
    if (s == to_string(stage)) return stage;
  throw ConfigError("unknown stage '" + s + "'");
}

std::size_t stage_index(Stage stage) { return static_cast<std::size_t>(stage); }

bool RunState::is_complete(Stage stage) const {
  return std::find(completed.begin(), completed.end(), stage) != completed.end();
}

std::optional<Stage> RunState::next_stage() const {
  if (completed.size() >= kStages.size()) return std::nullopt;
  return kStages[completed.size()];
}

void RunState::mark_complete(Stage stage, json stage_counts) {
  const auto next = next_stage();
  if (!next || *next != stage) {
    throw StageError(to_string(stage), "stages must complete in order; next expected stage is " +
                                           std::string(next ? to_string(*next) : "none"));
  }
  completed.push_back(stage);
  counts[to_string(stage)] = std::move(stage_counts);
}

json to_json(const RunState& state) {
  json stages = json::array();
  for (const Stage s : state.completed) stages.push_back(to_string(s));
  return json{{"run_id", state.run_id},
              {"config_hash", state.config_hash},
              {"completed", stages},
              {"counts", state.counts},
              {"created_at", state.created_at}};
}

RunState run_state_from_json(const json& j) {
  RunState state;
  state.run_id = j.at("run_id").get<std::string>();
  state.config_hash = j.at("config_hash").get<std::string>();
  for (const auto& s : j.at("completed")) state.completed.push_back(stage_from_string(s.get<std::string>()));
  for (std::size_t i = 0; i < state.completed.size(); ++i) {
    if (state.completed[i] != kStages[i]) throw Error("run_state.json lists stages out of order");
  }
  state.counts = j.value("counts", json::object());
  state.created_at = j.value("created_at", std::string());
  return state;
}

void RunState::save(const std::filesystem::path& run_dir) const {
  write_file_atomic(run_dir / "run_state.json", to_json(*this).dump(2) + "\n");
}

std::optional<RunState> RunState::load(const std::filesystem::path& run_dir) {
  const auto path = run_dir / "run_state.json";
  if (!std::filesystem::exists(path)) return std::nullopt;
  try {
    return run_state_from_json(json::parse(read_file_text(path)));
  } catch (const json::exception& e) {
    throw Error("corrupt " + path.string() + ": " + e.what());
  }
}

RunLock::RunLock(const std::filesystem::path& run_dir) {
  std::filesystem::create_directories(run_dir);
  const auto path = run_dir / "run.lock";
  fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw Error("cannot open " + path.string() + ": " + std::strerror(errno));
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw Error("run directory " + run_dir.string() + " is in use by another process");
  }
}

RunLock::~RunLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

}  // namespace synthforge::pipeline
