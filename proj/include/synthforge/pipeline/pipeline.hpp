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
#include <memory>
#include <optional>

#include <nlohmann/json.hpp>

#include "synthforge/backends/factory.hpp"
#include "synthforge/core/config.hpp"
#include "synthforge/core/ids.hpp"
#include "synthforge/core/manifest.hpp"
#include "synthforge/core/vocabulary.hpp"
#include "synthforge/pipeline/run_state.hpp"

namespace synthforge::pipeline {

struct PipelineOptions {
  // Canned simulator answers; used by tests.
  backends::SimulatorFixtures fixtures;
  // Replaces the HTTP client for remote providers.
  std::shared_ptr<backends::HttpTransport> transport;
  // Timestamp source; defaults to a fixed clock when every provider is
  // simulated and to the wall clock otherwise.
  std::optional<Clock> clock;
};

// Owns one run directory: takes its lock, checks the stored config hash and
// advances the stage sequence. Every stage reads only what its predecessors
// persisted, so a resumed run does exactly what an uninterrupted one does.
class Pipeline {
 public:
  Pipeline(PipelineConfig config, std::filesystem::path run_dir, PipelineOptions options = {});
  ~Pipeline();

  const RunState& state() const { return state_; }
  const std::filesystem::path& run_dir() const { return run_dir_; }
  const ClassVocabulary& vocabulary() const { return vocabulary_; }

  // Runs `stage` if it is not complete yet. Its predecessor must be complete.
  void run_stage(Stage stage);
  // Runs every remaining stage up to and including `last` (all by default).
  void run_until(Stage last = Stage::export_);
  // Runs all remaining stages and returns the exported manifest; a completed
  // run just reloads it.
  DatasetManifest run();

  std::filesystem::path manifest_path() const { return run_dir_ / "export" / "manifest.jsonl"; }

 private:
  nlohmann::json stage_prompts();
  nlohmann::json stage_images();
  nlohmann::json stage_dhigh();
  nlohmann::json stage_classifier();
  nlohmann::json stage_relabel();
  nlohmann::json stage_export();
  backends::ProviderSet& providers();

  PipelineConfig config_;
  std::filesystem::path run_dir_;
  PipelineOptions options_;
  std::unique_ptr<RunLock> lock_;
  ClassVocabulary vocabulary_;
  Clock clock_;
  IdFactory ids_;
  RunState state_;
  std::optional<backends::ProviderSet> providers_;
};

// Per-class counters from whatever stages of the run have completed. Throws
// Error when run_dir holds no run.
nlohmann::json stats(const std::filesystem::path& run_dir);

}  // namespace synthforge::pipeline
