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

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "synthforge/core/config.hpp"
#include "synthforge/core/errors.hpp"
#include "synthforge/core/manifest.hpp"
#include "synthforge/pipeline/pipeline.hpp"

namespace {

namespace fs = std::filesystem;
using synthforge::pipeline::Stage;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitConfig = 2;
constexpr int kExitProvider = 3;
constexpr int kExitStage = 4;

struct GlobalOptions {
  std::string config;
  std::string run_dir;
  std::optional<std::uint64_t> seed;
  std::string provider_mode;
  std::string log_level = "info";
};

synthforge::PipelineConfig load(const GlobalOptions& g) {
  if (g.config.empty()) throw synthforge::ConfigError("--config is required for this command");
  auto config = synthforge::load_config(g.config);
  if (g.seed) config.apply_seed(*g.seed);
  if (!g.provider_mode.empty()) config.apply_provider_mode(g.provider_mode);
  config.validate();
  return config;
}

fs::path resolve_run_dir(const GlobalOptions& g, const synthforge::PipelineConfig* config) {
  if (!g.run_dir.empty()) return g.run_dir;
  if (config && !config->output_dir.empty()) return config->output_dir;
  throw synthforge::ConfigError("no run directory: pass --run-dir or set output_dir in the config");
}

int run_stage_command(const GlobalOptions& g, std::optional<Stage> stage) {
  auto config = load(g);
  const auto dir = resolve_run_dir(g, &config);
  synthforge::pipeline::Pipeline pipeline(std::move(config), dir);
  if (stage) {
    pipeline.run_until(*stage);
    std::cout << synthforge::pipeline::to_json(pipeline.state()).dump(2) << "\n";
  } else {
    const auto manifest = pipeline.run();
    synthforge::write_manifest(std::cout, manifest);
  }
  return kExitOk;
}

int stats_command(const GlobalOptions& g) {
  std::optional<synthforge::PipelineConfig> config;
  if (!g.config.empty()) config = load(g);
  const auto dir = resolve_run_dir(g, config ? &*config : nullptr);
  std::cout << synthforge::pipeline::stats(dir).dump(2) << "\n";
  return kExitOk;
}

int validate_command(const GlobalOptions& g, const std::string& manifest_arg) {
  fs::path manifest_path = manifest_arg;
  if (manifest_path.empty()) {
    std::optional<synthforge::PipelineConfig> config;
    if (!g.config.empty()) config = load(g);
    manifest_path = resolve_run_dir(g, config ? &*config : nullptr) / "export" / "manifest.jsonl";
  }
  const auto manifest = synthforge::load_manifest(manifest_path);
  const auto report = synthforge::validate_manifest(manifest, manifest_path.parent_path());
  for (const auto& v : report.violations) {
    std::cout << (v.entry >= 0 ? "entry " + std::to_string(v.entry) : std::string("manifest")) << ": " << v.message
              << "\n";
  }
  std::cout << manifest.entries.size() << " entries, " << report.violations.size() << " violations\n";
  return report.ok() ? kExitOk : kExitInvalid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthforge: build a weakly labelled synthetic image dataset from a class vocabulary"};
  app.require_subcommand(1);
  GlobalOptions g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config, "Pipeline configuration (JSON)");
  app.add_option("--run-dir", g.run_dir, "Run directory (defaults to output_dir from the config)");
  auto* seed_opt = app.add_option("--seed", seed, "Override the random seed");
  app.add_option("--provider-mode", g.provider_mode, "Provider mode")->check(CLI::IsMember({"remote", "simulated"}));
  app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error or off");

  struct StageCommand {
    const char* name;
    const char* help;
    Stage stage;
  };
  const StageCommand stage_commands[] = {
      {"prompts", "Generate, judge and deduplicate prompts", Stage::prompts},
      {"generate", "Synthesize images from accepted prompts", Stage::images},
      {"dhigh", "Apply the text and image gates to build the high-confidence set", Stage::dhigh},
      {"train-relabeler", "Train the patch classifier on the high-confidence set", Stage::classifier},
      {"relabel", "Relabel every synthesized image with the classifier", Stage::relabel},
      {"export", "Write the dataset: images, train list and manifest", Stage::export_},
  };
  std::optional<Stage> selected_stage;
  bool run_all = false;
  for (const auto& sc : stage_commands) {
    app.add_subcommand(sc.name, sc.help)->callback([&selected_stage, stage = sc.stage] { selected_stage = stage; });
  }
  app.add_subcommand("run", "Run every remaining stage and print the manifest")->callback([&] { run_all = true; });
  auto* stats_cmd = app.add_subcommand("stats", "Per-class counters for a run");
  auto* validate_cmd = app.add_subcommand("validate", "Check an exported manifest");
  std::string manifest_arg;
  validate_cmd->add_option("manifest", manifest_arg, "Manifest file (defaults to <run-dir>/export/manifest.jsonl)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  if (*seed_opt) g.seed = seed;

  auto logger = spdlog::stderr_color_mt("synthforge");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(g.log_level));

  try {
    if (run_all) return run_stage_command(g, std::nullopt);
    if (selected_stage) return run_stage_command(g, selected_stage);
    if (stats_cmd->parsed()) return stats_command(g);
    if (validate_cmd->parsed()) return validate_command(g, manifest_arg);
  } catch (const synthforge::ConfigError& e) {
    spdlog::error("configuration error: {}", e.what());
    return kExitConfig;
  } catch (const synthforge::ProviderExhaustedError& e) {
    spdlog::error("provider exhausted: {}", e.what());
    return kExitProvider;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitStage;
  }
  return kExitConfig;
}
