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

#include "synthforge/pipeline/pipeline.hpp"

#include <algorithm>
#include <map>

#include <spdlog/spdlog.h>

#include "synthforge/core/errors.hpp"
#include "synthforge/core/io.hpp"
#include "synthforge/core/parallel.hpp"
#include "synthforge/image_agent/agent.hpp"
#include "synthforge/pipeline/export.hpp"
#include "synthforge/prompt_agent/agent.hpp"
#include "synthforge/relabeler/classifier.hpp"
#include "synthforge/relabeler/relabel.hpp"

namespace synthforge::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool all_simulated(const PipelineConfig& c) {
  return c.providers.text.simulated() && c.providers.image.simulated() && c.providers.embedding.simulated();
}

template <typename T>
std::vector<T> read_records(const fs::path& path) {
  std::vector<T> out;
  for (const auto& j : read_jsonl(path)) out.push_back(j.get<T>());
  return out;
}

template <typename T>
void write_records(const fs::path& path, const std::vector<T>& records) {
  std::vector<json> lines;
  lines.reserve(records.size());
  for (const auto& r : records) lines.emplace_back(r);
  write_jsonl_atomic(path, lines);
}

relabeler::PatchGridConfig training_grid(const PipelineConfig& c) {
  return {c.relabeler.input_side, c.relabeler.patch_side, c.providers.embedding.embedding_dim};
}

}  // namespace

Pipeline::Pipeline(PipelineConfig config, fs::path run_dir, PipelineOptions options)
    : config_(std::move(config)),
      run_dir_(std::move(run_dir)),
      options_(std::move(options)),
      lock_(std::make_unique<RunLock>(run_dir_)),
      vocabulary_(load_vocabulary(config_.vocabulary_path)),
      clock_(options_.clock ? *options_.clock : (all_simulated(config_) ? fixed_clock() : wall_clock())),
      ids_(config_.random_seed, clock_) {
  config_.validate();
  const std::string hash = config_.hash();
  if (auto existing = RunState::load(run_dir_)) {
    if (existing->config_hash != hash) {
      throw ConfigError("run directory " + run_dir_.string() +
                        " was created with a different configuration; refusing to resume");
    }
    state_ = std::move(*existing);
  } else {
    state_.run_id = ids_.make("run", 0);
    state_.config_hash = hash;
    state_.created_at = format_iso8601(clock_());
    json vocab;
    to_json(vocab, vocabulary_);
    write_file_atomic(run_dir_ / "vocabulary.json", vocab.dump(2) + "\n");
    write_file_atomic(run_dir_ / "config.json", to_json(config_).dump(2) + "\n");
    state_.save(run_dir_);
  }
}

Pipeline::~Pipeline() = default;

backends::ProviderSet& Pipeline::providers() {
  if (!providers_) {
    backends::ProviderFactoryOptions opts;
    opts.concepts = vocabulary_.names();
    opts.fixtures = options_.fixtures;
    opts.transport = options_.transport;
    if (config_.providers.cache) opts.cache_root = run_dir_ / "cache";
    providers_ = backends::make_providers(config_.providers, opts);
  }
  return *providers_;
}

void Pipeline::run_stage(Stage stage) {
  if (state_.is_complete(stage)) return;
  const auto next = state_.next_stage();
  if (!next || *next != stage) {
    throw StageError(to_string(stage), std::string("its predecessor has not completed; next stage is ") +
                                           (next ? to_string(*next) : "none"));
  }
  spdlog::info("stage {}: starting", to_string(stage));
  json counts;
  try {
    switch (stage) {
      case Stage::prompts: counts = stage_prompts(); break;
      case Stage::images: counts = stage_images(); break;
      case Stage::dhigh: counts = stage_dhigh(); break;
      case Stage::classifier: counts = stage_classifier(); break;
      case Stage::relabel: counts = stage_relabel(); break;
      case Stage::export_: counts = stage_export(); break;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const ProviderExhaustedError& e) {
    spdlog::error("stage {} stopped: {}", to_string(stage), e.what());
    throw;
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(to_string(stage), e.what());
  }
  state_.mark_complete(stage, counts);
  state_.save(run_dir_);
  spdlog::info("stage {}: done {}", to_string(stage), counts.dump());
}

void Pipeline::run_until(Stage last) {
  for (const Stage stage : kStages) {
    run_stage(stage);
    if (stage == last) break;
  }
}

DatasetManifest Pipeline::run() {
  run_until(Stage::export_);
  return load_manifest(manifest_path());
}

json Pipeline::stage_prompts() {
  const fs::path dir = run_dir_ / "prompts";
  const fs::path progress_path = dir / "progress.json";
  const fs::path memory_path = dir / "memory.idx";
  auto& set = providers();

  // Classes finished by an earlier, interrupted attempt are kept.
  std::size_t classes_done = 0;
  std::vector<PromptRecord> examined;
  std::vector<PromptRecord> accepted;
  std::optional<prompt_agent::MemoryBuffer> memory;
  if (fs::exists(progress_path) && fs::exists(memory_path)) {
    classes_done = json::parse(read_file_text(progress_path)).at("classes_done").get<std::size_t>();
    examined = read_records<PromptRecord>(dir / "candidates.jsonl");
    accepted = read_records<PromptRecord>(dir / "accepted.jsonl");
    memory.emplace(prompt_agent::MemoryBuffer::load(memory_path));
    spdlog::info("stage prompts: resuming after {} of {} classes", classes_done, vocabulary_.size());
  } else {
    fs::remove_all(dir);
    memory.emplace(config_.providers.embedding.embedding_dim, config_.prompts.index_mode);
  }

  prompt_agent::AgentContext ctx{
      vocabulary_, *set.text, *set.embedder, ids_,
      prompt_agent::RefinementPolicy::from_settings(config_.prompts,
                                                    prompt_agent::load_templates(config_.prompts.templates_dir)),
      config_.max_concurrency};

  for (std::size_t c = classes_done; c < vocabulary_.size(); ++c) {
    auto result = prompt_agent::run_prompt_agent(static_cast<ClassId>(c), config_.prompts, ctx, *memory);
    spdlog::info("class '{}': {} accepted of {} examined", vocabulary_.name(static_cast<ClassId>(c)),
                 result.accepted.size(), result.examined.size());
    for (auto& r : result.examined) examined.push_back(std::move(r));
    for (auto& r : result.accepted) accepted.push_back(std::move(r));
    write_records(dir / "candidates.jsonl", examined);
    write_records(dir / "accepted.jsonl", accepted);
    memory->save(memory_path);
    write_file_atomic(progress_path, json{{"classes_done", c + 1}}.dump() + "\n");
  }
  return json{{"candidates", examined.size()}, {"accepted", accepted.size()}};
}

json Pipeline::stage_images() {
  auto prompts = read_records<PromptRecord>(run_dir_ / "prompts" / "accepted.jsonl");
  auto& set = providers();
  image_agent::ImageAgentContext ctx{vocabulary_, *set.image, *set.embedder, ids_, config_.images,
                                     config_.random_seed, run_dir_, config_.max_concurrency};
  auto batch = image_agent::synthesize_all(prompts, ctx);
  write_records(run_dir_ / "images.jsonl", batch.images);
  write_records(run_dir_ / "failures.jsonl", batch.failures);
  return json{{"synthesized", batch.images.size()}, {"failed", batch.failures.size()}};
}

json Pipeline::stage_dhigh() {
  auto prompts = read_records<PromptRecord>(run_dir_ / "prompts" / "accepted.jsonl");
  auto images = read_records<ImageRecord>(run_dir_ / "images.jsonl");
  auto& set = providers();
  image_agent::ImageAgentContext ctx{vocabulary_, *set.image, *set.embedder, ids_, config_.images,
                                     config_.random_seed, run_dir_, config_.max_concurrency};
  auto result = image_agent::dual_filter(prompts, std::move(images), ctx);
  write_records(run_dir_ / "dhigh.jsonl", result.pairs);
  std::size_t labelled = 0;
  for (const auto& img : result.images) labelled += img.pseudo_labels.empty() ? 0 : 1;
  return json{{"pairs", result.pairs.size()}, {"images_with_pairs", labelled}};
}

json Pipeline::stage_classifier() {
  const auto images = read_records<ImageRecord>(run_dir_ / "images.jsonl");
  const auto pairs = read_records<image_agent::HighConfidencePair>(run_dir_ / "dhigh.jsonl");
  if (pairs.empty()) throw StageError("classifier", "the high-confidence set is empty; nothing to train on");

  std::map<std::string, std::set<ClassId>> targets;
  for (const auto& p : pairs) targets[p.image_id].insert(p.class_id);
  std::vector<const ImageRecord*> chosen;
  for (const auto& img : images)
    if (targets.count(img.image_id)) chosen.push_back(&img);

  auto& set = providers();
  const auto grid = training_grid(config_);
  std::vector<relabeler::TrainingSample> samples(chosen.size());
  parallel_for(chosen.size(), config_.max_concurrency, [&](std::size_t i) {
    samples[i].f = relabeler::patch_embed(*chosen[i], grid, *set.embedder, run_dir_);
    samples[i].y = relabeler::target_from_labels(targets.at(chosen[i]->image_id), vocabulary_.size());
  });

  relabeler::TrainConfig tc;
  tc.batch_size = config_.relabeler.batch_size;
  tc.epochs = config_.relabeler.epochs;
  tc.learning_rate = config_.relabeler.learning_rate;
  tc.warmup_epochs = config_.relabeler.warmup_epochs;
  tc.decayed_learning_rate = config_.relabeler.decayed_learning_rate;
  tc.holdout_fraction = config_.relabeler.holdout_fraction;
  tc.threshold = config_.relabeler.relabel_threshold;
  tc.head = relabeler::head_from_string(config_.relabeler.head);
  tc.seed = config_.random_seed;
  auto result = relabeler::train(samples, grid, vocabulary_.size(), tc);

  std::vector<json> log;
  for (const auto& e : result.log) log.emplace_back(e);
  write_jsonl_atomic(run_dir_ / "classifier" / "train_log.jsonl", log);
  result.classifier.save(run_dir_ / "classifier" / "checkpoint.bin");
  const auto& best = result.log.at(static_cast<std::size_t>(result.best_epoch));
  return json{{"samples", samples.size()},
              {"validation_samples", result.validation_indices.size()},
              {"best_epoch", result.best_epoch},
              {"validation_loss", best.validation_loss},
              {"validation_subset_accuracy", best.validation_subset_accuracy}};
}

json Pipeline::stage_relabel() {
  auto images = read_records<ImageRecord>(run_dir_ / "images.jsonl");
  const auto classifier = relabeler::LinearClassifier::load(run_dir_ / "classifier" / "checkpoint.bin");
  auto& set = providers();
  const auto grid =
      relabeler::inference_grid(classifier.grid(), config_.relabeler.inference_side, set.embedder->descriptor());
  parallel_for(images.size(), config_.max_concurrency, [&](std::size_t i) {
    images[i].pseudo_labels =
        relabeler::relabel(images[i], classifier, grid, *set.embedder, config_.relabeler.relabel_threshold, run_dir_);
    images[i].label_source = LabelSource::relabeler;
  });
  write_records(run_dir_ / "relabel.jsonl", images);
  std::size_t labels = 0;
  for (const auto& img : images) labels += img.pseudo_labels.size();
  return json{{"images", images.size()}, {"labels", labels}, {"inference_side", grid.input_side}};
}

json Pipeline::stage_export() {
  const auto images = read_records<ImageRecord>(run_dir_ / "relabel.jsonl");
  const auto failures = read_records<image_agent::FailedGeneration>(run_dir_ / "failures.jsonl");
  json metadata{{"run_id", state_.run_id},
                {"config_hash", state_.config_hash},
                {"config", config_.outputs_json()},
                {"providers",
                 {{"text_generation", config_.providers.text.identity()},
                  {"image_generation", config_.providers.image.identity()},
                  {"embedding", config_.providers.embedding.identity()}}},
                {"created_at", state_.created_at},
                {"exported_at", format_iso8601(clock_())}};
  const auto manifest =
      export_dataset(images, vocabulary_, run_dir_, run_dir_ / "export", std::move(metadata), failures);
  const auto report = validate_manifest(manifest, run_dir_ / "export");
  if (!report.ok()) {
    throw StageError("export", "exported manifest failed validation: " + report.violations.front().message);
  }
  return json{{"entries", manifest.entries.size()}, {"quarantined", failures.size()}};
}

json stats(const fs::path& run_dir) {
  const auto state = RunState::load(run_dir);
  if (!state) throw Error("no run found in " + run_dir.string());
  const auto vocabulary = vocabulary_from_json(json::parse(read_file_text(run_dir / "vocabulary.json")));
  const std::size_t n = vocabulary.size();

  struct Counts {
    std::size_t candidates = 0, accepted = 0, synthesized = 0, failed = 0, pairs = 0, before = 0, after = 0;
  };
  std::vector<Counts> per_class(n);
  std::map<std::string, ClassId> prompt_class;

  auto exists = [&](const fs::path& p) { return fs::exists(run_dir / p); };
  if (state->is_complete(Stage::prompts)) {
    for (const auto& r : read_records<PromptRecord>(run_dir / "prompts" / "candidates.jsonl")) {
      ++per_class.at(static_cast<std::size_t>(r.class_id)).candidates;
      prompt_class[r.prompt_id] = r.class_id;
    }
    for (const auto& r : read_records<PromptRecord>(run_dir / "prompts" / "accepted.jsonl")) {
      ++per_class.at(static_cast<std::size_t>(r.class_id)).accepted;
    }
  }
  if (state->is_complete(Stage::images)) {
    for (const auto& r : read_records<ImageRecord>(run_dir / "images.jsonl")) {
      ++per_class.at(static_cast<std::size_t>(r.prompt_class)).synthesized;
    }
    if (exists("failures.jsonl")) {
      for (const auto& f : read_records<image_agent::FailedGeneration>(run_dir / "failures.jsonl")) {
        if (const auto it = prompt_class.find(f.prompt_id); it != prompt_class.end()) {
          ++per_class.at(static_cast<std::size_t>(it->second)).failed;
        }
      }
    }
  }
  if (state->is_complete(Stage::dhigh)) {
    for (const auto& p : read_records<image_agent::HighConfidencePair>(run_dir / "dhigh.jsonl")) {
      ++per_class.at(static_cast<std::size_t>(p.class_id)).pairs;
      ++per_class.at(static_cast<std::size_t>(p.class_id)).before;
    }
  }
  if (state->is_complete(Stage::relabel)) {
    for (const auto& r : read_records<ImageRecord>(run_dir / "relabel.jsonl")) {
      for (const ClassId c : r.pseudo_labels) ++per_class.at(static_cast<std::size_t>(c)).after;
    }
  }

  json classes = json::array();
  for (std::size_t c = 0; c < n; ++c) {
    const auto& k = per_class[c];
    classes.push_back({{"class_id", c},
                       {"name", vocabulary.name(static_cast<ClassId>(c))},
                       {"prompts_generated", k.candidates},
                       {"prompts_accepted", k.accepted},
                       {"acceptance_rate", k.candidates ? static_cast<double>(k.accepted) / k.candidates : 0.0},
                       {"images_synthesized", k.synthesized},
                       {"images_failed", k.failed},
                       {"dhigh_pairs", k.pairs},
                       {"labels_before_relabel", k.before},
                       {"labels_after_relabel", k.after}});
  }
  json completed = json::array();
  for (const Stage s : state->completed) completed.push_back(to_string(s));
  return json{{"run_id", state->run_id}, {"completed", completed}, {"classes", classes}};
}

}  // namespace synthforge::pipeline
