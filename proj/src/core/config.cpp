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

#include "synthforge/core/config.hpp"

#include <fstream>

#include "synthforge/core/errors.hpp"
#include "synthforge/core/io.hpp"
#include "synthforge/core/sha256.hpp"

namespace synthforge {

namespace fs = std::filesystem;
using backends::ProviderDescriptor;
using backends::ProviderKind;
using nlohmann::json;

namespace {

void require_unit_interval(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(name) + " must be in [0, 1]");
}

void require_positive(long v, const char* name) {
  if (v < 1) throw ConfigError(std::string(name) + " must be a positive integer");
}

json descriptor_identity_json(const ProviderDescriptor& d) {
  json j{{"endpoint", d.endpoint},
         {"model_name", d.model_name},
         {"adapter", d.adapter},
         {"supports_inference_resize", d.supports_inference_resize}};
  if (d.kind == ProviderKind::embedding) j["embedding_dim"] = d.embedding_dim;
  if (d.seed) j["seed"] = *d.seed;
  return j;
}

}  // namespace

PipelineConfig::PipelineConfig() {
  providers.text.kind = ProviderKind::text_generation;
  providers.image.kind = ProviderKind::image_generation;
  providers.embedding.kind = ProviderKind::embedding;
  providers.embedding.embedding_dim = 64;
}

void PipelineConfig::validate() const {
  require_unit_interval(prompts.epsilon, "epsilon");
  require_unit_interval(prompts.delta, "delta");
  require_unit_interval(images.gamma_text, "gamma_text");
  require_unit_interval(relabeler.relabel_threshold, "relabel_threshold");
  if (prompts.prompts_per_class < 0) throw ConfigError("prompts_per_class must be >= 0");
  require_positive(prompts.max_refine_iterations, "max_refine_iterations");
  require_positive(prompts.candidate_budget_factor, "candidate_budget_factor");
  require_positive(prompts.max_generation_attempts, "max_generation_attempts");
  require_positive(prompts.max_judge_attempts, "max_judge_attempts");
  require_positive(images.top_n, "top_n");
  require_positive(images.fan_out, "fan_out");
  if (images.max_retries < 0) throw ConfigError("max_retries must be >= 0");
  require_positive(images.image_side, "image_side");
  require_positive(relabeler.input_side, "input_side");
  require_positive(relabeler.patch_side, "patch_side");
  if (relabeler.input_side % relabeler.patch_side != 0) {
    throw ConfigError("input_side must be a multiple of patch_side");
  }
  if (relabeler.inference_side % relabeler.patch_side != 0) {
    throw ConfigError("inference_side must be a multiple of patch_side");
  }
  if (relabeler.head != "softmax" && relabeler.head != "sigmoid") {
    throw ConfigError("relabeler head must be 'softmax' or 'sigmoid'");
  }
  require_positive(relabeler.batch_size, "batch_size");
  if (relabeler.epochs < 0) throw ConfigError("epochs must be >= 0");
  if (relabeler.warmup_epochs < 0) throw ConfigError("warmup_epochs must be >= 0");
  if (!(relabeler.learning_rate > 0) || !(relabeler.decayed_learning_rate > 0)) {
    throw ConfigError("learning rates must be positive");
  }
  if (!(relabeler.holdout_fraction >= 0.0 && relabeler.holdout_fraction < 1.0)) {
    throw ConfigError("holdout_fraction must be in [0, 1)");
  }
  require_positive(max_concurrency, "max_concurrency");
  if (providers.mode != "simulated" && providers.mode != "remote") {
    throw ConfigError("provider mode must be 'simulated' or 'remote'");
  }
  providers.text.validate();
  providers.image.validate();
  providers.embedding.validate();
  if (providers.mode == "remote" &&
      (providers.text.simulated() || providers.image.simulated() || providers.embedding.simulated())) {
    throw ConfigError("remote provider mode needs an endpoint for every provider");
  }
}

void PipelineConfig::apply_provider_mode(const std::string& mode) {
  if (mode != "simulated" && mode != "remote") throw ConfigError("unknown provider mode '" + mode + "'");
  providers.mode = mode;
  for (auto* d : {&providers.text, &providers.image, &providers.embedding}) {
    if (mode == "simulated") {
      d->endpoint = "simulated";
      if (!d->seed) d->seed = random_seed;
    } else if (d->simulated()) {
      throw ConfigError(std::string("remote mode needs an endpoint URL for the ") + backends::to_string(d->kind) +
                        " provider");
    }
  }
}

void PipelineConfig::apply_seed(std::uint64_t seed) {
  random_seed = seed;
  for (auto* d : {&providers.text, &providers.image, &providers.embedding}) {
    if (d->simulated()) d->seed = seed;
  }
}

json PipelineConfig::outputs_json() const {
  json j = to_json(*this);
  j.erase("output_dir");
  j.erase("max_concurrency");
  j["providers"].erase("cache");
  j["providers"]["text_generation"] = descriptor_identity_json(providers.text);
  j["providers"]["image_generation"] = descriptor_identity_json(providers.image);
  j["providers"]["embedding"] = descriptor_identity_json(providers.embedding);
  std::error_code ec;
  if (fs::is_regular_file(vocabulary_path, ec)) {
    j["vocabulary_sha256"] = sha256_hex(read_file_text(vocabulary_path));
  }
  j.erase("vocabulary");
  // Template files count by content, not by where they live.
  auto& pa = j["prompt_agent"];
  pa.erase("templates_dir");
  if (!prompts.templates_dir.empty()) {
    std::string contents;
    for (const char* name : {"generate.txt", "judge.txt"}) {
      const fs::path p = fs::path(prompts.templates_dir) / name;
      if (fs::is_regular_file(p, ec)) contents += std::string(name) + "\n" + read_file_text(p);
    }
    pa["templates_sha256"] = sha256_hex(contents);
  }
  return j;
}

std::string PipelineConfig::hash() const { return sha256_hex(outputs_json().dump()); }

json to_json(const PipelineConfig& c) {
  return json{
      {"vocabulary", c.vocabulary_path.string()},
      {"output_dir", c.output_dir.string()},
      {"seed", c.random_seed},
      {"max_concurrency", c.max_concurrency},
      {"prompt_agent",
       {{"epsilon", c.prompts.epsilon},
        {"delta", c.prompts.delta},
        {"prompts_per_class", c.prompts.prompts_per_class},
        {"max_refine_iterations", c.prompts.max_refine_iterations},
        {"candidate_budget_factor", c.prompts.candidate_budget_factor},
        {"max_generation_attempts", c.prompts.max_generation_attempts},
        {"max_judge_attempts", c.prompts.max_judge_attempts},
        {"templates_dir", c.prompts.templates_dir},
        {"index_mode", embedding::to_string(c.prompts.index_mode)}}},
      {"image_agent",
       {{"gamma_text", c.images.gamma_text},
        {"top_n", c.images.top_n},
        {"fan_out", c.images.fan_out},
        {"max_retries", c.images.max_retries},
        {"image_side", c.images.image_side}}},
      {"relabeler",
       {{"input_side", c.relabeler.input_side},
        {"patch_side", c.relabeler.patch_side},
        {"inference_side", c.relabeler.inference_side},
        {"head", c.relabeler.head},
        {"batch_size", c.relabeler.batch_size},
        {"epochs", c.relabeler.epochs},
        {"learning_rate", c.relabeler.learning_rate},
        {"warmup_epochs", c.relabeler.warmup_epochs},
        {"decayed_learning_rate", c.relabeler.decayed_learning_rate},
        {"holdout_fraction", c.relabeler.holdout_fraction},
        {"relabel_threshold", c.relabeler.relabel_threshold}}},
      {"providers",
       {{"mode", c.providers.mode},
        {"cache", c.providers.cache},
        {"text_generation", c.providers.text},
        {"image_generation", c.providers.image},
        {"embedding", c.providers.embedding}}}};
}

PipelineConfig config_from_json(const json& j, const fs::path& base_dir) {
  PipelineConfig c;
  try {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    if (!j.contains("vocabulary")) throw ConfigError("config lacks 'vocabulary'");
    c.vocabulary_path = j.at("vocabulary").get<std::string>();
    if (c.vocabulary_path.is_relative()) c.vocabulary_path = base_dir / c.vocabulary_path;
    if (j.contains("output_dir")) {
      c.output_dir = j.at("output_dir").get<std::string>();
      if (!c.output_dir.empty() && c.output_dir.is_relative()) c.output_dir = base_dir / c.output_dir;
    }
    c.random_seed = j.value("seed", c.random_seed);
    c.max_concurrency = j.value("max_concurrency", c.max_concurrency);

    if (const auto it = j.find("prompt_agent"); it != j.end()) {
      auto& p = c.prompts;
      p.epsilon = it->value("epsilon", p.epsilon);
      p.delta = it->value("delta", p.delta);
      p.prompts_per_class = it->value("prompts_per_class", p.prompts_per_class);
      p.max_refine_iterations = it->value("max_refine_iterations", p.max_refine_iterations);
      p.candidate_budget_factor = it->value("candidate_budget_factor", p.candidate_budget_factor);
      p.max_generation_attempts = it->value("max_generation_attempts", p.max_generation_attempts);
      p.max_judge_attempts = it->value("max_judge_attempts", p.max_judge_attempts);
      p.templates_dir = it->value("templates_dir", p.templates_dir);
      if (!p.templates_dir.empty() && fs::path(p.templates_dir).is_relative()) {
        p.templates_dir = (base_dir / p.templates_dir).string();
      }
      p.index_mode = embedding::search_mode_from_string(it->value("index_mode", std::string("exact")));
    }
    if (const auto it = j.find("image_agent"); it != j.end()) {
      auto& s = c.images;
      s.gamma_text = it->value("gamma_text", s.gamma_text);
      s.top_n = it->value("top_n", s.top_n);
      s.fan_out = it->value("fan_out", s.fan_out);
      s.max_retries = it->value("max_retries", s.max_retries);
      s.image_side = it->value("image_side", s.image_side);
    }
    if (const auto it = j.find("relabeler"); it != j.end()) {
      auto& r = c.relabeler;
      r.input_side = it->value("input_side", r.input_side);
      r.patch_side = it->value("patch_side", r.patch_side);
      r.inference_side = it->value("inference_side", r.inference_side);
      r.head = it->value("head", r.head);
      r.batch_size = it->value("batch_size", r.batch_size);
      r.epochs = it->value("epochs", r.epochs);
      r.learning_rate = it->value("learning_rate", r.learning_rate);
      r.warmup_epochs = it->value("warmup_epochs", r.warmup_epochs);
      r.decayed_learning_rate = it->value("decayed_learning_rate", r.decayed_learning_rate);
      r.holdout_fraction = it->value("holdout_fraction", r.holdout_fraction);
      r.relabel_threshold = it->value("relabel_threshold", r.relabel_threshold);
    }
    std::string mode = "simulated";
    if (const auto it = j.find("providers"); it != j.end()) {
      mode = it->value("mode", mode);
      c.providers.cache = it->value("cache", c.providers.cache);
      if (it->contains("text_generation")) {
        c.providers.text = backends::descriptor_from_json(it->at("text_generation"), ProviderKind::text_generation);
      }
      if (it->contains("image_generation")) {
        c.providers.image = backends::descriptor_from_json(it->at("image_generation"), ProviderKind::image_generation);
      }
      if (it->contains("embedding")) {
        c.providers.embedding = backends::descriptor_from_json(it->at("embedding"), ProviderKind::embedding);
        if (c.providers.embedding.embedding_dim == 0) c.providers.embedding.embedding_dim = 64;
      }
    }
    for (auto* d : {&c.providers.text, &c.providers.image, &c.providers.embedding}) {
      if (d->simulated() && !d->seed) d->seed = c.random_seed;
    }
    c.apply_provider_mode(mode);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j, fs::absolute(path).parent_path());
}

}  // namespace synthforge
