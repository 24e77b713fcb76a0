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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails. Usage: acceptance <path to synthforge CLI>

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "support/test_support.hpp"
#include "synthforge/backends/simulator.hpp"
#include "synthforge/core/ids.hpp"
#include "synthforge/core/io.hpp"
#include "synthforge/core/manifest.hpp"
#include "synthforge/core/vocabulary.hpp"
#include "synthforge/embedding/neighbor_index.hpp"
#include "synthforge/image_agent/agent.hpp"
#include "synthforge/prompt_agent/agent.hpp"
#include "synthforge/prompt_agent/memory.hpp"
#include "synthforge/relabeler/classifier.hpp"

using namespace synthforge;
using synthforge::testing::random_unit;
using synthforge::testing::random_unit_vector;
using synthforge::testing::reference_cosine;
using synthforge::testing::TempDir;
namespace fs = std::filesystem;
using Timer = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Timer::time_point start) {
  return std::chrono::duration<double>(Timer::now() - start).count();
}

std::string fmt(double v, int precision = 3) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

// 1 ---------------------------------------------------------------------------

Outcome filtering_oracle() {
  const auto start = Timer::now();
  bool all_equal = true;
  std::string detail;
  for (const std::size_t dim : {4u, 64u}) {
    std::mt19937_64 rng(1000 + dim);
    std::vector<PromptRecord> candidates;
    std::vector<embedding::EmbeddingVector> vs;
    for (int i = 0; i < 1000; ++i) {
      vs.push_back(random_unit_vector(rng, dim));
      PromptRecord r;
      r.prompt_id = "p" + std::to_string(i);
      r.text = r.prompt_id;
      r.quality_score = 1.0;
      r.embedding = vs.back();
      candidates.push_back(std::move(r));
    }
    std::vector<std::string> expect;
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < vs.size(); ++i) {
      bool novel = true;
      for (const auto k : kept) novel = novel && reference_cosine(vs[k], vs[i]) < 0.92;
      if (novel) {
        kept.push_back(i);
        expect.push_back("p" + std::to_string(i));
      }
    }
    prompt_agent::MemoryBuffer memory(dim);
    std::vector<std::string> got;
    for (const auto& r : prompt_agent::diversity_filter(candidates, memory, 0.92)) got.push_back(r.prompt_id);
    all_equal = all_equal && got == expect;
    detail += "dim " + std::to_string(dim) + ": " + std::to_string(got.size()) + "/1000 kept; ";
  }
  const double t = seconds_since(start);
  return {all_equal && t < 5.0, detail + "identical to oracle: " + (all_equal ? "yes" : "no") + ", " + fmt(t) + " s"};
}

// 2 ---------------------------------------------------------------------------

Outcome nearest_neighbor() {
  const std::size_t dim = 16;
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> size(1, 10000);
  int mismatches = 0;
  int approx_hits = 0;
  const int instances = 100;
  for (int t = 0; t < instances; ++t) {
    const std::size_t n = t == 0 ? 10000 : size(rng);
    embedding::NeighborIndex exact(dim);
    embedding::NeighborIndex approx(dim, embedding::SearchMode::approximate);
    std::vector<embedding::EmbeddingVector> stored;
    for (std::size_t i = 0; i < n; ++i) {
      stored.push_back(random_unit_vector(rng, dim));
      exact.insert(std::to_string(i), stored.back());
      approx.insert(std::to_string(i), stored.back());
    }
    const auto q = random_unit_vector(rng, dim);
    std::size_t best = 0;
    double best_sim = -2.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = reference_cosine(stored[i], q);
      if (s > best_sim) {
        best_sim = s;
        best = i;
      }
    }
    if (exact.nearest(q)->id != std::to_string(best)) ++mismatches;
    if (approx.nearest(q)->id == std::to_string(best)) ++approx_hits;
  }
  const double recall = static_cast<double>(approx_hits) / instances;
  return {mismatches == 0 && recall >= 0.95, "exact mismatches " + std::to_string(mismatches) +
                                                 ", approximate recall@1 " + fmt(recall) + " (dim 16)"};
}

// 3 ---------------------------------------------------------------------------

Outcome similarity_math() {
  std::mt19937_64 rng(3);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t dim = 2 + static_cast<std::size_t>(t % 63);
    const auto a = random_unit(rng, dim);
    auto b = random_unit(rng, dim);
    double d = 0;
    for (std::size_t i = 0; i < dim; ++i) d += a[i] * b[i];
    for (std::size_t i = 0; i < dim; ++i) b[i] -= d * a[i];
    std::vector<double> neg(a);
    for (auto& x : neg) x = -x;
    const auto va = embedding::normalize(embedding::EmbeddingVector::from_doubles(a));
    const auto vb = embedding::normalize(embedding::EmbeddingVector::from_doubles(b));
    const auto vn = embedding::normalize(embedding::EmbeddingVector::from_doubles(neg));
    worst = std::max({worst, std::abs(embedding::scaled_similarity(va, va) - 1.0),
                      std::abs(embedding::scaled_similarity(va, vb) - 0.5),
                      std::abs(embedding::scaled_similarity(va, vn) - 0.0)});
  }
  return {worst <= 1e-6, "worst deviation " + fmt(worst) + " over 1000 triples"};
}

// 4 ---------------------------------------------------------------------------

Outcome gradient_check() {
  const auto start = Timer::now();
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  std::bernoulli_distribution coin(0.4);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    Eigen::MatrixXd f(4, 8), w(8, 5);
    for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = normal(rng);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = 0.5 * normal(rng);
    relabeler::MultiLabelTarget y(5);
    for (Eigen::Index c = 0; c < 5; ++c) y(c) = coin(rng) ? 1.0 : 0.0;
    const Eigen::MatrixXd analytic = relabeler::loss_gradient(f, w, y);
    Eigen::MatrixXd numeric(8, 5);
    const double h = 1e-5;
    for (Eigen::Index i = 0; i < 8; ++i) {
      for (Eigen::Index j = 0; j < 5; ++j) {
        Eigen::MatrixXd up = w, down = w;
        up(i, j) += h;
        down(i, j) -= h;
        numeric(i, j) = (relabeler::bce_loss(relabeler::max_pool(relabeler::forward(f, up)), y) -
                         relabeler::bce_loss(relabeler::max_pool(relabeler::forward(f, down)), y)) /
                        (2 * h);
      }
    }
    worst = std::max(worst, (analytic - numeric).norm() / std::max({analytic.norm(), numeric.norm(), 1e-12}));
  }
  const double t = seconds_since(start);
  return {worst <= 1e-4 && t < 10.0, "worst relative error " + fmt(worst) + ", " + fmt(t) + " s"};
}

// 5 ---------------------------------------------------------------------------

Outcome loss_values() {
  std::mt19937_64 rng(5);
  std::bernoulli_distribution coin(0.5);
  double worst_half = 0.0;
  double worst_match = 0.0;
  for (int t = 0; t < 200; ++t) {
    const Eigen::Index c = 1 + t % 20;
    relabeler::MultiLabelTarget y(c);
    for (Eigen::Index k = 0; k < c; ++k) y(k) = coin(rng) ? 1.0 : 0.0;
    worst_half = std::max(worst_half, std::abs(relabeler::bce_loss(relabeler::PredictionVector::Constant(c, 0.5), y) -
                                               std::log(2.0)));
    relabeler::PredictionVector clipped(c);
    for (Eigen::Index k = 0; k < c; ++k) clipped(k) = y(k) > 0.5 ? 1.0 - relabeler::kProbabilityClip : relabeler::kProbabilityClip;
    worst_match = std::max(worst_match, relabeler::bce_loss(clipped, y));
  }
  return {worst_half <= 1e-9 && worst_match <= 1e-6,
          "|L(0.5) - ln 2| <= " + fmt(worst_half) + ", matched clipped loss <= " + fmt(worst_match)};
}

// 6 ---------------------------------------------------------------------------

Outcome classifier_convergence() {
  const auto start = Timer::now();
  std::mt19937_64 rng(6);
  const relabeler::PatchGridConfig grid{64, 16, 16};
  const auto samples = synthforge::testing::separable_samples(rng, 300, 3, grid, 0.2);
  relabeler::TrainConfig config;
  config.seed = 6;
  const auto result = relabeler::train(samples, grid, 3, config);
  const double acc = relabeler::subset_accuracy(result.classifier, samples, result.validation_indices, 0.5);
  std::size_t clear = 0;
  for (const auto i : result.validation_indices) {
    const auto y_hat = result.classifier.predict(samples[i].f);
    Eigen::Index label = 0;
    samples[i].y.maxCoeff(&label);
    if (y_hat(label) >= 0.5) ++clear;
  }
  const double t = seconds_since(start);
  return {acc >= 0.95 && t < 30.0,
          "held-out subset accuracy " + fmt(acc) + " on " + std::to_string(result.validation_indices.size()) +
              " samples, best epoch " + std::to_string(result.best_epoch) + ", " + std::to_string(clear) +
              " true-class scores above 0.5 without fallback, " + fmt(t) + " s"};
}

// 7 ---------------------------------------------------------------------------

Outcome dual_gate_soundness() {
  const std::vector<std::string> names{"aeroplane", "bicycle", "bird", "boat", "bottle", "bus", "car", "cat", "chair",
                                       "cow", "dog", "horse", "person", "sheep", "sofa"};
  const std::vector<std::string> scenes{"on a quiet street at dusk", "in a sunlit field", "beside a lake at dawn",
                                        "inside a cluttered garage", "under heavy rain", "in a snowy courtyard"};
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> pick(0, names.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_scene(0, scenes.size() - 1);
  std::vector<PromptRecord> prompts;
  for (int i = 0; i < 200; ++i) {
    const auto a = pick(rng);
    auto b = pick(rng);
    PromptRecord p;
    p.prompt_id = "P" + std::to_string(1000 + i);
    p.class_id = static_cast<ClassId>(a);
    p.text = "a " + names[a] + (i % 2 ? " and a " + names[b] : "") + " " + scenes[pick_scene(rng)];
    p.quality_score = 1.0;
    p.status = PromptStatus::accepted;
    prompts.push_back(p);
  }
  backends::SimulatorState state;
  state.seed = 7;
  state.embedding_dim = 64;
  state.concepts = names;
  const auto providers = backends::make_simulated_providers(state);
  const ClassVocabulary vocab("voc15", names);
  const IdFactory ids(7, fixed_clock(0));
  TempDir dir;
  ImageAgentSettings settings;
  const image_agent::ImageAgentContext ctx{vocab, *providers.image, *providers.embedder, ids, settings, 7, dir.path(), 1};
  const auto result = image_agent::build_high_confidence_set(prompts, ctx);

  // Recheck from stored embeddings: the image vectors cached on the records,
  // fresh text vectors for prompts and class names.
  std::map<std::string, const PromptRecord*> by_id;
  for (const auto& p : prompts) by_id[p.prompt_id] = &p;
  std::vector<embedding::EmbeddingVector> class_vecs;
  for (const auto& n : names) class_vecs.push_back(backends::embed_text(*providers.embedder, n));
  std::size_t violations = 0;
  std::size_t expected_pairs = 0;
  std::map<std::string, std::set<ClassId>> selected;
  for (const auto& img : result.filtered.images) {
    if (!img.embedding) {
      ++violations;
      continue;
    }
    const auto tv = backends::embed_text(*providers.embedder, by_id.at(img.prompt_id)->text);
    std::vector<std::pair<double, ClassId>> ranked;
    for (std::size_t k = 0; k < names.size(); ++k) {
      if ((1.0 + reference_cosine(tv, class_vecs[k])) / 2.0 > settings.gamma_text) {
        ranked.push_back({-(1.0 + reference_cosine(*img.embedding, class_vecs[k])) / 2.0, static_cast<ClassId>(k)});
      }
    }
    std::sort(ranked.begin(), ranked.end());
    std::set<ClassId> top;
    for (std::size_t r = 0; r < ranked.size() && r < static_cast<std::size_t>(settings.top_n); ++r) {
      top.insert(ranked[r].second);
    }
    selected[img.image_id] = top;
    expected_pairs += top.size();
    if (img.pseudo_labels != top) ++violations;
  }
  for (const auto& pair : result.filtered.pairs) {
    const auto it = selected.find(pair.image_id);
    if (it == selected.end() || !it->second.count(pair.class_id) || !(pair.text_score > settings.gamma_text)) {
      ++violations;
    }
  }
  if (result.filtered.pairs.size() != expected_pairs) ++violations;
  const bool ok = violations == 0 && result.filtered.images.size() + result.failures.size() == prompts.size();
  return {ok, std::to_string(result.filtered.pairs.size()) + " pairs from " +
                  std::to_string(result.filtered.images.size()) + " images, " + std::to_string(violations) +
                  " violations"};
}

// 8 ---------------------------------------------------------------------------

Outcome worked_example() {
  const std::vector<std::string> names{"dog", "cat", "sofa", "person", "bed"};
  const std::string text = "Dog Sleeping on cozy couch";
  backends::SimulatorState state;
  state.seed = 8;
  state.embedding_dim = 8;
  state.concepts = names;
  for (std::size_t k = 0; k < names.size(); ++k) {
    std::vector<float> axis(8, 0.0f);
    axis[k] = 1.0f;
    state.fixtures.text_embeddings[names[k]] = axis;
  }
  state.fixtures.text_embeddings[text] = {0.8f, 0.5f, 0.6f, 0.0f, 0.0f, 0.1f, 0.0f, 0.0f};
  state.fixtures.image_embeddings[text] = {0.7f, 0.2f, 0.65f, 0.05f, 0.1f, 0.0f, 0.1f, 0.0f};
  const auto providers = backends::make_simulated_providers(state);
  const ClassVocabulary vocab("fig", names);
  const IdFactory ids(8, fixed_clock(0));
  TempDir dir;
  const image_agent::ImageAgentContext ctx{vocab, *providers.image, *providers.embedder, ids, {}, 8, dir.path(), 1};
  PromptRecord p;
  p.prompt_id = "FIG";
  p.class_id = 0;
  p.text = text;
  p.quality_score = 1.0;
  p.status = PromptStatus::accepted;
  const auto result = image_agent::build_high_confidence_set({p}, ctx);
  std::set<std::string> labels;
  if (result.filtered.images.size() == 1) {
    for (const ClassId c : result.filtered.images[0].pseudo_labels) labels.insert(names[static_cast<std::size_t>(c)]);
  }
  std::string shown;
  for (const auto& l : labels) shown += (shown.empty() ? "" : ", ") + l;
  return {labels == std::set<std::string>{"dog", "sofa"}, "selected {" + shown + "}"};
}

// 9 and 10 --------------------------------------------------------------------

struct CliRunner {
  std::string cli;
  fs::path config;

  int operator()(const std::string& args, const fs::path& run_dir) const {
    const std::string cmd = "\"" + cli + "\" --log-level error --config \"" + config.string() + "\" --run-dir \"" +
                            run_dir.string() + "\" " + args + " > /dev/null";
    return std::system(cmd.c_str());
  }
};

fs::path write_demo_config(const fs::path& dir) {
  synthforge::testing::write_text(dir / "classes.txt", "dog\ncat\nsofa\n");
  const nlohmann::json j{{"vocabulary", "classes.txt"},
                         {"seed", 7},
                         {"prompt_agent", {{"prompts_per_class", 10}}},
                         {"providers", {{"mode", "simulated"}, {"cache", false}, {"embedding", {{"embedding_dim", 64}}}}}};
  synthforge::testing::write_text(dir / "config.json", j.dump(2));
  return dir / "config.json";
}

Outcome end_to_end(const CliRunner& cli, const fs::path& work) {
  const auto start = Timer::now();
  const int rc = cli("run", work / "first");
  const double t = seconds_since(start);
  if (rc != 0) return {false, "run exited with " + std::to_string(rc)};
  const auto manifest = load_manifest(work / "first" / "export" / "manifest.jsonl");
  const auto report = validate_manifest(manifest, work / "first" / "export");
  const int validate_rc = cli("validate", work / "first");
  if (cli("run", work / "second") != 0) return {false, "second run failed"};
  const bool identical = read_file_text(work / "first" / "export" / "train_list.txt") ==
                         read_file_text(work / "second" / "export" / "train_list.txt");
  return {t < 60.0 && report.ok() && validate_rc == 0 && identical && manifest.entries.size() <= 30,
          std::to_string(manifest.entries.size()) + " images, " + std::to_string(report.violations.size()) +
              " violations, train lists identical: " + (identical ? "yes" : "no") + ", first run " + fmt(t) + " s"};
}

Outcome crash_resume(const CliRunner& cli, const fs::path& work) {
  const auto reference = read_file_text(work / "first" / "export" / "train_list.txt");
  const std::vector<std::string> stops{"prompts", "generate", "dhigh", "train-relabeler", "relabel"};
  int matches = 0;
  std::string detail;
  for (const auto& stop : stops) {
    const auto run_dir = work / ("resume-" + stop);
    const bool ok = cli(stop, run_dir) == 0 && cli("run", run_dir) == 0 &&
                    read_file_text(run_dir / "export" / "train_list.txt") == reference;
    if (ok) ++matches;
    detail += stop + (ok ? " ok" : " DIFFERS") + "; ";
  }
  return {matches == static_cast<int>(stops.size()), detail + std::to_string(matches) + "/5 identical"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <path to synthforge CLI>\n";
    return 2;
  }
  spdlog::set_level(spdlog::level::err);
  TempDir work("sf-acceptance");
  const CliRunner cli{argv[1], write_demo_config(work.path())};

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"filtering oracle equivalence", filtering_oracle},
      {"nearest-neighbour correctness", nearest_neighbor},
      {"similarity math", similarity_math},
      {"gradient check", gradient_check},
      {"loss analytic values", loss_values},
      {"classifier convergence", classifier_convergence},
      {"dual-gate soundness", dual_gate_soundness},
      {"dog-and-sofa worked example", worked_example},
      {"end-to-end determinism", [&] { return end_to_end(cli, work.path()); }},
      {"crash-resume equivalence", [&] { return crash_resume(cli, work.path()); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
