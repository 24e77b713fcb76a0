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

#include "doctest.h"

#include <sstream>

#include "support/test_support.hpp"
#include "synthforge/core/config.hpp"
#include "synthforge/core/errors.hpp"
#include "synthforge/core/ids.hpp"
#include "synthforge/core/io.hpp"
#include "synthforge/core/manifest.hpp"
#include "synthforge/core/records.hpp"
#include "synthforge/core/vocabulary.hpp"

using namespace synthforge;
using synthforge::testing::TempDir;
using synthforge::testing::write_text;

namespace {

const char* kVoc =
    "aeroplane\nbicycle\nbird\nboat\nbottle\nbus\ncar\ncat\nchair\ncow\n"
    "diningtable\ndog\nhorse\nmotorbike\nperson\npottedplant\nsheep\nsofa\ntrain\ntvmonitor\n";

}  // namespace

TEST_CASE("load_vocabulary reads the twenty VOC classes in file order") {
  TempDir dir;
  write_text(dir / "voc.txt", kVoc);
  const auto vocab = load_vocabulary(dir / "voc.txt");
  REQUIRE(vocab.size() == 20);
  CHECK(vocab.name(0) == "aeroplane");
  CHECK(vocab.name(19) == "tvmonitor");
  CHECK(vocab.dataset_name() == "voc");
  for (std::size_t i = 0; i < vocab.size(); ++i) CHECK(vocab.classes()[i].id == static_cast<ClassId>(i));
}

TEST_CASE("load_vocabulary handles single classes, comments and failures") {
  TempDir dir;
  write_text(dir / "one.txt", "cat\n");
  const auto one = load_vocabulary(dir / "one.txt");
  CHECK(one.size() == 1);
  CHECK(one.name(0) == "cat");

  write_text(dir / "commented.txt", "# animals\n\n  dog  \n# skip\ndining table\n");
  const auto commented = load_vocabulary(dir / "commented.txt");
  REQUIRE(commented.size() == 2);
  CHECK(commented.name(1) == "dining table");
  CHECK(class_slug(commented.name(1)) == "dining_table");

  write_text(dir / "dup.txt", "cat\ncat\n");
  CHECK_THROWS_AS(load_vocabulary(dir / "dup.txt"), ConfigError);
  write_text(dir / "dupcase.txt", "Cat\ncat\n");
  CHECK_THROWS_AS(load_vocabulary(dir / "dupcase.txt"), ConfigError);
  write_text(dir / "empty.txt", "# nothing here\n\n");
  CHECK_THROWS_AS(load_vocabulary(dir / "empty.txt"), ConfigError);
  CHECK_THROWS_AS(load_vocabulary(dir / "missing.txt"), ConfigError);
}

TEST_CASE("load_vocabulary accepts structured JSON lists") {
  TempDir dir;
  write_text(dir / "v.json", R"({"dataset_name": "pets", "classes": ["dog", "cat"]})");
  const auto v = load_vocabulary(dir / "v.json");
  CHECK(v.dataset_name() == "pets");
  CHECK(v.names() == std::vector<std::string>{"dog", "cat"});
  CHECK(v.find("CAT") == 1);

  nlohmann::json j;
  to_json(j, v);
  CHECK(vocabulary_from_json(j) == v);
}

TEST_CASE("ULIDs are well formed and reproducible") {
  IdFactory a(42, fixed_clock(1'700'000'000'000ULL));
  IdFactory b(42, fixed_clock(1'700'000'000'000ULL));
  const auto id = a.make("prompt/0", 3);
  CHECK(id.size() == 26);
  CHECK(is_valid_ulid(id));
  CHECK(id == b.make("prompt/0", 3));
  CHECK(id != a.make("prompt/0", 4));
  CHECK(id != a.make("prompt/1", 3));
  CHECK(id != IdFactory(43, fixed_clock(1'700'000'000'000ULL)).make("prompt/0", 3));
  CHECK_FALSE(is_valid_ulid("not-a-ulid"));
}

TEST_CASE("prompt record invariants") {
  PromptRecord r;
  r.prompt_id = "p";
  r.text = "";
  CHECK_THROWS_AS(check_invariants(r), InvariantError);
  r.text = "a dog";
  CHECK_NOTHROW(check_invariants(r));
  r.status = PromptStatus::accepted;
  CHECK_THROWS_AS(check_invariants(r), InvariantError);
  r.quality_score = 0.97;
  r.embedding = embedding::EmbeddingVector({1.0f, 0.0f});
  CHECK_NOTHROW(check_invariants(r));

  nlohmann::json j = r;
  const auto back = j.get<PromptRecord>();
  CHECK(back.prompt_id == r.prompt_id);
  CHECK(back.text == r.text);
  CHECK(back.quality_score == r.quality_score);
  CHECK(back.status == PromptStatus::accepted);
  CHECK(j.at("score").get<double>() == doctest::Approx(0.97));
}

TEST_CASE("image record JSON round trip") {
  ImageRecord r;
  r.image_id = "i";
  r.prompt_id = "p";
  r.prompt_class = 2;
  r.file_path = "images/dog/i.png";
  r.provider_seed = 99;
  r.pseudo_labels = {0, 2};
  r.label_source = LabelSource::relabeler;
  const auto back = nlohmann::json(r).get<ImageRecord>();
  CHECK(back.pseudo_labels == r.pseudo_labels);
  CHECK(back.label_source == LabelSource::relabeler);
  CHECK(back.provider_seed == 99);
}

TEST_CASE("manifest validation") {
  TempDir dir;
  write_text(dir / "images/dog/a.png", "x");
  write_text(dir / "images/sofa/b.png", "x");
  DatasetManifest m{ClassVocabulary("t", {"dog", "sofa"}), {{"images/dog/a.png", {0}}, {"images/sofa/b.png", {0, 1}}}};

  SUBCASE("valid manifest gives an empty report") {
    const auto report = validate_manifest(m, dir.path());
    CHECK(report.ok());
    CHECK(validate_manifest(m, dir.path()) == report);
  }
  SUBCASE("an empty label set is one violation") {
    m.entries[1].labels.clear();
    const auto report = validate_manifest(m, dir.path());
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].entry == 1);
  }
  SUBCASE("a dangling path is one violation naming the path") {
    m.entries[0].image_path = "images/dog/missing.png";
    const auto report = validate_manifest(m, dir.path());
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].message.find("images/dog/missing.png") != std::string::npos);
  }
  SUBCASE("validation is pure") {
    m.entries[0].labels = {5};
    const auto first = validate_manifest(m, dir.path());
    CHECK(first == validate_manifest(m, dir.path()));
    CHECK(first.violations.size() == 1);
  }
}

TEST_CASE("manifest serialization round-trips") {
  DatasetManifest m{ClassVocabulary("voc", {"dog", "sofa", "dining table"}),
                    {{"images/dog/a.png", {0}}, {"images/sofa/b.png", {0, 1}}, {"images/dining_table/c.png", {2}}},
                    nlohmann::json{{"seed", 7}, {"providers", {{"text", "simulated"}}}}};
  std::stringstream ss;
  write_manifest(ss, m);
  const std::string text = ss.str();
  CHECK(text.find(R"("schema":"synthforge/1")") != std::string::npos);
  std::stringstream in(text);
  CHECK(read_manifest(in) == m);

  TempDir dir;
  save_manifest(dir / "manifest.jsonl", m);
  CHECK(load_manifest(dir / "manifest.jsonl") == m);
}

TEST_CASE("malformed JSONL names the file and line") {
  TempDir dir;
  write_text(dir / "bad.jsonl", "{\"a\":1}\n{oops\n");
  try {
    read_jsonl(dir / "bad.jsonl");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("bad.jsonl:2") != std::string::npos);
  }
}

TEST_CASE("config defaults, validation and hashing") {
  TempDir dir;
  write_text(dir / "v.txt", "dog\ncat\n");
  auto config = config_from_json(nlohmann::json{{"vocabulary", "v.txt"}, {"output_dir", "out"}}, dir.path());
  CHECK(config.prompts.epsilon == 0.95);
  CHECK(config.prompts.delta == 0.92);
  CHECK(config.images.gamma_text == 0.7);
  CHECK(config.images.top_n == 2);
  CHECK(config.relabeler.patch_side == 16);
  CHECK(config.relabeler.input_side == 384);
  CHECK_NOTHROW(config.validate());

  auto moved = config;
  moved.output_dir = dir / "elsewhere";
  moved.max_concurrency = 1;
  CHECK(moved.hash() == config.hash());
  auto changed = config;
  changed.prompts.delta = 0.9;
  CHECK(changed.hash() != config.hash());
  const auto before = config.hash();
  write_text(dir / "v.txt", "dog\ncat\nsofa\n");
  CHECK(config.hash() != before);
  write_text(dir / "v.txt", "dog\ncat\n");

  auto bad = config;
  bad.prompts.epsilon = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = config;
  bad.images.gamma_text = -0.1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = config;
  bad.relabeler.patch_side = 100;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"output_dir", "x"}}, dir.path()), ConfigError);
  CHECK_THROWS_AS(
      config_from_json(
          nlohmann::json{{"vocabulary", "v.txt"},
                         {"providers", {{"text_generation", {{"endpoint", "https://x"}, {"api_key", "sk-123"}}}}}},
          dir.path()),
      ConfigError);
}

TEST_CASE("remote mode requires endpoints and credential variables") {
  TempDir dir;
  write_text(dir / "v.txt", "dog\n");
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"vocabulary", "v.txt"}, {"providers", {{"mode", "remote"}}}},
                                   dir.path()),
                  ConfigError);
  auto c = config_from_json(nlohmann::json{{"vocabulary", "v.txt"}}, dir.path());
  CHECK(c.providers.text.simulated());
  CHECK(c.providers.text.seed.has_value());
}
