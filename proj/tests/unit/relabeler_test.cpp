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

#include <cmath>
#include <random>

#include "support/test_support.hpp"
#include "synthforge/backends/simulator.hpp"
#include "synthforge/core/errors.hpp"
#include "synthforge/core/io.hpp"
#include "synthforge/core/records.hpp"
#include "synthforge/relabeler/classifier.hpp"
#include "synthforge/relabeler/patch_grid.hpp"
#include "synthforge/relabeler/relabel.hpp"

using namespace synthforge;
using namespace synthforge::relabeler;
using synthforge::testing::TempDir;

namespace {

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

MultiLabelTarget random_target(std::mt19937_64& rng, Eigen::Index classes) {
  std::bernoulli_distribution coin(0.4);
  MultiLabelTarget y(classes);
  for (Eigen::Index c = 0; c < classes; ++c) y(c) = coin(rng) ? 1.0 : 0.0;
  if (y.sum() == 0) y(0) = 1.0;
  return y;
}

// Loss recomputed from scratch: explicit softmax, column max, clipped BCE.
double reference_loss(const Eigen::MatrixXd& f, const Eigen::MatrixXd& w, const MultiLabelTarget& y) {
  const Eigen::MatrixXd logits = f * w;
  std::vector<double> pooled(static_cast<std::size_t>(w.cols()), 0.0);
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    double denom = 0.0;
    for (Eigen::Index c = 0; c < logits.cols(); ++c) denom += std::exp(logits(r, c));
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
      pooled[static_cast<std::size_t>(c)] = std::max(pooled[static_cast<std::size_t>(c)], std::exp(logits(r, c)) / denom);
    }
  }
  double loss = 0.0;
  for (Eigen::Index c = 0; c < w.cols(); ++c) {
    const double p = std::clamp(pooled[static_cast<std::size_t>(c)], 1e-7, 1.0 - 1e-7);
    loss -= y(c) * std::log(p) + (1.0 - y(c)) * std::log(1.0 - p);
  }
  return loss / static_cast<double>(w.cols());
}

Eigen::MatrixXd finite_difference(const Eigen::MatrixXd& f, Eigen::MatrixXd w, const MultiLabelTarget& y,
                                  double step, Head head = Head::softmax) {
  Eigen::MatrixXd g(w.rows(), w.cols());
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      const double keep = w(i, j);
      w(i, j) = keep + step;
      const double up = bce_loss(max_pool(forward(f, w, head)), y);
      w(i, j) = keep - step;
      const double down = bce_loss(max_pool(forward(f, w, head)), y);
      w(i, j) = keep;
      g(i, j) = (up - down) / (2.0 * step);
    }
  }
  return g;
}

double relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max({a.norm(), b.norm(), 1e-12});
}

}  // namespace

TEST_CASE("patch grid arithmetic") {
  const PatchGridConfig grid{384, 96, 8};
  CHECK(grid.patch_count() == 16);
  CHECK(PatchGridConfig{384, 16, 8}.patch_count() == 576);
  CHECK_THROWS_AS(PatchGridConfig({384, 100, 8}).validate(), ConfigError);
  CHECK_THROWS_AS(check_patch_matrix(Eigen::MatrixXd::Zero(15, 8), grid), DimensionMismatchError);
}

TEST_CASE("forward") {
  const Eigen::MatrixXd f = Eigen::MatrixXd::Ones(3, 4);
  const Eigen::MatrixXd z = forward(f, Eigen::MatrixXd::Zero(4, 5));
  CHECK((z.array() - 0.2).abs().maxCoeff() < 1e-12);

  Eigen::MatrixXd one(1, 1);
  one << 1.0;
  Eigen::MatrixXd w(1, 2);
  w << 0.0, std::log(3.0);
  const auto z2 = forward(one, w);
  CHECK(z2(0, 0) == doctest::Approx(0.25));
  CHECK(z2(0, 1) == doctest::Approx(0.75));

  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    const auto zr = forward(random_matrix(rng, 6, 8, 3.0), random_matrix(rng, 8, 5, 3.0));
    for (Eigen::Index r = 0; r < zr.rows(); ++r) CHECK(std::abs(zr.row(r).sum() - 1.0) < 1e-6);
  }
  CHECK_THROWS_AS(forward(f, Eigen::MatrixXd::Zero(3, 5)), DimensionMismatchError);
  Eigen::MatrixXd inf = Eigen::MatrixXd::Zero(4, 2);
  inf(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(forward(f, inf), DegenerateInputError);
}

TEST_CASE("max pooling") {
  Eigen::MatrixXd row(1, 3);
  row << 0.2, 0.3, 0.5;
  CHECK(max_pool(row) == Eigen::VectorXd(row.row(0).transpose()));
  Eigen::MatrixXd col(3, 1);
  col << 0.1, 0.9, 0.3;
  CHECK(max_pool(col)(0) == 0.9);
  Eigen::MatrixXd tie(3, 1);
  tie << 0.4, 0.7, 0.7;
  std::vector<Eigen::Index> argmax;
  max_pool(tie, &argmax);
  CHECK(argmax == std::vector<Eigen::Index>{1});

  std::mt19937_64 rng(2);
  for (int t = 0; t < 50; ++t) {
    const Eigen::MatrixXd z = random_matrix(rng, 7, 4);
    const auto pooled = max_pool(z);
    for (Eigen::Index c = 0; c < z.cols(); ++c) {
      double best = z(0, c);
      for (Eigen::Index r = 1; r < z.rows(); ++r) best = std::max(best, z(r, c));
      CHECK(pooled(c) == best);
    }
  }
}

TEST_CASE("binary cross-entropy values") {
  const PredictionVector half = PredictionVector::Constant(4, 0.5);
  MultiLabelTarget y(4);
  y << 1, 0, 1, 1;
  CHECK(std::abs(bce_loss(half, y) - std::log(2.0)) < 1e-9);
  PredictionVector clipped(4);
  clipped << 1.0 - 1e-7, 1e-7, 1.0 - 1e-7, 1.0 - 1e-7;
  CHECK(bce_loss(clipped, y) <= 1e-6);
  CHECK(bce_loss(PredictionVector(y), y) <= 1e-6);
  PredictionVector p(2);
  p << 0.75, 0.25;
  MultiLabelTarget t(2);
  t << 1, 0;
  CHECK(bce_loss(p, t) == doctest::Approx(std::log(4.0 / 3.0)).epsilon(1e-12));
  PredictionVector wrong(2);
  wrong << 0.0, 1.0;
  CHECK(std::isfinite(bce_loss(wrong, t)));
}

TEST_CASE("loss matches an independent recomputation") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 30; ++t) {
    const auto f = random_matrix(rng, 4, 8);
    const auto w = random_matrix(rng, 8, 5);
    const auto y = random_target(rng, 5);
    CHECK(bce_loss(max_pool(forward(f, w)), y) == doctest::Approx(reference_loss(f, w, y)).epsilon(1e-12));
  }
}

TEST_CASE("analytic gradient matches central differences") {
  std::mt19937_64 rng(4);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto f = random_matrix(rng, 4, 8);
    const auto w = random_matrix(rng, 8, 5, 0.5);
    const auto y = random_target(rng, 5);
    worst = std::max(worst, relative_error(loss_gradient(f, w, y), finite_difference(f, w, y, 1e-5)));
  }
  MESSAGE("worst relative error " << worst);
  CHECK(worst <= 1e-4);

  for (int t = 0; t < 30; ++t) {
    const auto f = random_matrix(rng, 4, 8);
    const auto w = random_matrix(rng, 8, 5, 0.5);
    const auto y = random_target(rng, 5);
    CHECK(relative_error(loss_gradient(f, w, y, Head::sigmoid), finite_difference(f, w, y, 1e-5, Head::sigmoid)) <=
          1e-4);
  }
}

TEST_CASE("zero weights and identical rows give symmetric gradient columns") {
  // All patches equal, two positive and two negative classes: the positive
  // columns coincide, as do the negative ones.
  Eigen::MatrixXd f(3, 4);
  f.rowwise() = Eigen::RowVectorXd::LinSpaced(4, 0.5, 2.0);
  MultiLabelTarget y(4);
  y << 1, 1, 0, 0;
  const auto g = loss_gradient(f, Eigen::MatrixXd::Zero(4, 4), y);
  CHECK((g.col(0) - g.col(1)).norm() < 1e-12);
  CHECK((g.col(2) - g.col(3)).norm() < 1e-12);
  CHECK((g.col(0) + g.col(2)).norm() < 1e-12);
}

TEST_CASE("gradient vanishes once a sample's own labels are fitted") {
  std::mt19937_64 rng(5);
  const PatchGridConfig grid{4, 2, 6};
  const auto f = random_matrix(rng, 4, 6);
  LinearClassifier model(grid, 3);
  MultiLabelTarget y(3);
  y << 1, 0, 0;
  for (int step = 0; step < 5000; ++step) model.adam_step(loss_gradient(f, model.weights(), y), 0.05);
  const auto labels = labels_from_prediction(model.predict(f), 0.5);
  CHECK(labels == std::set<ClassId>{0});
  const double norm = loss_gradient(f, model.weights(), y).norm();
  MESSAGE("gradient norm " << norm);
  CHECK(norm < 1e-3);
}

TEST_CASE("permuting classes leaves the loss unchanged") {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 30; ++t) {
    const auto f = random_matrix(rng, 4, 8);
    const auto w = random_matrix(rng, 8, 5);
    const auto y = random_target(rng, 5);
    std::vector<int> perm{0, 1, 2, 3, 4};
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::MatrixXd wp(8, 5);
    MultiLabelTarget yp(5);
    for (int c = 0; c < 5; ++c) {
      wp.col(c) = w.col(perm[static_cast<std::size_t>(c)]);
      yp(c) = y(perm[static_cast<std::size_t>(c)]);
    }
    CHECK(bce_loss(max_pool(forward(f, wp)), yp) == doctest::Approx(bce_loss(max_pool(forward(f, w)), y)));
  }
}

TEST_CASE("training schedule") {
  TrainConfig c;
  CHECK(c.learning_rate_for(1) == 1e-3);
  CHECK(c.learning_rate_for(2) == 1e-3);
  CHECK(c.learning_rate_for(3) == 1e-4);
  CHECK(c.learning_rate_for(50) == 1e-4);
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("one sample: loss falls at every one of the first ten steps") {
  std::mt19937_64 rng(7);
  const PatchGridConfig grid{4, 2, 6};
  TrainingSample s{random_matrix(rng, 4, 6), MultiLabelTarget::Ones(1)};
  LinearClassifier model(grid, 1, Head::sigmoid);
  double prev = model.loss(s.f, s.y);
  for (int step = 0; step < 10; ++step) {
    model.adam_step(loss_gradient(s.f, model.weights(), s.y, Head::sigmoid), 1e-3);
    const double now = model.loss(s.f, s.y);
    CHECK(now < prev);
    prev = now;
  }

  TrainConfig config;
  config.head = Head::sigmoid;
  config.epochs = 10;
  config.batch_size = 1;
  const auto result = train({s}, grid, 1, config);
  for (std::size_t e = 1; e < result.log.size(); ++e) CHECK(result.log[e].train_loss < result.log[e - 1].train_loss);
  CHECK(result.validation_indices.empty());
  CHECK(result.log[0].validation_size == 1);
}

TEST_CASE("zero epochs return the zero weights") {
  std::mt19937_64 rng(8);
  const PatchGridConfig grid{4, 2, 6};
  TrainConfig config;
  config.epochs = 0;
  const auto result = train({{random_matrix(rng, 4, 6), MultiLabelTarget::Ones(3)}}, grid, 3, config);
  CHECK(result.classifier.weights().isZero());
  CHECK(result.classifier.step() == 0);
  CHECK(result.log.size() == 1);
  CHECK_THROWS_AS(train({}, grid, 3, config), DegenerateInputError);
}

TEST_CASE("separable data reaches high held-out subset accuracy") {
  std::mt19937_64 rng(9);
  const PatchGridConfig grid{8, 4, 8};
  const auto samples = synthforge::testing::separable_samples(rng, 300, 3, grid, 0.2);
  TrainConfig config;
  config.seed = 3;
  const auto result = train(samples, grid, 3, config);
  CHECK(result.validation_indices.size() == 30);
  const double acc = subset_accuracy(result.classifier, samples, result.validation_indices, 0.5);
  MESSAGE("held-out subset accuracy " << acc << ", best epoch " << result.best_epoch);
  CHECK(acc >= 0.95);
  CHECK(result.log.back().validation_loss < result.log.front().validation_loss);

  const auto again = train(samples, grid, 3, config);
  CHECK(again.classifier.weights() == result.classifier.weights());
  CHECK(again.best_epoch == result.best_epoch);
}

TEST_CASE("label decision rule") {
  PredictionVector p(3);
  p << 0.9, 0.1, 0.7;
  CHECK(labels_from_prediction(p, 0.5) == std::set<ClassId>{0, 2});
  PredictionVector low(5);
  low << 0.1, 0.2, 0.05, 0.3, 0.4;
  CHECK(labels_from_prediction(low, 0.5) == std::set<ClassId>{4});
  CHECK(labels_from_prediction(PredictionVector::Constant(3, 0.2), 0.5) == std::set<ClassId>{0});
}

TEST_CASE("checkpoint round trip") {
  TempDir dir;
  std::mt19937_64 rng(10);
  LinearClassifier model({8, 4, 6}, 3, Head::sigmoid);
  model.set_weights(random_matrix(rng, 6, 3));
  model.adam_step(random_matrix(rng, 6, 3), 1e-3);
  model.save(dir / "ck.bin");
  const auto back = LinearClassifier::load(dir / "ck.bin");
  CHECK(back.head() == Head::sigmoid);
  CHECK(back.step() == 1);
  CHECK(back.grid().input_side == 8);
  CHECK(back.weights() == model.weights().cast<float>().cast<double>());
  synthforge::testing::write_text(dir / "bad.bin", "SFCK");
  CHECK_THROWS(LinearClassifier::load(dir / "bad.bin"));
}

TEST_CASE("inference grid") {
  backends::ProviderDescriptor d;
  d.kind = backends::ProviderKind::embedding;
  const PatchGridConfig training{384, 16, 8};
  CHECK(inference_grid(training, 960, d).input_side == 960);
  CHECK(inference_grid(training, 970, d).input_side == 384);
  d.supports_inference_resize = false;
  CHECK(inference_grid(training, 960, d).input_side == 384);
}

TEST_CASE("a horse image that also shows a person is relabeled with both") {
  backends::SimulatorState state;
  state.seed = 11;
  state.embedding_dim = 16;
  state.concepts = {"horse", "person", "dog", "cat", "sofa"};
  state.extra_object_probability = 0.0;
  const auto providers = backends::make_simulated_providers(state);
  TempDir dir;
  const PatchGridConfig grid{96, 16, 16};

  auto make_image = [&](const std::string& prompt, std::int64_t seed) {
    const auto img = backends::generate_image(*providers.image, {prompt, seed, 96});
    ImageRecord r;
    r.image_id = "img" + std::to_string(seed);
    r.prompt_id = "p";
    r.file_path = "images/" + r.image_id + ".png";
    write_file_atomic(dir / r.file_path, std::span<const std::uint8_t>(img.png));
    return r;
  };

  std::vector<TrainingSample> samples;
  std::int64_t seed = 0;
  for (int round = 0; round < 12; ++round) {
    for (std::size_t c = 0; c < state.concepts.size(); ++c) {
      const auto img = make_image("a " + state.concepts[c] + " outdoors", ++seed);
      samples.push_back({patch_embed(img, grid, *providers.embedder, dir.path()),
                         target_from_labels({static_cast<ClassId>(c)}, state.concepts.size())});
    }
    const auto both = make_image("a person next to a dog", ++seed);
    samples.push_back({patch_embed(both, grid, *providers.embedder, dir.path()),
                       target_from_labels({1, 2}, state.concepts.size())});
  }
  TrainConfig config;
  config.learning_rate = 0.05;
  config.decayed_learning_rate = 0.01;
  const auto result = train(samples, grid, state.concepts.size(), config);

  const auto horse_only = make_image("a horse grazing", 1000);
  const auto horse_and_person = make_image("a horse with a person holding its bridle", 1001);
  CHECK(relabel(horse_only, result.classifier, grid, *providers.embedder, 0.5, dir.path()) == std::set<ClassId>{0});
  CHECK(relabel(horse_and_person, result.classifier, grid, *providers.embedder, 0.5, dir.path()) ==
        std::set<ClassId>{0, 1});
}
