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

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "synthforge/core/vocabulary.hpp"
#include "synthforge/relabeler/patch_grid.hpp"

namespace synthforge::relabeler {

// Per-patch activation. softmax normalizes each patch row across classes;
// sigmoid scores every class independently.
enum class Head : std::uint8_t { softmax = 0, sigmoid = 1 };

const char* to_string(Head head);
Head head_from_string(const std::string& s);

using ScoreMatrix = Eigen::MatrixXd;       // s x C
using PredictionVector = Eigen::VectorXd;  // C, entries in [0, 1]
using MultiLabelTarget = Eigen::VectorXd;  // C, entries in {0, 1}

inline constexpr double kProbabilityClip = 1e-7;

// Z = head(F W), row by row. Throws DimensionMismatchError when F's columns
// do not match W's rows and DegenerateInputError on non-finite logits.
ScoreMatrix forward(const PatchEmbeddingMatrix& f, const Eigen::MatrixXd& w, Head head = Head::softmax);

// Column maxima of Z; `argmax` (if given) receives the first row attaining
// each maximum.
PredictionVector max_pool(const ScoreMatrix& z, std::vector<Eigen::Index>* argmax = nullptr);

// Mean binary cross-entropy over classes with predictions clipped to
// [1e-7, 1 - 1e-7].
double bce_loss(const PredictionVector& y_hat, const MultiLabelTarget& y);

// dL/dW for L = bce_loss(max_pool(forward(F, W)), y). The max-pool gradient
// flows only to each column's first argmax row; a clipped prediction passes
// no gradient.
Eigen::MatrixXd loss_gradient(const PatchEmbeddingMatrix& f, const Eigen::MatrixXd& w, const MultiLabelTarget& y,
                              Head head = Head::softmax);

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Linear head W (e x C) over frozen patch embeddings, with Adam state.
class LinearClassifier {
 public:
  LinearClassifier(PatchGridConfig grid, std::size_t num_classes, Head head = Head::softmax);

  const Eigen::MatrixXd& weights() const { return w_; }
  void set_weights(const Eigen::MatrixXd& w);
  const PatchGridConfig& grid() const { return grid_; }
  std::size_t num_classes() const { return static_cast<std::size_t>(w_.cols()); }
  std::size_t embedding_dim() const { return static_cast<std::size_t>(w_.rows()); }
  Head head() const { return head_; }
  std::uint64_t step() const { return step_; }

  PredictionVector predict(const PatchEmbeddingMatrix& f) const;
  double loss(const PatchEmbeddingMatrix& f, const MultiLabelTarget& y) const;

  // One Adam update with the given gradient and learning rate.
  void adam_step(const Eigen::MatrixXd& gradient, double learning_rate, const AdamParams& params = {});

  // Header (magic, version, e, C, input side, patch side, step, head) then W
  // as row-major little-endian float32. Optimizer moments are not stored.
  void save(const std::filesystem::path& path) const;
  static LinearClassifier load(const std::filesystem::path& path);

 private:
  PatchGridConfig grid_;
  Head head_;
  Eigen::MatrixXd w_;
  Eigen::MatrixXd m_;
  Eigen::MatrixXd v_;
  std::uint64_t step_ = 0;
};

struct TrainingSample {
  PatchEmbeddingMatrix f;
  MultiLabelTarget y;
};

struct TrainConfig {
  int batch_size = 16;
  int epochs = 50;
  double learning_rate = 1e-3;
  int warmup_epochs = 2;
  double decayed_learning_rate = 1e-4;
  double holdout_fraction = 0.1;
  double threshold = 0.5;  // for held-out subset accuracy
  Head head = Head::softmax;
  std::uint64_t seed = 0;
  AdamParams adam;

  double learning_rate_for(int epoch) const;  // epochs count from 1
  void validate() const;
};

struct EpochLog {
  int epoch = 0;
  double learning_rate = 0.0;
  double train_loss = 0.0;
  double validation_loss = 0.0;
  double validation_subset_accuracy = 0.0;
  std::size_t validation_size = 0;
  bool best = false;
};

void to_json(nlohmann::json& j, const EpochLog& e);

struct TrainResult {
  LinearClassifier classifier;  // snapshot at the lowest validation loss
  std::vector<EpochLog> log;    // entry 0 is the untrained model
  int best_epoch = 0;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> validation_indices;
};

// Mini-batch Adam from zero weights. A deterministic fraction of the samples
// is held out for validation; with too few samples to hold any out, the
// training set doubles as the validation set.
TrainResult train(const std::vector<TrainingSample>& samples, const PatchGridConfig& grid, std::size_t num_classes,
                  const TrainConfig& config);

// Classes with y_hat >= threshold; the argmax class (lowest id on ties) when
// none qualifies.
std::set<ClassId> labels_from_prediction(const PredictionVector& y_hat, double threshold);

// Held-out metric: fraction of samples whose predicted label set equals the
// target exactly.
double subset_accuracy(const LinearClassifier& classifier, const std::vector<TrainingSample>& samples,
                       const std::vector<std::size_t>& indices, double threshold);

}  // namespace synthforge::relabeler
