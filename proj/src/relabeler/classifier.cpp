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

#include "synthforge/relabeler/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "synthforge/core/binary_io.hpp"
#include "synthforge/core/errors.hpp"
#include "synthforge/core/hash.hpp"

namespace synthforge::relabeler {

namespace {

constexpr char kMagic[4] = {'S', 'F', 'C', 'K'};
constexpr std::uint32_t kCheckpointVersion = 1;

void check_target(const MultiLabelTarget& y, Eigen::Index classes) {
  if (y.size() != classes) {
    throw DimensionMismatchError(static_cast<std::size_t>(classes), static_cast<std::size_t>(y.size()));
  }
}

}  // namespace

const char* to_string(Head head) { return head == Head::softmax ? "softmax" : "sigmoid"; }

Head head_from_string(const std::string& s) {
  if (s == "softmax") return Head::softmax;
  if (s == "sigmoid") return Head::sigmoid;
  throw ConfigError("unknown classifier head '" + s + "'");
}

ScoreMatrix forward(const PatchEmbeddingMatrix& f, const Eigen::MatrixXd& w, Head head) {
  if (f.cols() != w.rows()) {
    throw DimensionMismatchError(static_cast<std::size_t>(w.rows()), static_cast<std::size_t>(f.cols()));
  }
  ScoreMatrix logits = f * w;
  if (!logits.allFinite()) throw DegenerateInputError("non-finite logits");
  if (head == Head::sigmoid) {
    return logits.unaryExpr([](double a) { return 1.0 / (1.0 + std::exp(-a)); });
  }
  for (Eigen::Index p = 0; p < logits.rows(); ++p) {
    const double m = logits.row(p).maxCoeff();
    logits.row(p) = (logits.row(p).array() - m).exp().matrix();
    logits.row(p) /= logits.row(p).sum();
  }
  return logits;
}

PredictionVector max_pool(const ScoreMatrix& z, std::vector<Eigen::Index>* argmax) {
  if (z.rows() == 0) throw DegenerateInputError("cannot pool an empty score matrix");
  PredictionVector y(z.cols());
  if (argmax) argmax->assign(static_cast<std::size_t>(z.cols()), 0);
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    Eigen::Index best = 0;
    for (Eigen::Index p = 1; p < z.rows(); ++p) {
      if (z(p, c) > z(best, c)) best = p;
    }
    y(c) = z(best, c);
    if (argmax) (*argmax)[static_cast<std::size_t>(c)] = best;
  }
  return y;
}

double bce_loss(const PredictionVector& y_hat, const MultiLabelTarget& y) {
  check_target(y, y_hat.size());
  if (y_hat.size() == 0) throw DegenerateInputError("empty prediction");
  double sum = 0.0;
  for (Eigen::Index c = 0; c < y_hat.size(); ++c) {
    const double p = std::clamp(y_hat(c), kProbabilityClip, 1.0 - kProbabilityClip);
    sum += y(c) * std::log(p) + (1.0 - y(c)) * std::log(1.0 - p);
  }
  return -sum / static_cast<double>(y_hat.size());
}

Eigen::MatrixXd loss_gradient(const PatchEmbeddingMatrix& f, const Eigen::MatrixXd& w, const MultiLabelTarget& y,
                              Head head) {
  const ScoreMatrix z = forward(f, w, head);
  check_target(y, z.cols());
  std::vector<Eigen::Index> argmax;
  const PredictionVector y_hat = max_pool(z, &argmax);
  const auto classes = z.cols();

  // dL/dZ is nonzero only at each column's argmax row.
  ScoreMatrix dz = ScoreMatrix::Zero(z.rows(), classes);
  for (Eigen::Index c = 0; c < classes; ++c) {
    const double p = y_hat(c);
    if (p < kProbabilityClip || p > 1.0 - kProbabilityClip) continue;
    const double g = -(y(c) / p - (1.0 - y(c)) / (1.0 - p)) / static_cast<double>(classes);
    dz(argmax[static_cast<std::size_t>(c)], c) = g;
  }

  ScoreMatrix da(z.rows(), classes);
  if (head == Head::sigmoid) {
    da = dz.array() * z.array() * (1.0 - z.array());
  } else {
    for (Eigen::Index p = 0; p < z.rows(); ++p) {
      const double inner = z.row(p).dot(dz.row(p));
      da.row(p) = z.row(p).array() * (dz.row(p).array() - inner);
    }
  }
  return f.transpose() * da;
}

LinearClassifier::LinearClassifier(PatchGridConfig grid, std::size_t num_classes, Head head)
    : grid_(grid), head_(head) {
  grid_.validate();
  if (grid_.embedding_dim == 0) throw ConfigError("classifier embedding dimension must be positive");
  if (num_classes == 0) throw ConfigError("classifier needs at least one class");
  const auto e = static_cast<Eigen::Index>(grid_.embedding_dim);
  const auto c = static_cast<Eigen::Index>(num_classes);
  w_ = Eigen::MatrixXd::Zero(e, c);
  m_ = Eigen::MatrixXd::Zero(e, c);
  v_ = Eigen::MatrixXd::Zero(e, c);
}

void LinearClassifier::set_weights(const Eigen::MatrixXd& w) {
  if (w.rows() != w_.rows() || w.cols() != w_.cols()) {
    throw DimensionMismatchError(static_cast<std::size_t>(w_.size()), static_cast<std::size_t>(w.size()));
  }
  if (!w.allFinite()) throw InvariantError("classifier weights must be finite");
  w_ = w;
}

PredictionVector LinearClassifier::predict(const PatchEmbeddingMatrix& f) const {
  return max_pool(forward(f, w_, head_));
}

double LinearClassifier::loss(const PatchEmbeddingMatrix& f, const MultiLabelTarget& y) const {
  return bce_loss(predict(f), y);
}

void LinearClassifier::adam_step(const Eigen::MatrixXd& gradient, double learning_rate, const AdamParams& params) {
  if (gradient.rows() != w_.rows() || gradient.cols() != w_.cols()) {
    throw DimensionMismatchError(static_cast<std::size_t>(w_.size()), static_cast<std::size_t>(gradient.size()));
  }
  ++step_;
  m_ = params.beta1 * m_ + (1.0 - params.beta1) * gradient;
  v_ = params.beta2 * v_ + (1.0 - params.beta2) * gradient.cwiseProduct(gradient);
  const double t = static_cast<double>(step_);
  const double m_correction = 1.0 - std::pow(params.beta1, t);
  const double v_correction = 1.0 - std::pow(params.beta2, t);
  w_.array() -= learning_rate * (m_.array() / m_correction) /
                ((v_.array() / v_correction).sqrt() + params.epsilon);
  if (!w_.allFinite()) throw InvariantError("classifier weights became non-finite");
}

void LinearClassifier::save(const std::filesystem::path& path) const {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write checkpoint " + tmp.string());
    out.write(kMagic, 4);
    put_le<std::uint32_t>(out, kCheckpointVersion);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(w_.rows()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(w_.cols()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(grid_.input_side));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(grid_.patch_side));
    put_le<std::uint64_t>(out, step_);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(head_));
    for (Eigen::Index i = 0; i < w_.rows(); ++i)
      for (Eigen::Index j = 0; j < w_.cols(); ++j) put_le<float>(out, static_cast<float>(w_(i, j)));
    if (!out) throw Error("failed writing checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

LinearClassifier LinearClassifier::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || !std::equal(magic, magic + 4, kMagic)) throw Error(path.string() + " is not a classifier checkpoint");
  const std::string what = "checkpoint " + path.string();
  if (get_le<std::uint32_t>(in, what) != kCheckpointVersion) throw Error("unsupported checkpoint version");
  PatchGridConfig grid;
  grid.embedding_dim = get_le<std::uint32_t>(in, what);
  const auto classes = get_le<std::uint32_t>(in, what);
  grid.input_side = static_cast<int>(get_le<std::uint32_t>(in, what));
  grid.patch_side = static_cast<int>(get_le<std::uint32_t>(in, what));
  const auto step = get_le<std::uint64_t>(in, what);
  const auto head_code = get_le<std::uint32_t>(in, what);
  if (head_code > 1) throw Error("unknown head in " + what);
  LinearClassifier classifier(grid, classes, static_cast<Head>(head_code));
  for (Eigen::Index i = 0; i < classifier.w_.rows(); ++i)
    for (Eigen::Index j = 0; j < classifier.w_.cols(); ++j) classifier.w_(i, j) = get_le<float>(in, what);
  if (!classifier.w_.allFinite()) throw Error(what + " holds non-finite weights");
  classifier.step_ = step;
  return classifier;
}

double TrainConfig::learning_rate_for(int epoch) const {
  return epoch <= warmup_epochs ? learning_rate : decayed_learning_rate;
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (epochs < 0) throw ConfigError("epochs must be non-negative");
  if (warmup_epochs < 0) throw ConfigError("warmup_epochs must be non-negative");
  if (!(learning_rate > 0.0) || !(decayed_learning_rate > 0.0)) throw ConfigError("learning rates must be positive");
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) throw ConfigError("holdout_fraction must lie in [0, 1)");
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("threshold must lie in [0, 1]");
}

void to_json(nlohmann::json& j, const EpochLog& e) {
  j = nlohmann::json{{"epoch", e.epoch},
                     {"learning_rate", e.learning_rate},
                     {"train_loss", e.train_loss},
                     {"validation_loss", e.validation_loss},
                     {"validation_subset_accuracy", e.validation_subset_accuracy},
                     {"validation_size", e.validation_size},
                     {"best", e.best}};
}

std::set<ClassId> labels_from_prediction(const PredictionVector& y_hat, double threshold) {
  std::set<ClassId> labels;
  if (y_hat.size() == 0) return labels;
  for (Eigen::Index c = 0; c < y_hat.size(); ++c)
    if (y_hat(c) >= threshold) labels.insert(static_cast<ClassId>(c));
  if (labels.empty()) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < y_hat.size(); ++c)
      if (y_hat(c) > y_hat(best)) best = c;
    labels.insert(static_cast<ClassId>(best));
  }
  return labels;
}

double subset_accuracy(const LinearClassifier& classifier, const std::vector<TrainingSample>& samples,
                       const std::vector<std::size_t>& indices, double threshold) {
  if (indices.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto i : indices) {
    const auto predicted = labels_from_prediction(classifier.predict(samples[i].f), threshold);
    std::set<ClassId> target;
    for (Eigen::Index c = 0; c < samples[i].y.size(); ++c)
      if (samples[i].y(c) > 0.5) target.insert(static_cast<ClassId>(c));
    if (predicted == target) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(indices.size());
}

namespace {

double mean_loss(const LinearClassifier& classifier, const std::vector<TrainingSample>& samples,
                 const std::vector<std::size_t>& indices) {
  if (indices.empty()) return 0.0;
  double sum = 0.0;
  for (const auto i : indices) sum += classifier.loss(samples[i].f, samples[i].y);
  return sum / static_cast<double>(indices.size());
}

void shuffle(std::vector<std::size_t>& v, std::uint64_t key) {
  SplitMixStream rng(key);
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.next() % i]);
}

}  // namespace

TrainResult train(const std::vector<TrainingSample>& samples, const PatchGridConfig& grid, std::size_t num_classes,
                  const TrainConfig& config) {
  config.validate();
  if (samples.empty()) throw DegenerateInputError("cannot train on an empty set");
  for (const auto& s : samples) {
    check_patch_matrix(s.f, grid);
    check_target(s.y, static_cast<Eigen::Index>(num_classes));
  }

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle(order, hash_combine(config.seed, fnv1a64("holdout")));
  const auto holdout = static_cast<std::size_t>(std::floor(config.holdout_fraction * static_cast<double>(samples.size())));
  std::vector<std::size_t> validation(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(holdout));
  std::vector<std::size_t> training(order.begin() + static_cast<std::ptrdiff_t>(holdout), order.end());
  std::sort(validation.begin(), validation.end());
  std::sort(training.begin(), training.end());
  const std::vector<std::size_t>& scored = validation.empty() ? training : validation;

  LinearClassifier model(grid, num_classes, config.head);
  TrainResult result{model, {}, 0, training, validation};

  EpochLog initial;
  initial.train_loss = mean_loss(model, samples, training);
  initial.validation_loss = mean_loss(model, samples, scored);
  initial.validation_subset_accuracy = subset_accuracy(model, samples, scored, config.threshold);
  initial.validation_size = scored.size();
  initial.best = true;
  result.log.push_back(initial);
  double best_loss = initial.validation_loss;

  std::vector<std::size_t> epoch_order = training;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const double lr = config.learning_rate_for(epoch);
    shuffle(epoch_order, hash_combine(config.seed, static_cast<std::uint64_t>(epoch)));
    for (std::size_t start = 0; start < epoch_order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(epoch_order.size(), start + static_cast<std::size_t>(config.batch_size));
      Eigen::MatrixXd gradient = Eigen::MatrixXd::Zero(model.weights().rows(), model.weights().cols());
      for (std::size_t k = start; k < end; ++k) {
        const auto& s = samples[epoch_order[k]];
        gradient += loss_gradient(s.f, model.weights(), s.y, config.head);
      }
      gradient /= static_cast<double>(end - start);
      model.adam_step(gradient, lr, config.adam);
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.learning_rate = lr;
    entry.train_loss = mean_loss(model, samples, training);
    entry.validation_loss = mean_loss(model, samples, scored);
    entry.validation_subset_accuracy = subset_accuracy(model, samples, scored, config.threshold);
    entry.validation_size = scored.size();
    if (entry.validation_loss < best_loss) {
      best_loss = entry.validation_loss;
      result.classifier = model;
      result.best_epoch = epoch;
      entry.best = true;
    }
    result.log.push_back(entry);
  }
  return result;
}

}  // namespace synthforge::relabeler
