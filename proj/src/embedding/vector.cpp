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

#include "synthforge/embedding/vector.hpp"

#include <algorithm>
#include <cmath>

#include "synthforge/core/errors.hpp"

namespace synthforge::embedding {

EmbeddingVector::EmbeddingVector(std::vector<float> values) : values_(std::move(values)) {
  if (values_.empty()) throw InvariantError("embedding vector must have positive dimension");
  for (float x : values_) {
    if (!std::isfinite(x)) throw InvariantError("embedding vector has a non-finite entry");
  }
}

EmbeddingVector EmbeddingVector::from_doubles(std::span<const double> values) {
  return EmbeddingVector(std::vector<float>(values.begin(), values.end()));
}

double EmbeddingVector::norm() const {
  double sum = 0.0;
  for (float x : values_) sum += static_cast<double>(x) * x;
  return std::sqrt(sum);
}

double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dimension() != b.dimension()) throw DimensionMismatchError(a.dimension(), b.dimension());
  const auto av = a.values();
  const auto bv = b.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) sum += static_cast<double>(av[i]) * bv[i];
  return sum;
}

EmbeddingVector normalize(const EmbeddingVector& v) {
  const double n = v.norm();
  if (n == 0.0 || !std::isfinite(n)) throw DegenerateInputError("cannot normalize a zero vector");
  std::vector<float> out(v.dimension());
  const auto in = v.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<float>(in[i] / n);
  return EmbeddingVector(std::move(out));
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dimension() != b.dimension()) throw DimensionMismatchError(a.dimension(), b.dimension());
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw DegenerateInputError("cosine of a zero vector");
  return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

double scaled_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  return (1.0 + cosine(a, b)) / 2.0;
}

bool is_unit(const EmbeddingVector& v, double tolerance) {
  return std::abs(v.norm() - 1.0) <= tolerance;
}

}  // namespace synthforge::embedding
