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

#include <cstddef>
#include <span>
#include <vector>

namespace synthforge::embedding {

// Fixed-length real vector. Entries are stored as 32-bit floats so that a
// vector survives the index snapshot format bit-exactly; all arithmetic on
// them is carried out in double.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  // Throws InvariantError on non-finite entries or an empty vector.
  explicit EmbeddingVector(std::vector<float> values);
  static EmbeddingVector from_doubles(std::span<const double> values);

  std::size_t dimension() const { return values_.size(); }
  std::span<const float> values() const { return values_; }
  float operator[](std::size_t i) const { return values_[i]; }
  double norm() const;

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

 private:
  std::vector<float> values_;
};

double dot(const EmbeddingVector& a, const EmbeddingVector& b);

// Unit-norm copy of v. Zero vectors raise DegenerateInputError.
EmbeddingVector normalize(const EmbeddingVector& v);

// <a,b> / (|a||b|), clamped to [-1, 1].
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

// (1 + cos(a,b)) / 2, in [0, 1].
double scaled_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

bool is_unit(const EmbeddingVector& v, double tolerance = 1e-6);

}  // namespace synthforge::embedding
