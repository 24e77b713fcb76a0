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

#include "synthforge/embedding/neighbor_index.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numeric>

#include "synthforge/core/binary_io.hpp"
#include "synthforge/core/errors.hpp"

namespace synthforge::embedding {

namespace {

constexpr char kMagic[4] = {'S', 'F', 'N', 'X'};
constexpr std::uint32_t kSnapshotVersion = 1;

double dot_span(std::span<const float> a, std::span<const float> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += static_cast<double>(a[i]) * b[i];
  return sum;
}

}  // namespace

const char* to_string(SearchMode mode) {
  return mode == SearchMode::exact ? "exact" : "approximate";
}

SearchMode search_mode_from_string(const std::string& s) {
  if (s == "exact") return SearchMode::exact;
  if (s == "approximate") return SearchMode::approximate;
  throw ConfigError("unknown search mode '" + s + "'");
}

struct NeighborIndex::Partition {
  std::size_t trained_size = 0;
  std::vector<std::vector<float>> centroids;
  std::vector<std::vector<std::size_t>> lists;
};

NeighborIndex::NeighborIndex(std::size_t dimension, SearchMode mode, ApproximateParams params)
    : dimension_(dimension),
      mode_(mode),
      params_(params),
      mutex_(std::make_unique<std::shared_mutex>()) {
  if (dimension == 0) throw InvariantError("index dimension must be positive");
  if (!(params_.probe_fraction > 0.0 && params_.probe_fraction <= 1.0)) {
    throw ConfigError("probe_fraction must be in (0, 1]");
  }
}

NeighborIndex::NeighborIndex(NeighborIndex&&) noexcept = default;
NeighborIndex& NeighborIndex::operator=(NeighborIndex&&) noexcept = default;
NeighborIndex::~NeighborIndex() = default;

void NeighborIndex::insert(const std::string& id, const EmbeddingVector& v) {
  if (v.dimension() != dimension_) throw DimensionMismatchError(dimension_, v.dimension());
  if (!is_unit(v)) throw InvariantError("index vectors must be unit-norm");
  std::unique_lock lock(*mutex_);
  if (positions_.contains(id)) throw DuplicateIdError("duplicate index id '" + id + "'");
  const std::size_t position = ids_.size();
  data_.insert(data_.end(), v.values().begin(), v.values().end());
  norms_.push_back(v.norm());
  ids_.push_back(id);
  positions_.emplace(id, position);

  if (mode_ == SearchMode::approximate) {
    if (partition_ && !partition_->centroids.empty()) {
      // Route into the closest existing bucket until the next retrain.
      const std::span<const float> x(data_.data() + position * dimension_, dimension_);
      std::size_t best = 0;
      double best_sim = -2.0;
      for (std::size_t c = 0; c < partition_->centroids.size(); ++c) {
        const double s = dot_span(x, partition_->centroids[c]);
        if (s > best_sim) {
          best_sim = s;
          best = c;
        }
      }
      partition_->lists[best].push_back(position);
    }
    maybe_retrain();
  }
}

void NeighborIndex::maybe_retrain() {
  const std::size_t n = ids_.size();
  if (n < params_.min_train_size) return;
  if (partition_ && n < 2 * partition_->trained_size) return;

  auto part = std::make_unique<Partition>();
  part->trained_size = n;
  const std::size_t nlist = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(std::sqrt(n))));

  // Deterministic training sample: evenly strided positions.
  const std::size_t sample_size = std::min(n, nlist * params_.train_sample_per_list);
  std::vector<std::size_t> sample(sample_size);
  for (std::size_t i = 0; i < sample_size; ++i) sample[i] = i * n / sample_size;

  auto row = [&](std::size_t pos) {
    return std::span<const float>(data_.data() + pos * dimension_, dimension_);
  };
  part->centroids.resize(nlist);
  for (std::size_t c = 0; c < nlist; ++c) {
    const auto r = row(sample[c * sample_size / nlist]);
    part->centroids[c].assign(r.begin(), r.end());
  }

  auto closest = [&](std::span<const float> x) {
    std::size_t best = 0;
    double best_sim = -2.0;
    for (std::size_t c = 0; c < nlist; ++c) {
      const double s = dot_span(x, part->centroids[c]);
      if (s > best_sim) {
        best_sim = s;
        best = c;
      }
    }
    return best;
  };

  std::vector<double> accum(nlist * dimension_);
  std::vector<std::size_t> counts(nlist);
  for (int iter = 0; iter < params_.kmeans_iterations; ++iter) {
    std::fill(accum.begin(), accum.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t pos : sample) {
      const auto x = row(pos);
      const std::size_t c = closest(x);
      ++counts[c];
      for (std::size_t d = 0; d < dimension_; ++d) accum[c * dimension_ + d] += x[d];
    }
    for (std::size_t c = 0; c < nlist; ++c) {
      if (counts[c] == 0) continue;  // keep the previous centroid
      double norm = 0.0;
      for (std::size_t d = 0; d < dimension_; ++d) norm += accum[c * dimension_ + d] * accum[c * dimension_ + d];
      norm = std::sqrt(norm);
      if (norm == 0.0) continue;
      for (std::size_t d = 0; d < dimension_; ++d) {
        part->centroids[c][d] = static_cast<float>(accum[c * dimension_ + d] / norm);
      }
    }
  }

  part->lists.resize(nlist);
  for (std::size_t pos = 0; pos < n; ++pos) part->lists[closest(row(pos))].push_back(pos);
  partition_ = std::move(part);
}

double NeighborIndex::similarity_at(std::size_t position, std::span<const float> q,
                                    double q_norm) const {
  const std::span<const float> x(data_.data() + position * dimension_, dimension_);
  return std::clamp(dot_span(x, q) / (norms_[position] * q_norm), -1.0, 1.0);
}

std::optional<Neighbor> NeighborIndex::scan_all(std::span<const float> q, double q_norm) const {
  if (ids_.empty()) return std::nullopt;
  std::size_t best = 0;
  double best_sim = similarity_at(0, q, q_norm);
  for (std::size_t pos = 1; pos < ids_.size(); ++pos) {
    const double s = similarity_at(pos, q, q_norm);
    if (s > best_sim) {  // strict: earlier insertion wins ties
      best_sim = s;
      best = pos;
    }
  }
  return Neighbor{ids_[best], best_sim, best};
}

std::optional<Neighbor> NeighborIndex::scan_partitions(std::span<const float> q,
                                                       double q_norm) const {
  const auto& part = *partition_;
  const std::size_t nlist = part.centroids.size();
  std::vector<std::pair<double, std::size_t>> order(nlist);
  for (std::size_t c = 0; c < nlist; ++c) order[c] = {-dot_span(q, part.centroids[c]), c};
  const std::size_t probes = std::min(
      nlist, std::max<std::size_t>(1, static_cast<std::size_t>(
                                          std::ceil(params_.probe_fraction * static_cast<double>(nlist)))));
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(probes), order.end());

  std::optional<Neighbor> best;
  for (std::size_t k = 0; k < probes; ++k) {
    for (std::size_t pos : part.lists[order[k].second]) {
      const double s = similarity_at(pos, q, q_norm);
      if (!best || s > best->similarity || (s == best->similarity && pos < best->position)) {
        best = Neighbor{ids_[pos], s, pos};
      }
    }
  }
  return best;
}

std::optional<Neighbor> NeighborIndex::nearest(const EmbeddingVector& query) const {
  if (query.dimension() != dimension_) throw DimensionMismatchError(dimension_, query.dimension());
  const double q_norm = query.norm();
  if (q_norm == 0.0) throw DegenerateInputError("nearest-neighbour query is a zero vector");
  std::shared_lock lock(*mutex_);
  if (mode_ == SearchMode::approximate && partition_) return scan_partitions(query.values(), q_norm);
  return scan_all(query.values(), q_norm);
}

std::size_t NeighborIndex::size() const {
  std::shared_lock lock(*mutex_);
  return ids_.size();
}

bool NeighborIndex::contains(const std::string& id) const {
  std::shared_lock lock(*mutex_);
  return positions_.contains(id);
}

std::vector<std::string> NeighborIndex::ids() const {
  std::shared_lock lock(*mutex_);
  return ids_;
}

EmbeddingVector NeighborIndex::vector_at(std::size_t position) const {
  std::shared_lock lock(*mutex_);
  if (position >= ids_.size()) throw InvariantError("index position out of range");
  const auto first = data_.begin() + static_cast<std::ptrdiff_t>(position * dimension_);
  return EmbeddingVector(std::vector<float>(first, first + static_cast<std::ptrdiff_t>(dimension_)));
}

void NeighborIndex::save(const std::filesystem::path& path) const {
  std::shared_lock lock(*mutex_);
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write index snapshot " + tmp.string());
    out.write(kMagic, 4);
    put_le<std::uint32_t>(out, kSnapshotVersion);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dimension_));
    put_le<std::uint64_t>(out, ids_.size());
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(mode_));
    put_le<double>(out, params_.probe_fraction);
    for (const auto& id : ids_) {
      put_le<std::uint32_t>(out, static_cast<std::uint32_t>(id.size()));
      out.write(id.data(), static_cast<std::streamsize>(id.size()));
    }
    for (float x : data_) put_le<float>(out, x);
    if (!out) throw Error("failed writing index snapshot " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

NeighborIndex NeighborIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open index snapshot " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || !std::equal(magic, magic + 4, kMagic)) throw Error("not an index snapshot: " + path.string());
  if (get_le<std::uint32_t>(in, "index snapshot") != kSnapshotVersion) throw Error("unsupported index snapshot version");
  const auto dimension = get_le<std::uint32_t>(in, "index snapshot");
  const auto count = get_le<std::uint64_t>(in, "index snapshot");
  const auto mode = get_le<std::uint32_t>(in, "index snapshot");
  ApproximateParams params;
  params.probe_fraction = get_le<double>(in, "index snapshot");
  if (mode > 1) throw Error("index snapshot has an unknown search mode");

  std::vector<std::string> ids(count);
  for (auto& id : ids) {
    const auto len = get_le<std::uint32_t>(in, "index snapshot");
    id.resize(len);
    in.read(id.data(), len);
    if (!in) throw Error("index snapshot truncated");
  }
  NeighborIndex index(dimension, static_cast<SearchMode>(mode), params);
  std::vector<float> values(dimension);
  for (std::uint64_t i = 0; i < count; ++i) {
    for (auto& x : values) x = get_le<float>(in, "index snapshot");
    index.insert(ids[i], EmbeddingVector(values));
  }
  return index;
}

}  // namespace synthforge::embedding
