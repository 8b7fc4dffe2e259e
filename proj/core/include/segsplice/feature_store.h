// Copyright 2026 The segsplice Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SEGSPLICE_FEATURE_STORE_H_
#define SEGSPLICE_FEATURE_STORE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace segsplice {

inline constexpr std::size_t kDefaultFeatureDim = 80;
inline constexpr std::string_view kFeatureIndexMagic = "#SEGSPLICE-FEAT v1";

// Dense row-major frames x dim matrix. One row per 10 ms frame.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols, float fill = 0.0f)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::span<float> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const float> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  float& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  float operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const float> values() const { return data_; }

  // Appends frames; frames.size() must be a multiple of cols().
  void append_rows(std::span<const float> frames);

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<float> data_;
};

// A store named "feats" lives in "feats.index" (text) and "feats.data"
// (little-endian float32, frames concatenated in index order).
struct StorePaths {
  std::filesystem::path index;
  std::filesystem::path data;

  static StorePaths from_stem(const std::filesystem::path& stem);
};

struct UttExtent {
  std::string utt_id;
  std::uint64_t frame_offset = 0;
  std::uint64_t num_frames = 0;

  friend bool operator==(const UttExtent&, const UttExtent&) = default;
};

// Read-only, memory-mapped feature store. Immutable after open; safe for
// concurrent readers.
class FeatureStore {
 public:
  static FeatureStore open(const std::filesystem::path& stem);

  FeatureStore(FeatureStore&&) noexcept;
  FeatureStore& operator=(FeatureStore&&) noexcept;
  FeatureStore(const FeatureStore&) = delete;
  FeatureStore& operator=(const FeatureStore&) = delete;
  ~FeatureStore();

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return extents_.size(); }
  std::uint64_t total_frames() const { return total_frames_; }
  const std::vector<UttExtent>& utterances() const { return extents_; }

  const UttExtent* find(std::string_view utt_id) const;
  bool contains(std::string_view utt_id) const { return find(utt_id) != nullptr; }

  // Frames [start, start + num_frames) of one utterance, relative to the
  // utterance's first frame. Empty optional when the utterance is unknown or
  // the span leaves the utterance.
  std::optional<std::span<const float>> try_view(std::string_view utt_id,
                                                 std::uint64_t start,
                                                 std::uint64_t num_frames) const;
  // Throws kUnknownUtterance or kSpanOutOfRange instead.
  std::span<const float> view(std::string_view utt_id, std::uint64_t start,
                              std::uint64_t num_frames) const;
  FeatureMatrix slice(std::string_view utt_id, std::uint64_t start,
                      std::uint64_t num_frames) const;
  FeatureMatrix utterance(std::string_view utt_id) const;

 private:
  FeatureStore() = default;

  std::size_t dim_ = 0;
  std::uint64_t total_frames_ = 0;
  std::vector<UttExtent> extents_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
  void* mapping_ = nullptr;
  std::size_t mapping_bytes_ = 0;
  std::vector<float> owned_;  // used when the host is not little-endian
  const float* frames_ = nullptr;
};

// Streams utterances into a new store; close() (or destruction) finalizes the
// index. Entries are written in append order.
class FeatureStoreWriter {
 public:
  FeatureStoreWriter(const std::filesystem::path& stem, std::size_t dim);
  ~FeatureStoreWriter();
  FeatureStoreWriter(const FeatureStoreWriter&) = delete;
  FeatureStoreWriter& operator=(const FeatureStoreWriter&) = delete;

  void append(std::string_view utt_id, const FeatureMatrix& frames);
  void close();

  std::size_t dim() const { return dim_; }
  std::uint64_t frames_written() const { return offset_; }

 private:
  std::size_t dim_;
  StorePaths paths_;
  std::ofstream index_;
  std::ofstream data_;
  std::uint64_t offset_ = 0;
  std::map<std::string, bool, std::less<>> seen_;
  bool closed_ = false;
};

void write_feature_store(
    const std::vector<std::pair<std::string, FeatureMatrix>>& entries,
    const std::filesystem::path& stem, std::size_t dim = kDefaultFeatureDim);

}  // namespace segsplice

#endif  // SEGSPLICE_FEATURE_STORE_H_
