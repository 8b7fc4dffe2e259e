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

#include "segsplice/feature_store.h"

#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>

#include "segsplice/error.h"
#include "segsplice/text.h"

namespace segsplice {
namespace {

constexpr bool kLittleEndian = std::endian::native == std::endian::little;

std::uint32_t byteswap32(std::uint32_t v) {
  return ((v & 0xFF) << 24) | ((v & 0xFF00) << 8) | ((v >> 8) & 0xFF00) |
         (v >> 24);
}

template <typename T>
bool parse_uint(std::string_view s, T& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

void check_utt_id(std::string_view utt_id) {
  if (utt_id.empty() ||
      utt_id.find_first_of("\t\r\n ") != std::string_view::npos) {
    throw Error(ErrorCode::kInvalidArgument,
                "utterance id must be non-empty without whitespace: '" +
                    std::string(utt_id) + "'");
  }
}

}  // namespace

void FeatureMatrix::append_rows(std::span<const float> frames) {
  if (cols_ == 0 || frames.size() % cols_ != 0) {
    throw Error(ErrorCode::kDimMismatch, "frame block is not a multiple of dim");
  }
  data_.insert(data_.end(), frames.begin(), frames.end());
  rows_ += frames.size() / cols_;
}

StorePaths StorePaths::from_stem(const std::filesystem::path& stem) {
  return {std::filesystem::path(stem.string() + ".index"),
          std::filesystem::path(stem.string() + ".data")};
}

FeatureStore FeatureStore::open(const std::filesystem::path& stem) {
  const StorePaths paths = StorePaths::from_stem(stem);
  std::ifstream index(paths.index);
  if (!index) {
    throw Error(ErrorCode::kMissingFile, paths.index.string());
  }
  if (!std::filesystem::exists(paths.data)) {
    throw Error(ErrorCode::kMissingFile, paths.data.string());
  }

  FeatureStore store;
  std::string line;
  const std::string dim_prefix = std::string(kFeatureIndexMagic) + " dim=";
  if (!std::getline(index, line) || !line.starts_with(dim_prefix) ||
      !parse_uint(std::string_view(line).substr(dim_prefix.size()), store.dim_) ||
      store.dim_ == 0) {
    throw Error(ErrorCode::kBadMagic, paths.index.string() + ": bad header '" +
                                          line + "'");
  }

  std::size_t line_no = 1;
  while (std::getline(index, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_fields(line, '\t');
    UttExtent extent;
    if (fields.size() != 3 || !parse_uint(fields[1], extent.frame_offset) ||
        !parse_uint(fields[2], extent.num_frames)) {
      throw Error(ErrorCode::kBadFormat, paths.index.string() + ":" +
                                             std::to_string(line_no) + ": '" +
                                             line + "'");
    }
    extent.utt_id = std::string(fields[0]);
    if (store.by_id_.contains(extent.utt_id)) {
      throw Error(ErrorCode::kDuplicateUttId, extent.utt_id);
    }
    store.by_id_.emplace(extent.utt_id, store.extents_.size());
    store.extents_.push_back(std::move(extent));
  }

  const std::uintmax_t bytes = std::filesystem::file_size(paths.data);
  const std::uintmax_t frame_bytes = store.dim_ * sizeof(float);
  if (bytes % frame_bytes != 0) {
    throw Error(ErrorCode::kDimMismatch,
                paths.data.string() + ": size " + std::to_string(bytes) +
                    " is not a multiple of dim " + std::to_string(store.dim_));
  }
  store.total_frames_ = bytes / frame_bytes;
  for (const UttExtent& e : store.extents_) {
    if (e.frame_offset > store.total_frames_ ||
        e.num_frames > store.total_frames_ - e.frame_offset) {
      throw Error(ErrorCode::kDimMismatch,
                  "utterance " + e.utt_id + " extends past end of data (" +
                      std::to_string(e.frame_offset + e.num_frames) + " > " +
                      std::to_string(store.total_frames_) + " frames)");
    }
  }

  if (bytes == 0) return store;
  const int fd = ::open(paths.data.c_str(), O_RDONLY);
  if (fd < 0) throw Error(ErrorCode::kIoFailure, paths.data.string());
  void* mapping = ::mmap(nullptr, bytes, PROT_READ, MAP_PRIVATE, fd, 0);
  ::close(fd);
  if (mapping == MAP_FAILED) {
    throw Error(ErrorCode::kIoFailure, "mmap " + paths.data.string());
  }
  store.mapping_ = mapping;
  store.mapping_bytes_ = bytes;
  if constexpr (kLittleEndian) {
    store.frames_ = static_cast<const float*>(mapping);
  } else {
    store.owned_.resize(bytes / sizeof(float));
    const auto* raw = static_cast<const std::uint32_t*>(mapping);
    for (std::size_t i = 0; i < store.owned_.size(); ++i) {
      store.owned_[i] = std::bit_cast<float>(byteswap32(raw[i]));
    }
    store.frames_ = store.owned_.data();
  }
  return store;
}

FeatureStore::FeatureStore(FeatureStore&& other) noexcept { *this = std::move(other); }

FeatureStore& FeatureStore::operator=(FeatureStore&& other) noexcept {
  if (this == &other) return *this;
  if (mapping_ != nullptr) ::munmap(mapping_, mapping_bytes_);
  dim_ = other.dim_;
  total_frames_ = other.total_frames_;
  extents_ = std::move(other.extents_);
  by_id_ = std::move(other.by_id_);
  mapping_ = std::exchange(other.mapping_, nullptr);
  mapping_bytes_ = std::exchange(other.mapping_bytes_, 0);
  const bool owns = !other.owned_.empty();
  owned_ = std::move(other.owned_);
  frames_ = owns ? owned_.data() : std::exchange(other.frames_, nullptr);
  other.frames_ = nullptr;
  return *this;
}

FeatureStore::~FeatureStore() {
  if (mapping_ != nullptr) ::munmap(mapping_, mapping_bytes_);
}

const UttExtent* FeatureStore::find(std::string_view utt_id) const {
  const auto it = by_id_.find(utt_id);
  return it == by_id_.end() ? nullptr : &extents_[it->second];
}

std::optional<std::span<const float>> FeatureStore::try_view(
    std::string_view utt_id, std::uint64_t start, std::uint64_t num_frames) const {
  const UttExtent* e = find(utt_id);
  if (e == nullptr || start > e->num_frames || num_frames > e->num_frames - start) {
    return std::nullopt;
  }
  if (num_frames == 0) return std::span<const float>();
  return std::span<const float>(frames_ + (e->frame_offset + start) * dim_,
                                num_frames * dim_);
}

std::span<const float> FeatureStore::view(std::string_view utt_id,
                                          std::uint64_t start,
                                          std::uint64_t num_frames) const {
  if (auto v = try_view(utt_id, start, num_frames)) return *v;
  if (!contains(utt_id)) {
    throw Error(ErrorCode::kUnknownUtterance, std::string(utt_id));
  }
  throw Error(ErrorCode::kSpanOutOfRange,
              std::string(utt_id) + " [" + std::to_string(start) + ", +" +
                  std::to_string(num_frames) + ")");
}

FeatureMatrix FeatureStore::slice(std::string_view utt_id, std::uint64_t start,
                                  std::uint64_t num_frames) const {
  FeatureMatrix m(0, dim_);
  m.append_rows(view(utt_id, start, num_frames));
  return m;
}

FeatureMatrix FeatureStore::utterance(std::string_view utt_id) const {
  const UttExtent* e = find(utt_id);
  if (e == nullptr) throw Error(ErrorCode::kUnknownUtterance, std::string(utt_id));
  return slice(utt_id, 0, e->num_frames);
}

FeatureStoreWriter::FeatureStoreWriter(const std::filesystem::path& stem,
                                       std::size_t dim)
    : dim_(dim), paths_(StorePaths::from_stem(stem)) {
  if (dim_ == 0) throw Error(ErrorCode::kDimMismatch, "dim must be positive");
  index_.open(paths_.index, std::ios::binary | std::ios::trunc);
  data_.open(paths_.data, std::ios::binary | std::ios::trunc);
  if (!index_ || !data_) {
    throw Error(ErrorCode::kIoFailure, "cannot create store " + stem.string());
  }
  index_ << kFeatureIndexMagic << " dim=" << dim_ << '\n';
}

FeatureStoreWriter::~FeatureStoreWriter() {
  try {
    close();
  } catch (...) {
  }
}

void FeatureStoreWriter::append(std::string_view utt_id,
                                const FeatureMatrix& frames) {
  check_utt_id(utt_id);
  if (frames.cols() != dim_ && frames.rows() != 0) {
    throw Error(ErrorCode::kDimMismatch,
                std::string(utt_id) + ": dim " + std::to_string(frames.cols()) +
                    " != " + std::to_string(dim_));
  }
  if (!seen_.emplace(std::string(utt_id), true).second) {
    throw Error(ErrorCode::kDuplicateUttId, std::string(utt_id));
  }
  const auto values = frames.values();
  if constexpr (kLittleEndian) {
    data_.write(reinterpret_cast<const char*>(values.data()),
                static_cast<std::streamsize>(values.size_bytes()));
  } else {
    for (float v : values) {
      const std::uint32_t le = byteswap32(std::bit_cast<std::uint32_t>(v));
      data_.write(reinterpret_cast<const char*>(&le), sizeof(le));
    }
  }
  index_ << utt_id << '\t' << offset_ << '\t' << frames.rows() << '\n';
  offset_ += frames.rows();
  if (!data_ || !index_) {
    throw Error(ErrorCode::kIoFailure, "write failed for " + std::string(utt_id));
  }
}

void FeatureStoreWriter::close() {
  if (closed_) return;
  closed_ = true;
  index_.close();
  data_.close();
  if (index_.fail() || data_.fail()) {
    throw Error(ErrorCode::kIoFailure, "closing store " + paths_.index.string());
  }
}

void write_feature_store(
    const std::vector<std::pair<std::string, FeatureMatrix>>& entries,
    const std::filesystem::path& stem, std::size_t dim) {
  std::map<std::string_view, bool> ids;
  for (const auto& [id, m] : entries) {
    if (m.cols() != dim && m.rows() != 0) {
      throw Error(ErrorCode::kDimMismatch, id);
    }
    if (!ids.emplace(id, true).second) {
      throw Error(ErrorCode::kDuplicateUttId, id);
    }
  }
  FeatureStoreWriter writer(stem, dim);
  for (const auto& [id, m] : entries) writer.append(id, m);
  writer.close();
}

}  // namespace segsplice
