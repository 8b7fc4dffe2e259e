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

#ifndef SEGSPLICE_ALIGNMENT_H_
#define SEGSPLICE_ALIGNMENT_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace segsplice {

class FeatureStore;

inline constexpr std::string_view kSilenceSymbol = "<sil>";
inline constexpr std::string_view kAlignmentMagic = "#SEGSPLICE-ALIGN v1";

// One aligned grapheme cluster or silence span. Silence has no word index.
struct AlignmentToken {
  std::optional<std::uint32_t> word_index;
  std::string symbol;
  std::uint64_t start_frame = 0;
  std::uint64_t num_frames = 0;

  bool is_silence() const { return !word_index.has_value(); }
  std::uint64_t end_frame() const { return start_frame + num_frames; }

  friend bool operator==(const AlignmentToken&, const AlignmentToken&) = default;
};

// A word is a run of consecutive tokens sharing one word index.
// Tokens [first_token, last_token] are inclusive.
struct AlignedWord {
  std::string text;
  std::uint32_t word_index = 0;
  std::size_t first_token = 0;
  std::size_t last_token = 0;

  std::size_t grapheme_count() const { return last_token - first_token + 1; }

  friend bool operator==(const AlignedWord&, const AlignedWord&) = default;
};

struct UtteranceAlignment {
  std::string utt_id;
  std::string domain;
  std::vector<AlignmentToken> tokens;
  std::vector<AlignedWord> words;

  // Validates ordering and word contiguity and derives words. Throws
  // kOverlapError, kNonContiguousWord, or kMalformedLine.
  static UtteranceAlignment make(std::string utt_id, std::string domain,
                                 std::vector<AlignmentToken> tokens);

  std::uint64_t end_frame() const {
    return tokens.empty() ? 0 : tokens.back().end_frame();
  }
};

// Parses a "#SEGSPLICE-ALIGN v1" file. Lines of one utterance must be
// consecutive. With a store, every utterance must exist in it and fit inside
// its frame range (kUnknownUtterance, kSpanOutOfRange).
std::vector<UtteranceAlignment> parse_alignments(
    const std::filesystem::path& path, const FeatureStore* store = nullptr);
std::vector<UtteranceAlignment> parse_alignments(
    std::istream& in, std::string_view source_name,
    const FeatureStore* store = nullptr);

void write_alignments(std::ostream& out,
                      const std::vector<UtteranceAlignment>& alignments);

// Non-throwing cross-check used by validation: one message per utterance that
// is absent from the store or runs past its last frame.
std::vector<std::string> check_alignments_against_store(
    const std::vector<UtteranceAlignment>& alignments, const FeatureStore& store);

}  // namespace segsplice

#endif  // SEGSPLICE_ALIGNMENT_H_
