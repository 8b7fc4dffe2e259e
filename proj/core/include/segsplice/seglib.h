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

#ifndef SEGSPLICE_SEGLIB_H_
#define SEGSPLICE_SEGLIB_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "segsplice/alignment.h"
#include "segsplice/bpe.h"

namespace segsplice {

class FeatureStore;

enum class Level { kWord = 0, kPiece = 1, kGrapheme = 2, kSilence = 3 };

inline constexpr std::array<Level, 4> kAllLevels = {Level::kWord, Level::kPiece,
                                                    Level::kGrapheme, Level::kSilence};
inline constexpr std::string_view kSilenceKey = "<sil>";
inline constexpr std::string_view kLibraryMagic = "#SEGSPLICE-LIB v1";

std::string_view level_name(Level level);
// Accepts "WORD"/"word" etc.
std::optional<Level> parse_level(std::string_view name);

// Handle to a frame span inside one utterance of a FeatureStore. start_frame
// is relative to the utterance's first frame. grapheme_count is 0 for silence.
struct SegmentRef {
  std::string utt_id;
  std::uint64_t start_frame = 0;
  std::uint64_t num_frames = 0;
  std::uint32_t grapheme_count = 0;
  std::string domain;

  std::uint64_t end_frame() const { return start_frame + num_frames; }
  friend bool operator==(const SegmentRef&, const SegmentRef&) = default;
};

struct DurationBounds {
  std::uint64_t min_avg = 2;       // frames per grapheme, inclusive
  std::uint64_t max_avg = 30;      // frames per grapheme, inclusive
  std::uint64_t silence_max = 50;  // silence is truncated to this length

  bool admits(std::uint64_t num_frames, std::uint32_t grapheme_count) const {
    return grapheme_count > 0 && num_frames >= min_avg * grapheme_count &&
           num_frames <= max_avg * grapheme_count;
  }
};

struct LibraryCaps {
  std::size_t word = 500;
  std::size_t piece = 500;
  std::size_t grapheme = 100;
  std::size_t silence = 500;

  std::size_t at(Level level) const;
};

// Instances per unit string at one level, capped.
class UnitLibrary {
 public:
  using Entries = std::map<std::string, std::vector<SegmentRef>, std::less<>>;

  UnitLibrary(Level level, std::size_t cap) : level_(level), cap_(cap) {}

  Level level() const { return level_; }
  std::size_t cap() const { return cap_; }
  const Entries& entries() const { return entries_; }

  const std::vector<SegmentRef>* find(std::string_view unit) const;
  bool contains(std::string_view unit) const { return find(unit) != nullptr; }
  std::size_t unit_count() const { return entries_.size(); }
  std::size_t instance_count() const;
  bool empty() const { return entries_.empty(); }

  // Appends an instance; throws kInvalidArgument when the unit is full.
  void add(std::string_view unit, SegmentRef ref);
  // Overwrites one slot of an existing unit.
  void replace(std::string_view unit, std::size_t index, SegmentRef ref);

  friend bool operator==(const UnitLibrary&, const UnitLibrary&) = default;

 private:
  Level level_;
  std::size_t cap_;
  Entries entries_;
};

struct LibrarySet {
  explicit LibrarySet(const LibraryCaps& caps = {})
      : words(Level::kWord, caps.word),
        pieces(Level::kPiece, caps.piece),
        graphemes(Level::kGrapheme, caps.grapheme),
        silence(Level::kSilence, caps.silence) {}

  UnitLibrary words;
  UnitLibrary pieces;
  UnitLibrary graphemes;
  UnitLibrary silence;
  BpeModel bpe;
  std::set<std::string> domains;

  const UnitLibrary& at(Level level) const;
  UnitLibrary& at(Level level);

  friend bool operator==(const LibrarySet&, const LibrarySet&) = default;
};

struct Candidate {
  Level level;
  std::string unit;
  SegmentRef ref;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

// Every candidate an utterance yields before duration filtering, in token
// order: for each word its WORD span, then its PIECE spans (only when every
// grapheme is in the BPE alphabet), then one GRAPHEME per token; one SILENCE
// per silence token, untrimmed. Piece i ends where piece i+1 starts, so the
// pieces tile the word span even across gaps between grapheme tokens.
std::vector<Candidate> extract_raw_candidates(const UtteranceAlignment& utt,
                                              const BpeModel& bpe);

// Applies the duration bounds; silence is truncated to silence_max rather
// than dropped.
std::optional<Candidate> apply_duration_filter(Candidate candidate,
                                               const DurationBounds& bounds);

std::vector<Candidate> extract_candidates(const UtteranceAlignment& utt,
                                          const BpeModel& bpe,
                                          const DurationBounds& bounds = {});

struct BuildOptions {
  LibraryCaps caps;
  DurationBounds bounds;
  std::uint64_t seed = 17;
  std::size_t jobs = 1;
  std::set<std::string> domains;  // empty: all domains
};

struct LevelBuildStats {
  std::uint64_t seen = 0;
  std::uint64_t filtered = 0;
  std::uint64_t stored = 0;
};

struct BuildSummary {
  std::uint64_t utterances_used = 0;
  std::uint64_t utterances_skipped = 0;  // outside the domain filter
  std::array<LevelBuildStats, 4> levels{};
};

// Uniform reservoir sample of at most cap instances per unit. The draw for
// the i-th candidate of a unit depends only on (seed, level, unit, i), so the
// result is a function of the seed and corpus order alone. Throws
// kEmptyCorpus when nothing survives filtering.
LibrarySet build_libraries(const std::vector<UtteranceAlignment>& alignments,
                           const BpeModel& bpe, const BuildOptions& options,
                           BuildSummary* summary = nullptr);

// A library directory holds words.lib, pieces.lib, graphemes.lib,
// silence.lib, and bpe.model.
std::filesystem::path library_file(const std::filesystem::path& dir, Level level);
std::filesystem::path library_bpe_file(const std::filesystem::path& dir);

void save_libraries(const LibrarySet& libs, const std::filesystem::path& dir);

// With a store, refs that do not resolve inside it raise kDanglingRef listing
// every offender.
LibrarySet load_libraries(const std::filesystem::path& dir,
                          const FeatureStore* store = nullptr);

std::vector<std::string> check_library_refs(const LibrarySet& libs,
                                            const FeatureStore& store);

}  // namespace segsplice

#endif  // SEGSPLICE_SEGLIB_H_
