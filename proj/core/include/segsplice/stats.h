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

#ifndef SEGSPLICE_STATS_H_
#define SEGSPLICE_STATS_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "segsplice/alignment.h"
#include "segsplice/bpe.h"
#include "segsplice/seglib.h"

namespace segsplice {

enum class ReportFormat { kTable, kKeyValue };

// The weakest level a sentence needs.
enum class SentenceCoverage { kWord, kPiece, kGrapheme, kUncoverable };

SentenceCoverage classify_sentence(const std::vector<std::string>& words,
                                   const LibrarySet& libs);

// Sentences partitioned by the weakest level they need. Empty sentences are
// not counted.
struct CoverageReport {
  std::uint64_t total = 0;
  std::uint64_t word_only = 0;
  std::uint64_t needs_piece = 0;
  std::uint64_t needs_grapheme = 0;
  std::uint64_t uncoverable = 0;

  double word_fraction() const;             // words only
  double word_piece_fraction() const;       // words + pieces, cumulative
  double grapheme_fraction() const;         // requires graphemes
  double uncoverable_fraction() const;
};

CoverageReport coverage(const std::vector<std::string>& sentences,
                        const LibrarySet& libs);
CoverageReport coverage(std::istream& sentences, const LibrarySet& libs);

// Histogram of average frames per grapheme. Bin b counts averages in
// [b * bin_width, (b + 1) * bin_width).
struct DurationHistogram {
  Level level = Level::kWord;
  std::uint64_t bin_width = 5;
  bool post_filter = true;
  std::vector<std::uint64_t> bins;
  std::uint64_t total = 0;
  std::uint64_t max_avg = 30;
  std::uint64_t above_max = 0;  // measured averages strictly above max_avg
};

inline constexpr std::uint64_t kDefaultBinWidth = 5;

// Over stored library instances.
DurationHistogram duration_histogram(const LibrarySet& libs, Level level,
                                     std::uint64_t bin_width = kDefaultBinWidth,
                                     std::uint64_t max_avg = 30);
// Over every raw candidate of the alignments, before filtering.
DurationHistogram duration_histogram(const std::vector<UtteranceAlignment>& alignments,
                                     const BpeModel& bpe, Level level,
                                     std::uint64_t bin_width = kDefaultBinWidth,
                                     std::uint64_t max_avg = 30);

struct UnitCounts {
  std::uint64_t words = 0;
  std::uint64_t pieces = 0;
  std::uint64_t graphemes = 0;

  friend bool operator==(const UnitCounts&, const UnitCounts&) = default;
};

inline constexpr std::string_view kAllDomains = "all";

// Distinct unit strings per domain (or one "all" row).
struct UnitCountReport {
  std::map<std::string, UnitCounts> by_domain;
};

UnitCountReport unit_counts(const LibrarySet& libs, bool per_domain);
UnitCountReport unit_counts(const std::vector<UtteranceAlignment>& alignments,
                            const BpeModel& bpe, bool per_domain);

std::string render(const CoverageReport& report, ReportFormat format);
std::string render(const DurationHistogram& hist, ReportFormat format);
std::string render(const UnitCountReport& report, ReportFormat format);

}  // namespace segsplice

#endif  // SEGSPLICE_STATS_H_
