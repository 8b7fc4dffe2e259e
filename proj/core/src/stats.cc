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

#include "segsplice/stats.h"

#include <algorithm>
#include <array>
#include <iomanip>
#include <istream>
#include <set>
#include <sstream>

#include "segsplice/error.h"
#include "segsplice/synth.h"
#include "segsplice/text.h"

namespace segsplice {
namespace {

double fraction(std::uint64_t n, std::uint64_t d) {
  return d == 0 ? 0.0 : static_cast<double>(n) / static_cast<double>(d);
}

void check_speech_level(Level level) {
  if (level == Level::kSilence) {
    throw Error(ErrorCode::kInvalidArgument, "duration histograms need a speech level");
  }
}

void add_sample(DurationHistogram& h, std::uint64_t frames, std::uint32_t graphemes) {
  const std::uint64_t bin = frames / (static_cast<std::uint64_t>(graphemes) * h.bin_width);
  if (h.bins.size() <= bin) h.bins.resize(bin + 1, 0);
  ++h.bins[bin];
  ++h.total;
  if (frames > h.max_avg * graphemes) ++h.above_max;
}

std::string fixed4(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << v;
  return os.str();
}

}  // namespace

SentenceCoverage classify_sentence(const std::vector<std::string>& words,
                                   const LibrarySet& libs) {
  auto worst = SentenceCoverage::kWord;
  for (const std::string& w : words) {
    const WordResolution res = resolve_word(w, libs);
    if (!res.level) return SentenceCoverage::kUncoverable;
    const auto c = *res.level == Level::kWord    ? SentenceCoverage::kWord
                   : *res.level == Level::kPiece ? SentenceCoverage::kPiece
                                                 : SentenceCoverage::kGrapheme;
    worst = std::max(worst, c);
  }
  return worst;
}

double CoverageReport::word_fraction() const { return fraction(word_only, total); }
double CoverageReport::word_piece_fraction() const {
  return fraction(word_only + needs_piece, total);
}
double CoverageReport::grapheme_fraction() const { return fraction(needs_grapheme, total); }
double CoverageReport::uncoverable_fraction() const { return fraction(uncoverable, total); }

CoverageReport coverage(const std::vector<std::string>& sentences,
                        const LibrarySet& libs) {
  CoverageReport r;
  for (const std::string& raw : sentences) {
    const auto words = split_words(normalize_text(raw));
    if (words.empty()) continue;
    ++r.total;
    switch (classify_sentence(words, libs)) {
      case SentenceCoverage::kWord: ++r.word_only; break;
      case SentenceCoverage::kPiece: ++r.needs_piece; break;
      case SentenceCoverage::kGrapheme: ++r.needs_grapheme; break;
      case SentenceCoverage::kUncoverable: ++r.uncoverable; break;
    }
  }
  return r;
}

CoverageReport coverage(std::istream& sentences, const LibrarySet& libs) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(sentences, line)) lines.push_back(std::move(line));
  return coverage(lines, libs);
}

DurationHistogram duration_histogram(const LibrarySet& libs, Level level,
                                     std::uint64_t bin_width, std::uint64_t max_avg) {
  check_speech_level(level);
  if (bin_width == 0) throw Error(ErrorCode::kInvalidArgument, "bin width must be >= 1");
  DurationHistogram h{level, bin_width, true, {}, 0, max_avg, 0};
  for (const auto& [unit, refs] : libs.at(level).entries()) {
    for (const SegmentRef& r : refs) add_sample(h, r.num_frames, r.grapheme_count);
  }
  return h;
}

DurationHistogram duration_histogram(const std::vector<UtteranceAlignment>& alignments,
                                     const BpeModel& bpe, Level level,
                                     std::uint64_t bin_width, std::uint64_t max_avg) {
  check_speech_level(level);
  if (bin_width == 0) throw Error(ErrorCode::kInvalidArgument, "bin width must be >= 1");
  DurationHistogram h{level, bin_width, false, {}, 0, max_avg, 0};
  for (const UtteranceAlignment& utt : alignments) {
    for (const Candidate& c : extract_raw_candidates(utt, bpe)) {
      if (c.level == level) add_sample(h, c.ref.num_frames, c.ref.grapheme_count);
    }
  }
  return h;
}

UnitCountReport unit_counts(const LibrarySet& libs, bool per_domain) {
  std::map<std::string, std::array<std::set<std::string_view>, 3>> distinct;
  const std::array<Level, 3> levels = {Level::kWord, Level::kPiece, Level::kGrapheme};
  for (std::size_t li = 0; li < levels.size(); ++li) {
    for (const auto& [unit, refs] : libs.at(levels[li]).entries()) {
      for (const SegmentRef& r : refs) {
        distinct[per_domain ? r.domain : std::string(kAllDomains)][li].insert(unit);
      }
    }
  }
  UnitCountReport report;
  for (const auto& [domain, sets] : distinct) {
    report.by_domain[domain] = {sets[0].size(), sets[1].size(), sets[2].size()};
  }
  return report;
}

UnitCountReport unit_counts(const std::vector<UtteranceAlignment>& alignments,
                            const BpeModel& bpe, bool per_domain) {
  std::map<std::string, std::array<std::set<std::string>, 3>> distinct;
  std::vector<std::string> symbols;
  for (const UtteranceAlignment& utt : alignments) {
    auto& sets = distinct[per_domain ? utt.domain : std::string(kAllDomains)];
    for (const AlignedWord& w : utt.words) {
      sets[0].insert(w.text);
      symbols.clear();
      for (std::size_t t = w.first_token; t <= w.last_token; ++t) {
        symbols.push_back(utt.tokens[t].symbol);
        sets[2].insert(utt.tokens[t].symbol);
      }
      if (auto pieces = bpe.try_tokenize(symbols)) {
        for (const Piece& p : *pieces) sets[1].insert(p.text);
      }
    }
  }
  UnitCountReport report;
  for (const auto& [domain, sets] : distinct) {
    report.by_domain[domain] = {sets[0].size(), sets[1].size(), sets[2].size()};
  }
  return report;
}

std::string render(const CoverageReport& r, ReportFormat format) {
  std::ostringstream os;
  if (format == ReportFormat::kKeyValue) {
    os << "coverage.total=" << r.total << '\n'
       << "coverage.word_only=" << r.word_only << '\n'
       << "coverage.needs_piece=" << r.needs_piece << '\n'
       << "coverage.needs_grapheme=" << r.needs_grapheme << '\n'
       << "coverage.uncoverable=" << r.uncoverable << '\n'
       << "coverage.word_fraction=" << fixed4(r.word_fraction()) << '\n'
       << "coverage.word_piece_fraction=" << fixed4(r.word_piece_fraction()) << '\n'
       << "coverage.grapheme_fraction=" << fixed4(r.grapheme_fraction()) << '\n'
       << "coverage.uncoverable_fraction=" << fixed4(r.uncoverable_fraction()) << '\n';
    return os.str();
  }
  os << std::left << std::setw(24) << "units" << std::right << std::setw(12)
     << "sentences" << std::setw(12) << "cumulative" << '\n';
  auto row = [&](std::string_view name, std::uint64_t n, double cum) {
    os << std::left << std::setw(24) << name << std::right << std::setw(12) << n
       << std::setw(12) << fixed4(cum) << '\n';
  };
  row("word", r.word_only, r.word_fraction());
  row("word+piece", r.needs_piece, r.word_piece_fraction());
  row("word+piece+grapheme", r.needs_grapheme,
      r.word_piece_fraction() + r.grapheme_fraction());
  row("uncoverable", r.uncoverable, r.total > 0 ? 1.0 : 0.0);
  os << std::left << std::setw(24) << "total" << std::right << std::setw(12) << r.total
     << '\n';
  return os.str();
}

std::string render(const DurationHistogram& h, ReportFormat format) {
  std::ostringstream os;
  const std::string_view level = level_name(h.level);
  if (format == ReportFormat::kKeyValue) {
    os << "durations.level=" << level << '\n'
       << "durations.mode=" << (h.post_filter ? "post-filter" : "pre-filter") << '\n'
       << "durations.bin_width=" << h.bin_width << '\n'
       << "durations.total=" << h.total << '\n'
       << "durations.above_" << h.max_avg << "=" << h.above_max << '\n';
    for (std::size_t b = 0; b < h.bins.size(); ++b) {
      os << "durations.bin." << b * h.bin_width << '=' << h.bins[b] << '\n';
    }
    return os.str();
  }
  os << "# " << level << " average frames per grapheme ("
     << (h.post_filter ? "post-filter" : "pre-filter") << "), total " << h.total
     << ", above " << h.max_avg << ": " << h.above_max << '\n';
  os << std::left << std::setw(16) << "frames" << std::right << std::setw(12) << "count"
     << '\n';
  for (std::size_t b = 0; b < h.bins.size(); ++b) {
    std::ostringstream label;
    label << '[' << b * h.bin_width << ", " << (b + 1) * h.bin_width << ')';
    os << std::left << std::setw(16) << label.str() << std::right << std::setw(12)
       << h.bins[b] << '\n';
  }
  return os.str();
}

std::string render(const UnitCountReport& r, ReportFormat format) {
  std::ostringstream os;
  if (format == ReportFormat::kKeyValue) {
    for (const auto& [domain, c] : r.by_domain) {
      os << "units." << domain << ".word=" << c.words << '\n'
         << "units." << domain << ".piece=" << c.pieces << '\n'
         << "units." << domain << ".grapheme=" << c.graphemes << '\n';
    }
    return os.str();
  }
  os << std::left << std::setw(16) << "Corpus" << std::right << std::setw(12) << "Word"
     << std::setw(16) << "Sentence Piece" << std::setw(12) << "Grapheme" << '\n';
  for (const auto& [domain, c] : r.by_domain) {
    os << std::left << std::setw(16) << domain << std::right << std::setw(12) << c.words
       << std::setw(16) << c.pieces << std::setw(12) << c.graphemes << '\n';
  }
  return os.str();
}

}  // namespace segsplice
