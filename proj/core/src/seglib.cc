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

#include "segsplice/seglib.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <random>
#include <unordered_map>

#include "segsplice/error.h"
#include "segsplice/feature_store.h"
#include "segsplice/parallel.h"
#include "segsplice/rng.h"
#include "segsplice/text.h"

namespace segsplice {
namespace {

constexpr std::size_t kExtractBatch = 2048;

template <typename T>
bool parse_uint(std::string_view s, T& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string ref_label(Level level, std::string_view unit, const SegmentRef& r) {
  return std::string(level_name(level)) + " '" + std::string(unit) + "' -> " +
         r.utt_id + " [" + std::to_string(r.start_frame) + ", +" +
         std::to_string(r.num_frames) + ")";
}

// Reservoir state for one unit during a build.
struct Reservoir {
  std::uint64_t seen = 0;
};

}  // namespace

std::string_view level_name(Level level) {
  switch (level) {
    case Level::kWord: return "WORD";
    case Level::kPiece: return "PIECE";
    case Level::kGrapheme: return "GRAPHEME";
    case Level::kSilence: return "SILENCE";
  }
  return "?";
}

std::optional<Level> parse_level(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (Level l : kAllLevels) {
    if (level_name(l) == upper) return l;
  }
  return std::nullopt;
}

std::size_t LibraryCaps::at(Level level) const {
  switch (level) {
    case Level::kWord: return word;
    case Level::kPiece: return piece;
    case Level::kGrapheme: return grapheme;
    case Level::kSilence: return silence;
  }
  return 0;
}

const std::vector<SegmentRef>* UnitLibrary::find(std::string_view unit) const {
  const auto it = entries_.find(unit);
  return it == entries_.end() ? nullptr : &it->second;
}

std::size_t UnitLibrary::instance_count() const {
  std::size_t n = 0;
  for (const auto& [unit, refs] : entries_) n += refs.size();
  return n;
}

void UnitLibrary::add(std::string_view unit, SegmentRef ref) {
  auto it = entries_.find(unit);
  if (it == entries_.end()) it = entries_.emplace(std::string(unit), std::vector<SegmentRef>()).first;
  if (it->second.size() >= cap_) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(level_name(level_)) + " unit '" + std::string(unit) +
                    "' exceeds cap " + std::to_string(cap_));
  }
  it->second.push_back(std::move(ref));
}

void UnitLibrary::replace(std::string_view unit, std::size_t index, SegmentRef ref) {
  entries_.find(unit)->second.at(index) = std::move(ref);
}

const UnitLibrary& LibrarySet::at(Level level) const {
  switch (level) {
    case Level::kWord: return words;
    case Level::kPiece: return pieces;
    case Level::kGrapheme: return graphemes;
    case Level::kSilence: return silence;
  }
  return silence;
}

UnitLibrary& LibrarySet::at(Level level) {
  return const_cast<UnitLibrary&>(std::as_const(*this).at(level));
}

std::vector<Candidate> extract_raw_candidates(const UtteranceAlignment& utt,
                                              const BpeModel& bpe) {
  std::vector<Candidate> out;
  auto make_ref = [&](std::uint64_t start, std::uint64_t end, std::uint32_t graphemes) {
    return SegmentRef{utt.utt_id, start, end - start, graphemes, utt.domain};
  };

  std::size_t next_word = 0;
  std::vector<std::string> symbols;
  for (std::size_t t = 0; t < utt.tokens.size(); ++t) {
    const AlignmentToken& tok = utt.tokens[t];
    if (tok.is_silence()) {
      out.push_back({Level::kSilence, std::string(kSilenceKey),
                     make_ref(tok.start_frame, tok.end_frame(), 0)});
      continue;
    }
    if (next_word >= utt.words.size() || utt.words[next_word].first_token != t) {
      continue;  // interior token, emitted with its word
    }
    const AlignedWord& word = utt.words[next_word++];
    const auto& first = utt.tokens[word.first_token];
    const auto& last = utt.tokens[word.last_token];
    out.push_back({Level::kWord, word.text,
                   make_ref(first.start_frame, last.end_frame(),
                            static_cast<std::uint32_t>(word.grapheme_count()))});

    symbols.clear();
    for (std::size_t i = word.first_token; i <= word.last_token; ++i) {
      symbols.push_back(utt.tokens[i].symbol);
    }
    if (auto pieces = bpe.try_tokenize(symbols)) {
      for (std::size_t p = 0; p < pieces->size(); ++p) {
        const Piece& piece = (*pieces)[p];
        const std::uint64_t start =
            utt.tokens[word.first_token + piece.first_symbol].start_frame;
        const std::uint64_t end =
            p + 1 < pieces->size()
                ? utt.tokens[word.first_token + (*pieces)[p + 1].first_symbol].start_frame
                : last.end_frame();
        out.push_back({Level::kPiece, piece.text,
                       make_ref(start, end, static_cast<std::uint32_t>(piece.symbol_count))});
      }
    }
    for (std::size_t i = word.first_token; i <= word.last_token; ++i) {
      const auto& g = utt.tokens[i];
      out.push_back({Level::kGrapheme, g.symbol, make_ref(g.start_frame, g.end_frame(), 1)});
    }
  }
  return out;
}

std::optional<Candidate> apply_duration_filter(Candidate candidate,
                                               const DurationBounds& bounds) {
  if (candidate.level == Level::kSilence) {
    candidate.ref.num_frames = std::min(candidate.ref.num_frames, bounds.silence_max);
    if (candidate.ref.num_frames == 0) return std::nullopt;
    return candidate;
  }
  if (!bounds.admits(candidate.ref.num_frames, candidate.ref.grapheme_count)) {
    return std::nullopt;
  }
  return candidate;
}

std::vector<Candidate> extract_candidates(const UtteranceAlignment& utt,
                                          const BpeModel& bpe,
                                          const DurationBounds& bounds) {
  std::vector<Candidate> out;
  for (Candidate& c : extract_raw_candidates(utt, bpe)) {
    if (auto kept = apply_duration_filter(std::move(c), bounds)) {
      out.push_back(std::move(*kept));
    }
  }
  return out;
}

LibrarySet build_libraries(const std::vector<UtteranceAlignment>& alignments,
                           const BpeModel& bpe, const BuildOptions& options,
                           BuildSummary* summary) {
  for (Level l : kAllLevels) {
    if (options.caps.at(l) == 0) {
      throw Error(ErrorCode::kInvalidArgument, "caps must be positive");
    }
  }
  LibrarySet libs(options.caps);
  libs.bpe = bpe;
  BuildSummary stats;

  std::vector<const UtteranceAlignment*> selected;
  for (const UtteranceAlignment& utt : alignments) {
    if (!options.domains.empty() && !options.domains.contains(utt.domain)) {
      ++stats.utterances_skipped;
      continue;
    }
    selected.push_back(&utt);
  }
  stats.utterances_used = selected.size();

  std::array<std::unordered_map<std::string, Reservoir>, 4> reservoirs;
  std::vector<std::vector<Candidate>> batch;
  for (std::size_t begin = 0; begin < selected.size(); begin += kExtractBatch) {
    const std::size_t end = std::min(selected.size(), begin + kExtractBatch);
    batch.assign(end - begin, {});
    parallel_for(end - begin, options.jobs, [&](std::size_t i) {
      batch[i] = extract_raw_candidates(*selected[begin + i], bpe);
    });

    // Sequential in corpus order regardless of job count.
    for (std::vector<Candidate>& cands : batch) {
      for (Candidate& raw : cands) {
        const auto li = static_cast<std::size_t>(raw.level);
        ++stats.levels[li].seen;
        auto kept = apply_duration_filter(std::move(raw), options.bounds);
        if (!kept) {
          ++stats.levels[li].filtered;
          continue;
        }
        UnitLibrary& lib = libs.at(kept->level);
        Reservoir& res = reservoirs[li][kept->unit];
        const std::uint64_t index = res.seen++;
        if (index < lib.cap()) {
          lib.add(kept->unit, std::move(kept->ref));
          continue;
        }
        SplitMix64 rng(derive_seed(options.seed, hash_string(kept->unit) ^ li, index));
        std::uniform_int_distribution<std::uint64_t> pick(0, index);
        const std::uint64_t slot = pick(rng);
        if (slot < lib.cap()) lib.replace(kept->unit, slot, std::move(kept->ref));
      }
    }
  }

  std::size_t stored = 0;
  for (Level l : kAllLevels) {
    const auto& lib = libs.at(l);
    stats.levels[static_cast<std::size_t>(l)].stored = lib.instance_count();
    stored += lib.instance_count();
    for (const auto& [unit, refs] : lib.entries()) {
      for (const SegmentRef& r : refs) libs.domains.insert(r.domain);
    }
  }
  if (summary != nullptr) *summary = stats;
  if (stored == 0) {
    throw Error(ErrorCode::kEmptyCorpus, "no segment candidates survived filtering");
  }
  return libs;
}

std::filesystem::path library_file(const std::filesystem::path& dir, Level level) {
  switch (level) {
    case Level::kWord: return dir / "words.lib";
    case Level::kPiece: return dir / "pieces.lib";
    case Level::kGrapheme: return dir / "graphemes.lib";
    case Level::kSilence: return dir / "silence.lib";
  }
  return dir;
}

std::filesystem::path library_bpe_file(const std::filesystem::path& dir) {
  return dir / "bpe.model";
}

void save_libraries(const LibrarySet& libs, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoFailure, dir.string() + ": " + ec.message());
  for (Level level : kAllLevels) {
    const UnitLibrary& lib = libs.at(level);
    const auto path = library_file(dir, level);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoFailure, path.string());
    out << kLibraryMagic << " level=" << level_name(level) << " cap=" << lib.cap() << '\n';
    for (const auto& [unit, refs] : lib.entries()) {
      for (const SegmentRef& r : refs) {
        out << unit << '\t' << r.utt_id << '\t' << r.start_frame << '\t'
            << r.num_frames << '\t' << r.grapheme_count << '\t' << r.domain << '\n';
      }
    }
    out.close();
    if (!out) throw Error(ErrorCode::kIoFailure, path.string());
  }
  save_bpe(libs.bpe, library_bpe_file(dir));
}

LibrarySet load_libraries(const std::filesystem::path& dir, const FeatureStore* store) {
  const auto bpe_path = library_bpe_file(dir);
  if (!std::filesystem::exists(bpe_path)) {
    throw Error(ErrorCode::kMissingBpe, bpe_path.string());
  }

  LibraryCaps caps;
  std::array<std::vector<std::pair<std::string, SegmentRef>>, 4> rows;
  for (Level level : kAllLevels) {
    const auto path = library_file(dir, level);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kMissingFile, path.string());
    std::string line;
    const std::string prefix = std::string(kLibraryMagic) + " level=" +
                               std::string(level_name(level)) + " cap=";
    std::size_t cap = 0;
    if (!std::getline(in, line) || !line.starts_with(prefix) ||
        !parse_uint(std::string_view(line).substr(prefix.size()), cap) || cap == 0) {
      throw Error(ErrorCode::kBadFormat, path.string() + ": bad header '" + line + "'");
    }
    switch (level) {
      case Level::kWord: caps.word = cap; break;
      case Level::kPiece: caps.piece = cap; break;
      case Level::kGrapheme: caps.grapheme = cap; break;
      case Level::kSilence: caps.silence = cap; break;
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto f = split_fields(line, '\t');
      SegmentRef r;
      const bool ok = f.size() == 6 && !f[0].empty() && !f[1].empty() &&
                      parse_uint(f[2], r.start_frame) && parse_uint(f[3], r.num_frames) &&
                      parse_uint(f[4], r.grapheme_count) && r.num_frames > 0 &&
                      ((level == Level::kSilence) == (r.grapheme_count == 0)) &&
                      (level != Level::kSilence || f[0] == kSilenceKey);
      if (!ok) {
        throw Error(ErrorCode::kBadFormat,
                    path.string() + ":" + std::to_string(line_no) + ": '" + line + "'");
      }
      r.utt_id = std::string(f[1]);
      r.domain = std::string(f[5]);
      rows[static_cast<std::size_t>(level)].emplace_back(std::string(f[0]), std::move(r));
    }
  }

  LibrarySet libs(caps);
  libs.bpe = load_bpe(bpe_path);
  for (Level level : kAllLevels) {
    for (auto& [unit, ref] : rows[static_cast<std::size_t>(level)]) {
      libs.domains.insert(ref.domain);
      try {
        libs.at(level).add(unit, std::move(ref));
      } catch (const Error& e) {
        throw Error(ErrorCode::kBadFormat, e.what());
      }
    }
  }
  if (store != nullptr) {
    const auto dangling = check_library_refs(libs, *store);
    if (!dangling.empty()) {
      std::string msg = std::to_string(dangling.size()) + " dangling refs:";
      for (const auto& d : dangling) msg += "\n  " + d;
      throw Error(ErrorCode::kDanglingRef, msg);
    }
  }
  return libs;
}

std::vector<std::string> check_library_refs(const LibrarySet& libs,
                                            const FeatureStore& store) {
  std::vector<std::string> out;
  for (Level level : kAllLevels) {
    for (const auto& [unit, refs] : libs.at(level).entries()) {
      for (const SegmentRef& r : refs) {
        const UttExtent* e = store.find(r.utt_id);
        if (e == nullptr) {
          out.push_back(ref_label(level, unit, r) + ": utterance not in store");
        } else if (r.end_frame() > e->num_frames) {
          out.push_back(ref_label(level, unit, r) + ": past utterance end (" +
                        std::to_string(e->num_frames) + " frames)");
        }
      }
    }
  }
  return out;
}

}  // namespace segsplice
