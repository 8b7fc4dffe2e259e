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

#ifndef SEGSPLICE_SYNTH_H_
#define SEGSPLICE_SYNTH_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "segsplice/feature_store.h"
#include "segsplice/rng.h"
#include "segsplice/seglib.h"

namespace segsplice {

// Frames of zeros inserted between words when the silence library is empty.
inline constexpr std::uint64_t kFallbackSilenceFrames = 10;

// How one word can be realized, by the strict priority word > piece >
// grapheme. level is empty when the word cannot be covered; missing then
// lists the graphemes absent from the grapheme library.
struct WordResolution {
  std::optional<Level> level;
  std::vector<std::string> units;
  std::vector<std::string> missing;
};

// The single coverage policy shared by planning and coverage statistics.
WordResolution resolve_word(std::string_view word, const LibrarySet& libs);

struct PlannedUnit {
  Level level;
  std::string unit;
  std::size_t word = 0;  // ordinal of the word in the sentence

  friend bool operator==(const PlannedUnit&, const PlannedUnit&) = default;
};

struct SynthesisPlan {
  std::string sentence_id;
  std::string text;  // normalized
  std::vector<std::string> words;
  std::vector<Level> resolution;  // one per word
  std::vector<PlannedUnit> units;

  friend bool operator==(const SynthesisPlan&, const SynthesisPlan&) = default;
};

// Expects normalized text. Throws kUncoverableWord naming the word and its
// missing graphemes.
SynthesisPlan plan_units(std::string_view sentence, const LibrarySet& libs,
                         std::string sentence_id = {});

struct ResolvedPlan {
  SynthesisPlan plan;
  std::optional<std::string> domain;
  std::vector<SegmentRef> unit_refs;  // parallel to plan.units
  // One per gap between consecutive words; empty optional means the
  // zero-frame fallback was used.
  std::vector<std::optional<SegmentRef>> silences;
  bool silence_fallback = false;

  friend bool operator==(const ResolvedPlan&, const ResolvedPlan&) = default;
};

// Draws one instance per unit and one silence per word gap, uniformly from
// the (domain-filtered) instance lists. Throws kDomainExhausted listing every
// unit with no instance in the requested domain.
ResolvedPlan sample_instances(SynthesisPlan plan, const LibrarySet& libs,
                              const std::optional<std::string>& domain,
                              SplitMix64& rng);

enum class SpanKind { kUnit, kSilence };

struct SpanRecord {
  SpanKind kind = SpanKind::kUnit;
  Level level = Level::kWord;
  std::string unit;
  std::string utt_id;  // "-" for fallback silence
  std::uint64_t start = 0;
  std::uint64_t length = 0;
  std::size_t word = 0;  // for SIL: the word it follows

  friend bool operator==(const SpanRecord&, const SpanRecord&) = default;
};

struct ManifestEntry {
  std::string sentence_id;
  std::string text;
  std::string domain = "any";
  std::uint64_t total_frames = 0;
  bool silence_fallback = false;
  std::vector<SpanRecord> spans;

  std::string to_line() const;
  static ManifestEntry from_line(std::string_view line);

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

struct SplicedUtterance {
  FeatureMatrix features;
  ManifestEntry manifest;
};

// Concatenates the referenced slices in plan order with silences between
// words. Throws kDanglingRef if a ref does not resolve in the store.
SplicedUtterance splice(const ResolvedPlan& resolved, const FeatureStore& store);

class DomainPolicy {
 public:
  enum class Kind { kAny, kFixed, kRoundRobin };

  static DomainPolicy any() { return DomainPolicy(Kind::kAny, {}); }
  static DomainPolicy fixed(std::string domain) {
    return DomainPolicy(Kind::kFixed, {std::move(domain)});
  }
  static DomainPolicy round_robin(std::vector<std::string> domains);
  // "any", "fixed=<d>", or "round-robin=<d1>,<d2>,...".
  static DomainPolicy parse(std::string_view text);

  Kind kind() const { return kind_; }
  const std::vector<std::string>& domains() const { return domains_; }
  std::optional<std::string> domain_for(std::uint64_t sentence_index) const;
  std::string describe() const;

 private:
  DomainPolicy(Kind kind, std::vector<std::string> domains)
      : kind_(kind), domains_(std::move(domains)) {}

  Kind kind_;
  std::vector<std::string> domains_;
};

struct SynthConfig {
  std::uint64_t seed = 17;
  DomainPolicy policy = DomainPolicy::any();
  std::filesystem::path output_stem;
  std::size_t jobs = 1;
  std::size_t batch_size = 256;
  std::string id_prefix = "aug";
};

// <stem>.index/<stem>.data, <stem>.manifest.jsonl, <stem>.rejects.tsv
struct SynthOutputs {
  std::filesystem::path store_stem;
  std::filesystem::path manifest;
  std::filesystem::path rejects;

  static SynthOutputs from_stem(const std::filesystem::path& stem);
};

struct SynthSummary {
  std::uint64_t sentences = 0;
  std::uint64_t synthesized = 0;
  std::uint64_t rejected = 0;
  std::uint64_t total_frames = 0;
  std::uint64_t silence_fallbacks = 0;
  std::map<Level, std::uint64_t> words_by_level;
  std::map<std::string, std::uint64_t> sentences_by_domain;
  std::map<std::string, std::uint64_t> rejects_by_reason;

  friend bool operator==(const SynthSummary&, const SynthSummary&) = default;
};

std::uint64_t sentence_stream_seed(std::uint64_t seed, std::uint64_t index);
std::string sentence_id(std::string_view prefix, std::uint64_t index);

// Synthesizes one line of input; the unit of work of synthesize_corpus.
// Throws on any per-sentence failure.
SplicedUtterance synthesize_sentence(std::string_view raw_text, std::uint64_t index,
                                     const LibrarySet& libs, const FeatureStore& store,
                                     const SynthConfig& config);

// Reads one sentence per line and writes a feature store, a manifest, and a
// rejects file. Output is a pure function of the inputs and config; the job
// count does not change it. Per-sentence failures go to the rejects file.
SynthSummary synthesize_corpus(std::istream& sentences, const LibrarySet& libs,
                               const FeatureStore& store, const SynthConfig& config);

}  // namespace segsplice

#endif  // SEGSPLICE_SYNTH_H_
