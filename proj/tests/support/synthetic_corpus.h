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

#ifndef SEGSPLICE_TESTS_SUPPORT_SYNTHETIC_CORPUS_H_
#define SEGSPLICE_TESTS_SUPPORT_SYNTHETIC_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "segsplice/alignment.h"
#include "segsplice/feature_store.h"
#include "segsplice/rng.h"

namespace segsplice::testing {

struct CorpusOptions {
  std::size_t utterances = 1000;
  std::size_t vocabulary = 60;
  std::size_t dim = 8;
  std::uint64_t seed = 1;
  std::vector<std::string> domains = {"Dictation", "Video", "Conversation"};
  std::vector<std::string> alphabet = {"a", "b", "c", "d", "e", "f", "g", "h", "i",
                                       "l", "m", "n", "o", "p", "r", "s", "t", "u",
                                       "v", "z", "à", "è", "ì", "ò", "ù", "'"};
  std::size_t min_words = 3;
  std::size_t max_words = 12;
  double outlier_rate = 0.05;  // graphemes longer than 30 frames
  double short_rate = 0.03;    // one-frame graphemes
  double silence_rate = 0.7;   // silence between words
};

struct Corpus {
  std::size_t dim = 0;
  std::vector<std::string> vocabulary;  // Zipf-ranked
  std::vector<UtteranceAlignment> alignments;
  std::vector<std::pair<std::string, FeatureMatrix>> features;
};

// Deterministic corpus with Zipf word frequencies, so frequent words exceed
// the default caps while the tail has a handful of instances.
Corpus make_corpus(const CorpusOptions& options = {});

// Uniform length in [min_len, max_len], uniform symbols.
std::string random_word(SplitMix64& rng, const std::vector<std::string>& alphabet,
                        std::size_t min_len, std::size_t max_len);

// A deterministic non-constant value per (utterance, frame, coefficient).
float frame_value(std::uint64_t utt_index, std::uint64_t frame, std::uint64_t coeff);

std::map<std::string, std::uint64_t> word_counts(const Corpus& corpus);

// Writes <dir>/feats.{index,data} and <dir>/align.tsv.
void write_corpus(const Corpus& corpus, const std::filesystem::path& dir);

// Random sentences of vocabulary words (plus occasional novel words built
// from the alphabet).
std::vector<std::string> make_sentences(const Corpus& corpus, std::size_t count,
                                        std::size_t words_per_sentence,
                                        std::uint64_t seed, double novel_rate = 0.05,
                                        const std::vector<std::string>& alphabet =
                                            CorpusOptions{}.alphabet);

// Token for utterance(): word < 0 is silence. Tokens are laid out back to
// back starting at frame 0 unless a gap precedes them.
struct TokenSpec {
  int word;
  std::string symbol;
  std::uint64_t frames;
  std::uint64_t gap_before = 0;
};

UtteranceAlignment utterance(const std::string& utt_id, const std::string& domain,
                             const std::vector<TokenSpec>& tokens);

// Feature store entries covering every frame of the given alignments, with
// frame_value() contents.
std::vector<std::pair<std::string, FeatureMatrix>> features_for(
    const std::vector<UtteranceAlignment>& alignments, std::size_t dim);

class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);

}  // namespace segsplice::testing

#endif  // SEGSPLICE_TESTS_SUPPORT_SYNTHETIC_CORPUS_H_
