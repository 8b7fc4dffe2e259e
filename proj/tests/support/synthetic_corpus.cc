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

#include "synthetic_corpus.h"

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "segsplice/rng.h"
#include "segsplice/text.h"

namespace segsplice::testing {

std::string random_word(SplitMix64& rng, const std::vector<std::string>& alphabet,
                        std::size_t min_len, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<std::size_t> sym(0, alphabet.size() - 1);
  std::string w;
  const std::size_t n = len(rng);
  for (std::size_t i = 0; i < n; ++i) w += alphabet[sym(rng)];
  return w;
}

float frame_value(std::uint64_t utt_index, std::uint64_t frame, std::uint64_t coeff) {
  const std::uint64_t h = mix64(derive_seed(utt_index, frame, coeff));
  return static_cast<float>(h & 0xFFFFFF) / 4096.0f - 2048.0f;
}

Corpus make_corpus(const CorpusOptions& o) {
  SplitMix64 rng(derive_seed(o.seed, 0xC0'4B'05));
  Corpus corpus;
  corpus.dim = o.dim;

  std::set<std::string> seen;
  while (corpus.vocabulary.size() < o.vocabulary) {
    std::string w = random_word(rng, o.alphabet, 1, 8);
    if (seen.insert(w).second) corpus.vocabulary.push_back(std::move(w));
  }
  std::vector<double> weights;
  for (std::size_t r = 0; r < corpus.vocabulary.size(); ++r) weights.push_back(1.0 / (r + 1));
  std::discrete_distribution<std::size_t> pick_word(weights.begin(), weights.end());
  std::uniform_int_distribution<std::size_t> n_words(o.min_words, o.max_words);
  std::uniform_int_distribution<std::size_t> pick_domain(0, o.domains.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::uint64_t> normal_len(3, 20);
  std::uniform_int_distribution<std::uint64_t> outlier_len(31, 60);
  std::uniform_int_distribution<std::uint64_t> silence_len(5, 90);
  std::uniform_int_distribution<std::uint64_t> gap(0, 2);

  for (std::size_t u = 0; u < o.utterances; ++u) {
    std::ostringstream id;
    id << "utt" << u;
    std::vector<AlignmentToken> tokens;
    std::uint64_t frame = gap(rng);
    auto silence = [&] {
      const std::uint64_t n = silence_len(rng);
      tokens.push_back({std::nullopt, "<sil>", frame, n});
      frame += n + gap(rng);
    };
    silence();
    const std::size_t words = n_words(rng);
    for (std::size_t w = 0; w < words; ++w) {
      const std::string& word = corpus.vocabulary[pick_word(rng)];
      for (const std::string& g : split_graphemes(word)) {
        const double r = unit(rng);
        const std::uint64_t n = r < o.outlier_rate                  ? outlier_len(rng)
                                : r < o.outlier_rate + o.short_rate ? 1
                                                                    : normal_len(rng);
        tokens.push_back({static_cast<std::uint32_t>(w), g, frame, n});
        frame += n + (unit(rng) < 0.1 ? gap(rng) : 0);
      }
      if (w + 1 < words && unit(rng) < o.silence_rate) silence();
    }
    silence();

    FeatureMatrix m(frame, o.dim);
    for (std::uint64_t f = 0; f < frame; ++f) {
      for (std::size_t d = 0; d < o.dim; ++d) m(f, d) = frame_value(u, f, d);
    }
    corpus.alignments.push_back(
        UtteranceAlignment::make(id.str(), o.domains[pick_domain(rng)], std::move(tokens)));
    corpus.features.emplace_back(id.str(), std::move(m));
  }
  return corpus;
}

std::map<std::string, std::uint64_t> word_counts(const Corpus& corpus) {
  std::map<std::string, std::uint64_t> counts;
  for (const auto& utt : corpus.alignments) {
    for (const auto& w : utt.words) ++counts[w.text];
  }
  return counts;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  write_feature_store(corpus.features, dir / "feats", corpus.dim);
  std::ofstream out(dir / "align.tsv");
  write_alignments(out, corpus.alignments);
}

std::vector<std::string> make_sentences(const Corpus& corpus, std::size_t count,
                                        std::size_t words_per_sentence,
                                        std::uint64_t seed, double novel_rate,
                                        const std::vector<std::string>& alphabet) {
  SplitMix64 rng(derive_seed(seed, 0x5E27));
  std::uniform_int_distribution<std::size_t> pick(0, corpus.vocabulary.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::string> out;
  for (std::size_t s = 0; s < count; ++s) {
    std::string line;
    for (std::size_t w = 0; w < words_per_sentence; ++w) {
      if (!line.empty()) line += ' ';
      line += unit(rng) < novel_rate ? random_word(rng, alphabet, 2, 9)
                                     : corpus.vocabulary[pick(rng)];
    }
    out.push_back(std::move(line));
  }
  return out;
}

UtteranceAlignment utterance(const std::string& utt_id, const std::string& domain,
                             const std::vector<TokenSpec>& specs) {
  std::vector<AlignmentToken> tokens;
  std::uint64_t frame = 0;
  for (const TokenSpec& t : specs) {
    frame += t.gap_before;
    std::optional<std::uint32_t> word;
    if (t.word >= 0) word = static_cast<std::uint32_t>(t.word);
    tokens.push_back({word, t.word < 0 ? "<sil>" : t.symbol, frame, t.frames});
    frame += t.frames;
  }
  return UtteranceAlignment::make(utt_id, domain, std::move(tokens));
}

std::vector<std::pair<std::string, FeatureMatrix>> features_for(
    const std::vector<UtteranceAlignment>& alignments, std::size_t dim) {
  std::vector<std::pair<std::string, FeatureMatrix>> out;
  for (std::size_t u = 0; u < alignments.size(); ++u) {
    FeatureMatrix m(alignments[u].end_frame(), dim);
    for (std::uint64_t f = 0; f < m.rows(); ++f) {
      for (std::size_t d = 0; d < dim; ++d) m(f, d) = frame_value(u, f, d);
    }
    out.emplace_back(alignments[u].utt_id, std::move(m));
  }
  return out;
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("segsplice-" + tag + "-" + std::to_string(::getpid()) + "-" +
           std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace segsplice::testing
