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

#ifndef SEGSPLICE_BPE_H_
#define SEGSPLICE_BPE_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace segsplice {

inline constexpr std::string_view kBpeMagic = "#SEGSPLICE-BPE v1";

struct Merge {
  std::string left;
  std::string right;

  std::string joined() const { return left + right; }
  friend bool operator==(const Merge&, const Merge&) = default;
};

// A sentence piece together with the grapheme range of the word it covers.
struct Piece {
  std::string text;
  std::size_t first_symbol = 0;
  std::size_t symbol_count = 0;

  friend bool operator==(const Piece&, const Piece&) = default;
};

// Word-internal byte-pair-encoding model over grapheme clusters. Merges are
// applied in training order; there is no end-of-word marker.
class BpeModel {
 public:
  BpeModel() = default;
  // Throws kBadFormat if a merge uses an operand not yet in the vocabulary or
  // produces a piece that already exists.
  BpeModel(std::vector<std::string> alphabet, std::vector<Merge> merges);

  const std::vector<std::string>& alphabet() const { return alphabet_; }
  const std::vector<Merge>& merges() const { return merges_; }
  std::size_t vocab_size() const { return alphabet_.size() + merges_.size(); }

  bool in_alphabet(std::string_view symbol) const;
  bool in_vocab(std::string_view piece) const;

  // Splits the word into grapheme clusters and applies the merges. Throws
  // kUnknownGrapheme if a cluster is outside the alphabet.
  std::vector<std::string> tokenize(std::string_view word) const;

  // As above over pre-split symbols; nullopt on an unknown symbol.
  std::optional<std::vector<Piece>> try_tokenize(
      std::span<const std::string> symbols) const;

  // The model restricted to its first num_merges merges.
  BpeModel truncated(std::size_t num_merges) const;

  friend bool operator==(const BpeModel& a, const BpeModel& b) {
    return a.alphabet_ == b.alphabet_ && a.merges_ == b.merges_;
  }

 private:
  std::vector<std::string> alphabet_;
  std::vector<Merge> merges_;
  std::set<std::string, std::less<>> alphabet_set_;
  std::set<std::string, std::less<>> vocab_;
  std::unordered_map<std::string, std::size_t> rank_;  // "left\tright" -> index
};

// Greedy training: repeatedly merges the most frequent adjacent pair (counts
// weighted by word frequency), ties broken by the smallest concatenated
// string, then the smallest left operand. Stops at target_vocab_size or when
// the best pair occurs fewer than twice.
BpeModel train_bpe(const std::map<std::string, std::uint64_t>& word_counts,
                   std::size_t target_vocab_size);

void save_bpe(const BpeModel& model, const std::filesystem::path& path);
void save_bpe(const BpeModel& model, std::ostream& out);
BpeModel load_bpe(const std::filesystem::path& path);
BpeModel load_bpe(std::istream& in);

}  // namespace segsplice

#endif  // SEGSPLICE_BPE_H_
