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

#include "segsplice/bpe.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <unordered_set>

#include "segsplice/error.h"
#include "segsplice/text.h"

namespace segsplice {
namespace {

std::string rank_key(std::string_view left, std::string_view right) {
  std::string key;
  key.reserve(left.size() + right.size() + 1);
  key.append(left).push_back('\t');
  key.append(right);
  return key;
}

bool valid_symbol(std::string_view s) {
  return !s.empty() && s.find_first_of(" \t\r\n") == std::string_view::npos;
}

// Training state keyed by integer piece ids.
class PairTable {
 public:
  using Pair = std::pair<int, int>;

  struct Candidate {
    std::uint64_t count;
    std::string joined;
    std::string left;
    Pair pair;

    bool operator<(const Candidate& o) const {
      if (count != o.count) return count > o.count;
      if (joined != o.joined) return joined < o.joined;
      if (left != o.left) return left < o.left;
      return pair < o.pair;
    }
  };

  explicit PairTable(const std::vector<std::string>& pieces) : pieces_(pieces) {}

  void add(Pair p, std::int64_t delta, std::size_t word) {
    auto& slot = counts_[p];
    if (slot > 0) queue_.erase(candidate(p, slot));
    slot = static_cast<std::uint64_t>(static_cast<std::int64_t>(slot) + delta);
    if (slot > 0) {
      queue_.insert(candidate(p, slot));
      if (delta > 0) where_[p].insert(word);
    } else {
      counts_.erase(p);
    }
  }

  const std::set<Candidate>& queue() const { return queue_; }

  std::vector<std::size_t> words_with(Pair p) const {
    const auto it = where_.find(p);
    if (it == where_.end()) return {};
    std::vector<std::size_t> words(it->second.begin(), it->second.end());
    std::sort(words.begin(), words.end());
    return words;
  }

 private:
  struct PairHash {
    std::size_t operator()(const Pair& p) const {
      return std::hash<std::uint64_t>()((static_cast<std::uint64_t>(p.first) << 32) ^
                                        static_cast<std::uint32_t>(p.second));
    }
  };

  Candidate candidate(Pair p, std::uint64_t count) const {
    return {count, pieces_[p.first] + pieces_[p.second], pieces_[p.first], p};
  }

  const std::vector<std::string>& pieces_;
  std::unordered_map<Pair, std::uint64_t, PairHash> counts_;
  std::unordered_map<Pair, std::unordered_set<std::size_t>, PairHash> where_;
  std::set<Candidate> queue_;
};

void merge_in_place(std::vector<int>& seq, int left, int right, int merged) {
  std::size_t out = 0;
  for (std::size_t i = 0; i < seq.size();) {
    if (i + 1 < seq.size() && seq[i] == left && seq[i + 1] == right) {
      seq[out++] = merged;
      i += 2;
    } else {
      seq[out++] = seq[i++];
    }
  }
  seq.resize(out);
}

}  // namespace

BpeModel::BpeModel(std::vector<std::string> alphabet, std::vector<Merge> merges)
    : alphabet_(std::move(alphabet)), merges_(std::move(merges)) {
  std::sort(alphabet_.begin(), alphabet_.end());
  for (const std::string& s : alphabet_) {
    if (!valid_symbol(s) || !alphabet_set_.insert(s).second) {
      throw Error(ErrorCode::kBadFormat, "bad or duplicate alphabet symbol '" + s + "'");
    }
  }
  vocab_ = alphabet_set_;
  for (std::size_t i = 0; i < merges_.size(); ++i) {
    const Merge& m = merges_[i];
    if (!vocab_.contains(m.left) || !vocab_.contains(m.right)) {
      throw Error(ErrorCode::kBadFormat, "merge " + std::to_string(i) + " (" +
                                             m.left + ", " + m.right +
                                             ") uses an unknown piece");
    }
    if (!vocab_.insert(m.joined()).second) {
      throw Error(ErrorCode::kBadFormat, "merge " + std::to_string(i) +
                                             " repeats piece " + m.joined());
    }
    rank_.emplace(rank_key(m.left, m.right), i);
  }
}

bool BpeModel::in_alphabet(std::string_view symbol) const {
  return alphabet_set_.find(symbol) != alphabet_set_.end();
}

bool BpeModel::in_vocab(std::string_view piece) const {
  return vocab_.find(piece) != vocab_.end();
}

std::optional<std::vector<Piece>> BpeModel::try_tokenize(
    std::span<const std::string> symbols) const {
  std::vector<Piece> pieces;
  pieces.reserve(symbols.size());
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (!in_alphabet(symbols[i])) return std::nullopt;
    pieces.push_back({symbols[i], i, 1});
  }
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  while (pieces.size() > 1) {
    std::size_t best = kNone;
    const std::string* best_left = nullptr;
    const std::string* best_right = nullptr;
    for (std::size_t i = 0; i + 1 < pieces.size(); ++i) {
      const auto it = rank_.find(rank_key(pieces[i].text, pieces[i + 1].text));
      if (it != rank_.end() && it->second < best) {
        best = it->second;
        best_left = &merges_[best].left;
        best_right = &merges_[best].right;
      }
    }
    if (best == kNone) break;
    std::vector<Piece> next;
    next.reserve(pieces.size());
    for (std::size_t i = 0; i < pieces.size();) {
      if (i + 1 < pieces.size() && pieces[i].text == *best_left &&
          pieces[i + 1].text == *best_right) {
        next.push_back({pieces[i].text + pieces[i + 1].text, pieces[i].first_symbol,
                        pieces[i].symbol_count + pieces[i + 1].symbol_count});
        i += 2;
      } else {
        next.push_back(std::move(pieces[i]));
        ++i;
      }
    }
    pieces = std::move(next);
  }
  return pieces;
}

std::vector<std::string> BpeModel::tokenize(std::string_view word) const {
  const std::vector<std::string> symbols = split_graphemes(word);
  auto pieces = try_tokenize(symbols);
  if (!pieces) {
    for (const std::string& s : symbols) {
      if (!in_alphabet(s)) {
        throw Error(ErrorCode::kUnknownGrapheme,
                    "'" + s + "' in word '" + std::string(word) + "'");
      }
    }
  }
  std::vector<std::string> out;
  out.reserve(pieces->size());
  for (Piece& p : *pieces) out.push_back(std::move(p.text));
  return out;
}

BpeModel BpeModel::truncated(std::size_t num_merges) const {
  num_merges = std::min(num_merges, merges_.size());
  return BpeModel(alphabet_, std::vector<Merge>(merges_.begin(),
                                                merges_.begin() + num_merges));
}

BpeModel train_bpe(const std::map<std::string, std::uint64_t>& word_counts,
                   std::size_t target_vocab_size) {
  std::vector<std::string> pieces;
  std::map<std::string, int, std::less<>> piece_ids;
  auto intern = [&](const std::string& s) {
    auto [it, inserted] = piece_ids.emplace(s, static_cast<int>(pieces.size()));
    if (inserted) pieces.push_back(s);
    return it->second;
  };

  std::vector<std::vector<int>> words;
  std::vector<std::uint64_t> counts;
  for (const auto& [word, count] : word_counts) {
    if (count == 0 || word.empty()) continue;
    std::vector<int> seq;
    for (const std::string& g : split_graphemes(word)) {
      if (!valid_symbol(g)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "word '" + word + "' contains whitespace");
      }
      seq.push_back(intern(g));
    }
    words.push_back(std::move(seq));
    counts.push_back(count);
  }
  if (words.empty()) throw Error(ErrorCode::kEmptyCorpus, "no words to train on");

  std::vector<std::string> alphabet = pieces;
  if (target_vocab_size < alphabet.size()) {
    throw Error(ErrorCode::kTargetTooSmall,
                "target " + std::to_string(target_vocab_size) + " < alphabet size " +
                    std::to_string(alphabet.size()));
  }

  // pieces grows with merges; PairTable keeps a reference to it.
  pieces.reserve(target_vocab_size + 1);
  PairTable table(pieces);
  auto account = [&](std::size_t w, std::int64_t sign) {
    const auto& seq = words[w];
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
      table.add({seq[i], seq[i + 1]}, sign * static_cast<std::int64_t>(counts[w]), w);
    }
  };
  for (std::size_t w = 0; w < words.size(); ++w) account(w, +1);

  std::vector<Merge> merges;
  while (alphabet.size() + merges.size() < target_vocab_size) {
    const PairTable::Candidate* best = nullptr;
    for (const auto& c : table.queue()) {
      if (c.count < 2) break;
      if (piece_ids.find(c.joined) == piece_ids.end()) {
        best = &c;
        break;
      }
    }
    if (best == nullptr) break;
    const auto [left, right] = best->pair;
    const std::string joined = best->joined;
    merges.push_back({pieces[left], pieces[right]});
    const int merged = intern(joined);
    for (std::size_t w : table.words_with({left, right})) {
      account(w, -1);
      merge_in_place(words[w], left, right, merged);
      account(w, +1);
    }
  }
  return BpeModel(std::move(alphabet), std::move(merges));
}

void save_bpe(const BpeModel& model, std::ostream& out) {
  out << kBpeMagic << '\n';
  for (std::size_t i = 0; i < model.alphabet().size(); ++i) {
    if (i > 0) out << ' ';
    out << model.alphabet()[i];
  }
  out << '\n';
  for (const Merge& m : model.merges()) out << m.left << '\t' << m.right << '\n';
}

void save_bpe(const BpeModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoFailure, path.string());
  save_bpe(model, out);
  out.close();
  if (!out) throw Error(ErrorCode::kIoFailure, path.string());
}

BpeModel load_bpe(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kBpeMagic) {
    throw Error(ErrorCode::kBadFormat, "missing '" + std::string(kBpeMagic) + "' header");
  }
  if (!std::getline(in, line) || line.empty()) {
    throw Error(ErrorCode::kBadFormat, "missing alphabet line");
  }
  std::vector<std::string> alphabet;
  for (std::string_view s : split_fields(line, ' ')) alphabet.emplace_back(s);

  std::vector<Merge> merges;
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_fields(line, '\t');
    if (f.size() != 2 || f[0].empty() || f[1].empty()) {
      throw Error(ErrorCode::kBadFormat, "line " + std::to_string(line_no) +
                                             ": expected 'left<TAB>right'");
    }
    merges.push_back({std::string(f[0]), std::string(f[1])});
  }
  return BpeModel(std::move(alphabet), std::move(merges));
}

BpeModel load_bpe(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  return load_bpe(in);
}

}  // namespace segsplice
