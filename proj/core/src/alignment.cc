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

#include "segsplice/alignment.h"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "segsplice/error.h"
#include "segsplice/feature_store.h"
#include "segsplice/text.h"

namespace segsplice {
namespace {

template <typename T>
bool parse_uint(std::string_view s, T& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string where(std::string_view source, std::size_t line_no) {
  return std::string(source) + ":" + std::to_string(line_no);
}

std::optional<std::string> store_violation(const UtteranceAlignment& utt,
                                           const FeatureStore& store) {
  const UttExtent* extent = store.find(utt.utt_id);
  if (extent == nullptr) return "utterance " + utt.utt_id + " not in feature store";
  if (utt.end_frame() > extent->num_frames) {
    return "utterance " + utt.utt_id + " alignment ends at frame " +
           std::to_string(utt.end_frame()) + " but store has " +
           std::to_string(extent->num_frames) + " frames";
  }
  return std::nullopt;
}

}  // namespace

UtteranceAlignment UtteranceAlignment::make(std::string utt_id, std::string domain,
                                            std::vector<AlignmentToken> tokens) {
  UtteranceAlignment utt;
  utt.utt_id = std::move(utt_id);
  utt.domain = std::move(domain);
  utt.tokens = std::move(tokens);

  std::set<std::uint32_t> closed_words;
  for (std::size_t i = 0; i < utt.tokens.size(); ++i) {
    const AlignmentToken& tok = utt.tokens[i];
    if (tok.num_frames == 0) {
      throw Error(ErrorCode::kMalformedLine,
                  utt.utt_id + ": token " + std::to_string(i) + " has zero frames");
    }
    if (i > 0 && tok.start_frame < utt.tokens[i - 1].end_frame()) {
      throw Error(ErrorCode::kOverlapError,
                  utt.utt_id + ": token " + std::to_string(i) + " starts at " +
                      std::to_string(tok.start_frame) + " before previous end " +
                      std::to_string(utt.tokens[i - 1].end_frame()));
    }
    if (tok.is_silence()) continue;
    const std::uint32_t w = *tok.word_index;
    if (!utt.words.empty() && utt.words.back().word_index == w &&
        utt.words.back().last_token + 1 == i) {
      utt.words.back().last_token = i;
      utt.words.back().text += tok.symbol;
      continue;
    }
    if (!utt.words.empty()) closed_words.insert(utt.words.back().word_index);
    if (closed_words.contains(w)) {
      throw Error(ErrorCode::kNonContiguousWord,
                  utt.utt_id + ": word " + std::to_string(w) +
                      " resumes at token " + std::to_string(i));
    }
    utt.words.push_back({tok.symbol, w, i, i});
  }
  return utt;
}

std::vector<UtteranceAlignment> parse_alignments(const std::filesystem::path& path,
                                                 const FeatureStore* store) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, path.string());
  return parse_alignments(in, path.string(), store);
}

std::vector<UtteranceAlignment> parse_alignments(std::istream& in,
                                                 std::string_view source_name,
                                                 const FeatureStore* store) {
  std::string line;
  if (!std::getline(in, line) || line != kAlignmentMagic) {
    throw Error(ErrorCode::kBadMagic,
                std::string(source_name) + ": expected header '" +
                    std::string(kAlignmentMagic) + "'");
  }

  std::vector<UtteranceAlignment> out;
  std::set<std::string, std::less<>> finished;
  std::string cur_utt;
  std::string cur_domain;
  std::vector<AlignmentToken> cur_tokens;

  auto flush = [&] {
    if (cur_utt.empty()) return;
    out.push_back(UtteranceAlignment::make(cur_utt, cur_domain, std::move(cur_tokens)));
    if (store != nullptr) {
      if (!store->contains(cur_utt)) {
        throw Error(ErrorCode::kUnknownUtterance, cur_utt);
      }
      if (auto v = store_violation(out.back(), *store)) {
        throw Error(ErrorCode::kSpanOutOfRange, *v);
      }
    }
    finished.insert(cur_utt);
    cur_tokens.clear();
    cur_utt.clear();
  };

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_fields(line, '\t');
    if (f.size() != 6) {
      throw Error(ErrorCode::kMalformedLine,
                  where(source_name, line_no) + ": expected 6 columns, got " +
                      std::to_string(f.size()));
    }
    if (f[0].empty() || f[1].empty() || f[3].empty()) {
      throw Error(ErrorCode::kMalformedLine,
                  where(source_name, line_no) + ": empty field");
    }
    AlignmentToken tok;
    tok.symbol = std::string(f[3]);
    if (f[2] == "-") {
      if (tok.symbol != kSilenceSymbol) {
        throw Error(ErrorCode::kMalformedLine,
                    where(source_name, line_no) + ": word index '-' requires " +
                        std::string(kSilenceSymbol));
      }
    } else {
      std::uint32_t w = 0;
      if (!parse_uint(f[2], w)) {
        throw Error(ErrorCode::kMalformedLine,
                    where(source_name, line_no) + ": bad word index '" +
                        std::string(f[2]) + "'");
      }
      if (tok.symbol == kSilenceSymbol) {
        throw Error(ErrorCode::kMalformedLine,
                    where(source_name, line_no) + ": silence needs word index '-'");
      }
      if (tok.symbol.find(' ') != std::string::npos ||
          split_graphemes(tok.symbol).size() != 1) {
        throw Error(ErrorCode::kMalformedLine,
                    where(source_name, line_no) + ": symbol '" + tok.symbol +
                        "' is not a single grapheme");
      }
      tok.word_index = w;
    }
    if (!parse_uint(f[4], tok.start_frame) || !parse_uint(f[5], tok.num_frames) ||
        tok.num_frames == 0) {
      throw Error(ErrorCode::kMalformedLine,
                  where(source_name, line_no) + ": bad frame span");
    }

    if (f[0] != cur_utt) {
      flush();
      if (finished.contains(f[0])) {
        throw Error(ErrorCode::kMalformedLine,
                    where(source_name, line_no) + ": utterance " +
                        std::string(f[0]) + " is split across the file");
      }
      cur_utt = std::string(f[0]);
      cur_domain = std::string(f[1]);
    } else if (f[1] != cur_domain) {
      throw Error(ErrorCode::kMalformedLine,
                  where(source_name, line_no) + ": domain changes within " + cur_utt);
    }
    cur_tokens.push_back(std::move(tok));
  }
  flush();
  return out;
}

void write_alignments(std::ostream& out,
                      const std::vector<UtteranceAlignment>& alignments) {
  out << kAlignmentMagic << '\n';
  for (const UtteranceAlignment& utt : alignments) {
    for (const AlignmentToken& tok : utt.tokens) {
      out << utt.utt_id << '\t' << utt.domain << '\t';
      if (tok.word_index) {
        out << *tok.word_index;
      } else {
        out << '-';
      }
      out << '\t' << tok.symbol << '\t' << tok.start_frame << '\t'
          << tok.num_frames << '\n';
    }
  }
}

std::vector<std::string> check_alignments_against_store(
    const std::vector<UtteranceAlignment>& alignments, const FeatureStore& store) {
  std::vector<std::string> violations;
  for (const UtteranceAlignment& utt : alignments) {
    if (auto v = store_violation(utt, store)) violations.push_back(*v);
  }
  return violations;
}

}  // namespace segsplice
