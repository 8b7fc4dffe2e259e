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

#include "segsplice/text.h"

#include <cstdint>

namespace segsplice {
namespace {

constexpr char32_t kInvalid = 0xFFFFFFFF;

// Decodes one code point starting at pos; advances pos. Malformed input
// consumes one byte and yields kInvalid.
char32_t decode(std::string_view s, std::size_t& pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  int extra = 0;
  char32_t cp = 0;
  if (b0 < 0x80) {
    ++pos;
    return b0;
  } else if ((b0 & 0xE0) == 0xC0) {
    extra = 1;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    extra = 2;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    extra = 3;
    cp = b0 & 0x07;
  } else {
    ++pos;
    return kInvalid;
  }
  if (pos + static_cast<std::size_t>(extra) >= s.size()) {
    ++pos;
    return kInvalid;
  }
  for (int i = 1; i <= extra; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) {
      ++pos;
      return kInvalid;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  pos += extra + 1;
  return cp;
}

void encode(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool in(char32_t cp, char32_t lo, char32_t hi) { return cp >= lo && cp <= hi; }

bool is_extender(char32_t cp) {
  return in(cp, 0x0300, 0x036F) || in(cp, 0x0483, 0x0489) ||
         in(cp, 0x0591, 0x05BD) || in(cp, 0x0610, 0x061A) ||
         in(cp, 0x064B, 0x065F) || cp == 0x0670 || in(cp, 0x06D6, 0x06DC) ||
         in(cp, 0x0900, 0x0903) || in(cp, 0x093A, 0x094F) ||
         in(cp, 0x0E31, 0x0E3A) || in(cp, 0x0E47, 0x0E4E) ||
         in(cp, 0x1AB0, 0x1AFF) || in(cp, 0x1DC0, 0x1DFF) ||
         in(cp, 0x200C, 0x200D) || in(cp, 0x20D0, 0x20FF) ||
         in(cp, 0xFE00, 0xFE0F) || in(cp, 0xFE20, 0xFE2F) ||
         in(cp, 0x1F3FB, 0x1F3FF) || in(cp, 0xE0100, 0xE01EF);
}

bool is_letter(char32_t cp) {
  if (in(cp, 'a', 'z') || in(cp, 'A', 'Z')) return true;
  if (cp < 0xC0) return false;
  if (cp == 0xD7 || cp == 0xF7) return false;
  return in(cp, 0x00C0, 0x02AF) || in(cp, 0x0370, 0x0373) ||
         in(cp, 0x0376, 0x037D) || in(cp, 0x0386, 0x0386) ||
         in(cp, 0x0388, 0x03FF) || in(cp, 0x0400, 0x0481) ||
         in(cp, 0x048A, 0x052F) || in(cp, 0x0531, 0x0587) ||
         in(cp, 0x05D0, 0x05EA) || in(cp, 0x0620, 0x064A) ||
         in(cp, 0x0904, 0x0939) || in(cp, 0x0E01, 0x0E30) ||
         in(cp, 0x1E00, 0x1FFF) || in(cp, 0x3041, 0x30FF) ||
         in(cp, 0x3400, 0x4DBF) || in(cp, 0x4E00, 0x9FFF) ||
         in(cp, 0xAC00, 0xD7A3);
}

char32_t to_lower(char32_t cp) {
  if (in(cp, 'A', 'Z')) return cp + 0x20;
  if (cp < 0xC0) return cp;
  if (in(cp, 0x00C0, 0x00DE) && cp != 0xD7) return cp + 0x20;
  if (in(cp, 0x0100, 0x0137) || in(cp, 0x014A, 0x0177)) {
    return (cp % 2 == 0) ? cp + 1 : cp;
  }
  if (in(cp, 0x0139, 0x0148) || in(cp, 0x0179, 0x017E)) {
    return (cp % 2 == 1) ? cp + 1 : cp;
  }
  if (cp == 0x0178) return 0x00FF;
  if (in(cp, 0x0391, 0x03A9) && cp != 0x03A2) return cp + 0x20;
  if (in(cp, 0x0410, 0x042F)) return cp + 0x20;
  if (in(cp, 0x0400, 0x040F)) return cp + 0x50;
  if (in(cp, 0x1E00, 0x1E95) || in(cp, 0x1EA0, 0x1EFF)) {
    return (cp % 2 == 0) ? cp + 1 : cp;
  }
  return cp;
}

}  // namespace

std::vector<std::string> split_graphemes(std::string_view text) {
  std::vector<std::string> clusters;
  std::size_t pos = 0;
  bool joined = false;
  while (pos < text.size()) {
    const std::size_t begin = pos;
    const char32_t cp = decode(text, pos);
    const bool attach = !clusters.empty() && cp != kInvalid &&
                        (joined || is_extender(cp));
    if (attach) {
      clusters.back().append(text.substr(begin, pos - begin));
    } else {
      clusters.emplace_back(text.substr(begin, pos - begin));
    }
    joined = (cp == 0x200D);
  }
  return clusters;
}

std::size_t grapheme_count(std::string_view text) {
  return split_graphemes(text).size();
}

std::string normalize_text(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  bool in_word = false;
  std::size_t pos = 0;
  while (pos < raw.size()) {
    char32_t cp = decode(raw, pos);
    if (cp == 0x2019) cp = '\'';
    const bool keep = cp != kInvalid &&
                      (is_letter(cp) || in(cp, '0', '9') || cp == '\'' ||
                       (in_word && is_extender(cp)));
    if (!keep) {
      pending_space = pending_space || in_word;
      in_word = false;
      continue;
    }
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    in_word = true;
    encode(to_lower(cp), out);
  }
  return out;
}

std::vector<std::string> split_words(std::string_view normalized) {
  std::vector<std::string> words;
  std::size_t pos = 0;
  while (pos < normalized.size()) {
    const std::size_t next = normalized.find(' ', pos);
    const std::size_t end = next == std::string_view::npos ? normalized.size() : next;
    if (end > pos) words.emplace_back(normalized.substr(pos, end - pos));
    pos = end + 1;
  }
  return words;
}

std::vector<std::string_view> split_fields(std::string_view line, char delim) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find(delim, pos);
    if (next == std::string_view::npos) {
      fields.push_back(line.substr(pos));
      return fields;
    }
    fields.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
}

}  // namespace segsplice
