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

#ifndef SEGSPLICE_TEXT_H_
#define SEGSPLICE_TEXT_H_

#include <string>
#include <string_view>
#include <vector>

namespace segsplice {

// Splits UTF-8 text into grapheme clusters: a base code point followed by any
// combining marks, variation selectors, or ZWJ-joined code points. Precomposed
// accented letters are a single cluster; "e" + U+0301 is also one cluster.
// Invalid UTF-8 bytes become single-byte clusters.
std::vector<std::string> split_graphemes(std::string_view text);

std::size_t grapheme_count(std::string_view text);

// Lowercases, maps every character outside the keep-set (letters including
// accented ones, combining marks, digits, apostrophe) to a separator, and
// collapses separators to single spaces with no leading or trailing space.
std::string normalize_text(std::string_view raw);

std::vector<std::string> split_words(std::string_view normalized);

// Splits on a single-character delimiter, keeping empty fields.
std::vector<std::string_view> split_fields(std::string_view line, char delim);

}  // namespace segsplice

#endif  // SEGSPLICE_TEXT_H_
