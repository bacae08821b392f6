// Copyright 2026 The t2a-score Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace t2a {

inline std::string_view trim(std::string_view s) {
  const auto space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && space(s.front())) s.remove_prefix(1);
  while (!s.empty() && space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

/// Lowercased alphanumeric words of `text`, in order.
inline std::vector<std::string> words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c) != 0) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline bool is_stopword(std::string_view w) {
  static constexpr std::string_view kStopwords[] = {"a",  "an", "the", "of", "and", "is", "are", "in",
                                                    "on", "at", "to",  "with", "some", "by", "its", "it"};
  return std::find(std::begin(kStopwords), std::end(kStopwords), w) != std::end(kStopwords);
}

/// words() minus stopwords; falls back to all words when nothing else is left.
inline std::vector<std::string> content_words(std::string_view text) {
  auto all = words(text);
  std::vector<std::string> kept;
  for (const auto& w : all) {
    if (!is_stopword(w)) kept.push_back(w);
  }
  return kept.empty() ? all : kept;
}

}  // namespace t2a
