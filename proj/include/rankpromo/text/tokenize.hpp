#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "rankpromo/common.hpp"

namespace rankpromo::text {

using Terms = std::vector<std::string>;

namespace detail {

inline bool is_term_byte(unsigned char c) {
  return std::isalnum(c) != 0 || c >= 0x80;
}

inline bool is_space(unsigned char c) { return std::isspace(c) != 0; }

inline std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace detail

/// Lowercased terms in text order. ASCII letters and digits form terms, as do
/// non-ASCII bytes (UTF-8 passes through untouched). Apostrophes are dropped
/// inside a term ("who's" -> "whos"); every other byte separates terms.
inline Terms tokenize(std::string_view text) {
  Terms out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (detail::is_term_byte(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (c == '\'' && !cur.empty()) {
      continue;
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline std::string join_terms(const Terms& terms) {
  std::string out;
  for (const auto& t : terms) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

/// Sentence segmentation: a passage ends at '.', '!' or '?' followed by
/// whitespace or end of text. There is no abbreviation list, so "Mr. X" splits
/// after "Mr.". Passages keep their original text (trimmed); fragments without
/// any term are dropped.
inline std::vector<std::string> segment_passages(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    const auto piece = detail::trim(text.substr(start, end - start));
    if (!piece.empty() && !tokenize(piece).empty()) out.emplace_back(piece);
    start = end;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    const bool at_end = i + 1 == text.size();
    if (at_end || detail::is_space(static_cast<unsigned char>(text[i + 1]))) {
      flush(i + 1);
    }
  }
  flush(text.size());
  if (out.empty()) throw ValidationError("text has no passages");
  return out;
}

}  // namespace rankpromo::text
