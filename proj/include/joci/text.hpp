#pragma once

// Small string helpers shared across the pipeline. Two tokenizers live here:
// tokenize() keeps punctuation as separate tokens (sequence models),
// tokenize_words() drops punctuation entirely (overlap/length features).

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace joci {

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.emplace_back(s.substr(start, i - start));
  }
  return out;
}

inline bool is_word_char(char c) {
  unsigned char u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '\'' || u >= 0x80;
}

// Lowercase, split on whitespace, split off punctuation runs as their own tokens.
inline std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out.push_back(to_lower(cur));
      cur.clear();
    }
  };
  bool in_word = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
      in_word = false;
    } else if (is_word_char(c)) {
      if (!in_word) flush();
      cur.push_back(c);
      in_word = true;
    } else {
      if (in_word) flush();
      cur.push_back(c);
      in_word = false;
    }
  }
  flush();
  return out;
}

// Lowercase word tokens only; punctuation is removed.
inline std::vector<std::string> tokenize_words(std::string_view s) {
  std::vector<std::string> out;
  for (auto& tok : tokenize(s)) {
    std::string w;
    for (char c : tok)
      if (is_word_char(c)) w.push_back(c);
    if (!w.empty()) out.push_back(std::move(w));
  }
  return out;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

inline std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace joci
