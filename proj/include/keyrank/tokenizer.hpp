#pragma once

#include <cctype>
#include <string>
#include <vector>

namespace keyrank {

/// Lowercases and splits on whitespace; ASCII punctuation becomes standalone
/// single-char tokens. Bytes >= 0x80 are kept inside the current word so
/// UTF-8 sequences survive intact.
inline std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  };
  for (const char c : text) {
    const unsigned char ch = static_cast<unsigned char>(c);
    if (ch >= 0x80) {
      cur.push_back(c);
      continue;
    }
    if (std::isalnum(ch)) {
      cur.push_back(static_cast<char>(std::tolower(ch)));
      continue;
    }
    flush();
    if (!std::isspace(ch)) out.emplace_back(1, c);
  }
  flush();
  return out;
}

}  // namespace keyrank
