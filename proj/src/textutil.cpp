#include "deckgen/textutil.hpp"

#include <cctype>

namespace deckgen {

std::string lower_ascii(std::string s) {
  for (char& c : s) {
    unsigned char u = static_cast<unsigned char>(c);
    if (u >= 'A' && u <= 'Z') c = static_cast<char>(u - 'A' + 'a');
  }
  return s;
}

namespace {

bool is_word_byte(unsigned char u) {
  if (u >= 0x80) return true;  // treat multi-byte sequences as word material
  return (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z') || (u >= '0' && u <= '9');
}

bool is_space_byte(unsigned char u) { return u < 0x80 && std::isspace(u) != 0; }

std::vector<std::string> split_tokens(const std::string& text, bool keep_punct) {
  std::vector<std::string> out;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) {
      out.push_back(word);
      word.clear();
    }
  };
  for (char c : lower_ascii(text)) {
    unsigned char u = static_cast<unsigned char>(c);
    if (is_word_byte(u)) {
      word.push_back(c);
    } else {
      flush();
      if (keep_punct && !is_space_byte(u)) out.emplace_back(1, c);
    }
  }
  flush();
  return out;
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) { return split_tokens(text, false); }

std::vector<std::string> tokenize_keep_punct(const std::string& text) {
  return split_tokens(text, true);
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string s;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) s.push_back(' ');
    s += tokens[i];
  }
  return s;
}

}  // namespace deckgen
