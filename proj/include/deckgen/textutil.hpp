#pragma once

#include <string>
#include <vector>

namespace deckgen {

// ASCII-only lowercasing; bytes outside A-Z pass through untouched.
std::string lower_ascii(std::string s);

// Splits text into lowercase word tokens. Runs of letters, digits and
// non-ASCII bytes form words; whitespace separates; ASCII punctuation is
// dropped. Used everywhere overlap between texts is measured.
std::vector<std::string> tokenize(const std::string& text);

// Same segmentation, but each ASCII punctuation byte survives as its own
// single-character token. Used where the original wording matters.
std::vector<std::string> tokenize_keep_punct(const std::string& text);

// Joins tokens with single spaces.
std::string join_tokens(const std::vector<std::string>& tokens);

}  // namespace deckgen
