#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace stgvt {

inline constexpr int kPadToken = 0;
inline constexpr int kClsToken = 1;
inline constexpr int kMaxQueryTokens = 40;
inline constexpr int kDefaultVocabSize = 4096;

// Tokenized sentence, padded to a fixed length. Position 0 holds the
// classification token; positions at or past valid_length are padding and
// are masked inside the scorer.
struct Query {
  std::vector<int> tokens;
  int valid_length = 0;
  std::string raw_text;
};

// Whitespace split, ASCII lowercase, words hashed into [2, vocab_size).
// The sentence is truncated so that [CLS] + words fits in max_tokens.
Query tokenize(std::string_view sentence, int max_tokens = kMaxQueryTokens,
               int vocab_size = kDefaultVocabSize);

}  // namespace stgvt
