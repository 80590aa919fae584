#include "stgvt/tokenizer.hpp"

#include <cctype>
#include <sstream>

#include "stgvt/geometry.hpp"
#include "stgvt/rng.hpp"

namespace stgvt {

Query tokenize(std::string_view sentence, int max_tokens, int vocab_size) {
  if (max_tokens < 1) throw InvalidInput("tokenize: max_tokens must be >= 1");
  if (vocab_size < 3) throw InvalidInput("tokenize: vocab_size must be >= 3");
  Query q;
  q.raw_text = std::string(sentence);
  q.tokens.push_back(kClsToken);
  std::istringstream words{std::string(sentence)};
  std::string word;
  while (static_cast<int>(q.tokens.size()) < max_tokens && words >> word) {
    for (char& c : word) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    const auto id = fnv1a(word) % static_cast<std::uint64_t>(vocab_size - 2);
    q.tokens.push_back(static_cast<int>(id) + 2);
  }
  q.valid_length = static_cast<int>(q.tokens.size());
  q.tokens.resize(static_cast<std::size_t>(max_tokens), kPadToken);
  return q;
}

}  // namespace stgvt
