#include "citeimpact/models/vocabulary.hpp"

#include <algorithm>

#include "citeimpact/common/error.hpp"

namespace citeimpact {

Vocabulary Vocabulary::build(const Corpus& train, std::size_t min_frequency,
                             const Tokenizer& tokenizer) {
  if (train.empty()) throw PreconditionError("cannot build a vocabulary from an empty corpus");
  std::unordered_map<std::string, std::size_t> freq;
  for (const auto& inst : train) {
    for (auto& token : tokenizer.tokenize(inst.text)) ++freq[std::move(token)];
  }
  std::vector<std::pair<std::string, std::size_t>> entries;
  for (auto& [token, n] : freq) {
    if (n >= std::max<std::size_t>(min_frequency, 1)) entries.emplace_back(token, n);
  }
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<std::string> tokens;
  tokens.reserve(entries.size());
  for (auto& e : entries) tokens.push_back(std::move(e.first));
  return from_tokens(std::move(tokens), min_frequency);
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens, std::size_t min_frequency) {
  Vocabulary vocab;
  vocab.min_frequency_ = min_frequency;
  vocab.tokens_.reserve(tokens.size() + 2);
  vocab.tokens_.emplace_back(kPaddingToken);
  vocab.tokens_.emplace_back(kUnknownToken);
  vocab.index_.emplace(kPaddingToken, kPadding);
  vocab.index_.emplace(kUnknownToken, kUnknown);
  for (auto& token : tokens) {
    if (token.empty()) throw PreconditionError("vocabulary tokens must be non-empty");
    if (!vocab.index_.emplace(token, vocab.tokens_.size()).second) {
      throw PreconditionError("duplicate vocabulary token '" + token + "'");
    }
    vocab.tokens_.push_back(std::move(token));
  }
  return vocab;
}

std::size_t Vocabulary::id_of(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnknown : it->second;
}

std::vector<std::size_t> Vocabulary::encode_unpadded(std::string_view text,
                                                     std::size_t max_seq_len) const {
  std::vector<std::size_t> ids;
  for (const auto& token : tokenizer_.tokenize(text)) {
    if (ids.size() == max_seq_len) break;
    ids.push_back(id_of(token));
  }
  return ids;
}

std::vector<std::size_t> Vocabulary::encode(std::string_view text, std::size_t max_seq_len) const {
  auto ids = encode_unpadded(text, max_seq_len);
  ids.resize(max_seq_len, kPadding);
  return ids;
}

}  // namespace citeimpact
