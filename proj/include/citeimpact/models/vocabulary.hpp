#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "citeimpact/corpus/corpus.hpp"
#include "citeimpact/corpus/tokenizer.hpp"

namespace citeimpact {

/// Dense token ids. Id 0 is padding, id 1 is the unknown token.
class Vocabulary {
 public:
  static constexpr std::size_t kPadding = 0;
  static constexpr std::size_t kUnknown = 1;
  static constexpr std::string_view kPaddingToken = "<pad>";
  static constexpr std::string_view kUnknownToken = "<unk>";

  /// Tokens with frequency >= min_frequency in `train`, ordered by descending
  /// frequency then lexicographically.
  static Vocabulary build(const Corpus& train, std::size_t min_frequency,
                          const Tokenizer& tokenizer = {});

  /// Vocabulary over `tokens` in the given order (reserved ids are prepended).
  static Vocabulary from_tokens(std::vector<std::string> tokens, std::size_t min_frequency = 1);

  std::size_t size() const { return tokens_.size(); }
  std::size_t min_frequency() const { return min_frequency_; }
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  /// Id of a token, or kUnknown.
  std::size_t id_of(std::string_view token) const;

  /// Token ids of `text`, truncated to max_seq_len and right-padded with kPadding.
  std::vector<std::size_t> encode(std::string_view text, std::size_t max_seq_len) const;

  /// encode() without the padding.
  std::vector<std::size_t> encode_unpadded(std::string_view text, std::size_t max_seq_len) const;

  /// All tokens in id order, reserved tokens included.
  const std::vector<std::string>& tokens() const { return tokens_; }

  bool operator==(const Vocabulary& other) const {
    return tokens_ == other.tokens_ && min_frequency_ == other.min_frequency_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t min_frequency_ = 1;
  Tokenizer tokenizer_;
};

}  // namespace citeimpact
