#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace citeimpact {

/// Lower-casing whitespace + punctuation tokenizer shared by the length
/// statistics and the model encoders. Whitespace separates tokens; every
/// punctuation code point is a token of its own.
class Tokenizer {
 public:
  std::vector<std::string> tokenize(std::string_view text) const;
  std::size_t count(std::string_view text) const;
};

/// Number of Unicode code points in a UTF-8 string.
std::size_t code_point_count(std::string_view utf8);

/// Replaces every ill-formed UTF-8 sequence with U+FFFD. Returns true if the
/// input was already well formed.
bool sanitize_utf8(std::string& text);

}  // namespace citeimpact
