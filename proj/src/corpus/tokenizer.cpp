#include "citeimpact/corpus/tokenizer.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

namespace citeimpact {
namespace {

template <typename Emit>
void scan_tokens(std::string_view text, bool lower, Emit&& emit) {
  std::string current;
  const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 cp = 0;
    U8_NEXT(bytes, i, length, cp);
    if (cp < 0) cp = 0xFFFD;
    if (u_isUWhiteSpace(cp)) {
      if (!current.empty()) emit(std::move(current)), current.clear();
      continue;
    }
    if (u_ispunct(cp)) {
      if (!current.empty()) emit(std::move(current)), current.clear();
      std::string punct;
      char buffer[U8_MAX_LENGTH];
      int32_t n = 0;
      U8_APPEND_UNSAFE(buffer, n, cp);
      punct.assign(buffer, static_cast<std::size_t>(n));
      emit(std::move(punct));
      continue;
    }
    if (lower) cp = u_tolower(cp);
    char buffer[U8_MAX_LENGTH];
    int32_t n = 0;
    U8_APPEND_UNSAFE(buffer, n, cp);
    current.append(buffer, static_cast<std::size_t>(n));
  }
  if (!current.empty()) emit(std::move(current));
}

}  // namespace

std::vector<std::string> Tokenizer::tokenize(std::string_view text) const {
  std::vector<std::string> tokens;
  scan_tokens(text, true, [&](std::string&& token) { tokens.push_back(std::move(token)); });
  return tokens;
}

std::size_t Tokenizer::count(std::string_view text) const {
  std::size_t n = 0;
  scan_tokens(text, false, [&](std::string&&) { ++n; });
  return n;
}

std::size_t code_point_count(std::string_view utf8) {
  std::size_t n = 0;
  const auto* bytes = reinterpret_cast<const uint8_t*>(utf8.data());
  const auto length = static_cast<int32_t>(utf8.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 cp = 0;
    U8_NEXT(bytes, i, length, cp);
    ++n;
  }
  return n;
}

bool sanitize_utf8(std::string& text) {
  const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  bool clean = true;
  std::string out;
  int32_t i = 0;
  while (i < length) {
    const int32_t start = i;
    UChar32 cp = 0;
    U8_NEXT(bytes, i, length, cp);
    if (cp < 0) {
      if (clean) {
        out.assign(text, 0, static_cast<std::size_t>(start));
        clean = false;
      }
      out += "\xEF\xBF\xBD";
    } else if (!clean) {
      out.append(text, static_cast<std::size_t>(start), static_cast<std::size_t>(i - start));
    }
  }
  if (!clean) text = std::move(out);
  return clean;
}

}  // namespace citeimpact
