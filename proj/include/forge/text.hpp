#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace forge::text {

/// Byte range of one token within the source string.
struct TokenSpan {
    std::size_t offset = 0;
    std::size_t length = 0;
};

/// Maximal runs of non-whitespace code points, where whitespace is the
/// Unicode White_Space property. Invalid UTF-8 bytes count as non-space.
std::vector<TokenSpan> tokenize(std::string_view text);

std::size_t word_count(std::string_view text);

/// Canonical decomposition, combining marks removed, then full case folding.
/// "Mélenchon" and "MELENCHON" both fold to "melenchon".
std::string fold(std::string_view text);

/// Case folding only (diacritics kept).
std::string casefold(std::string_view text);

/// Strips leading and trailing code points that are neither letters nor digits.
std::string trim_non_alnum(std::string_view text);

std::string_view trim(std::string_view text);

/// UTF-8 to code points; invalid bytes map to U+FFFD.
std::u32string to_u32(std::string_view text);

/// First `max_words` whitespace tokens joined by single spaces.
std::string first_words(std::string_view text, std::size_t max_words);

}  // namespace forge::text
