#include "forge/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "forge/error.hpp"

namespace forge::text {

namespace {

UChar32 next_code_point(std::string_view text, std::size_t& pos) {
    const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
    auto i = static_cast<int32_t>(pos);
    UChar32 c = 0;
    U8_NEXT(bytes, i, static_cast<int32_t>(text.size()), c);
    pos = static_cast<std::size_t>(i);
    return c;  // negative on invalid sequence
}

}  // namespace

std::vector<TokenSpan> tokenize(std::string_view text) {
    std::vector<TokenSpan> tokens;
    std::size_t pos = 0;
    bool in_token = false;
    std::size_t start = 0;
    while (pos < text.size()) {
        const std::size_t here = pos;
        const UChar32 c = next_code_point(text, pos);
        const bool space = c >= 0 && u_isUWhiteSpace(c);
        if (space && in_token) {
            tokens.push_back({start, here - start});
            in_token = false;
        } else if (!space && !in_token) {
            start = here;
            in_token = true;
        }
    }
    if (in_token) tokens.push_back({start, text.size() - start});
    return tokens;
}

std::size_t word_count(std::string_view text) { return tokenize(text).size(); }

std::string fold(std::string_view text) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfd = icu::Normalizer2::getNFDInstance(status);
    if (U_FAILURE(status)) throw Error("ICU: NFD normalizer unavailable");
    const auto source = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
    const icu::UnicodeString decomposed = nfd->normalize(source, status);
    if (U_FAILURE(status)) throw Error("ICU: NFD normalization failed");

    icu::UnicodeString stripped;
    for (int32_t i = 0; i < decomposed.length();) {
        const UChar32 c = decomposed.char32At(i);
        if (u_charType(c) != U_NON_SPACING_MARK) stripped.append(c);
        i += U16_LENGTH(c);
    }
    stripped.foldCase();
    std::string out;
    stripped.toUTF8String(out);
    return out;
}

std::string casefold(std::string_view text) {
    auto s = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
    s.foldCase();
    std::string out;
    s.toUTF8String(out);
    return out;
}

std::string trim_non_alnum(std::string_view text) {
    std::size_t pos = 0;
    std::size_t first = text.size();
    std::size_t last_end = 0;
    while (pos < text.size()) {
        const std::size_t here = pos;
        const UChar32 c = next_code_point(text, pos);
        if (c >= 0 && u_isalnum(c)) {
            if (first == text.size()) first = here;
            last_end = pos;
        }
    }
    if (first == text.size()) return {};
    return std::string(text.substr(first, last_end - first));
}

std::string_view trim(std::string_view text) {
    const auto tokens = tokenize(text);
    if (tokens.empty()) return {};
    const auto begin = tokens.front().offset;
    const auto end = tokens.back().offset + tokens.back().length;
    return text.substr(begin, end - begin);
}

std::u32string to_u32(std::string_view text) {
    std::u32string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (pos < text.size()) {
        const UChar32 c = next_code_point(text, pos);
        out.push_back(c < 0 ? U'�' : static_cast<char32_t>(c));
    }
    return out;
}

std::string first_words(std::string_view text, std::size_t max_words) {
    std::string out;
    std::size_t n = 0;
    for (const auto& t : tokenize(text)) {
        if (n == max_words) break;
        if (n++) out += ' ';
        out.append(text.substr(t.offset, t.length));
    }
    return out;
}

}  // namespace forge::text
