#include "prokno/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <iterator>
#include <stdexcept>

namespace prokno {

namespace {

const icu::Normalizer2& folding() {
    static const icu::Normalizer2* instance = [] {
        UErrorCode status = U_ZERO_ERROR;
        const icu::Normalizer2* n = icu::Normalizer2::getNFKCCasefoldInstance(status);
        if (U_FAILURE(status) || n == nullptr) throw std::runtime_error("ICU NFKC_Casefold unavailable");
        return n;
    }();
    return *instance;
}

bool is_word_char(UChar32 c, bool inside_token) {
    if (c < 0) return false;
    if (u_isalnum(c)) return true;
    // Combining marks extend a token but never start one.
    return inside_token && (U_GET_GC_MASK(c) & U_GC_M_MASK) != 0;
}

std::string fold(std::string_view raw) {
    UErrorCode status = U_ZERO_ERROR;
    icu::UnicodeString source = icu::UnicodeString::fromUTF8(icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
    icu::UnicodeString folded = folding().normalize(source, status);
    if (U_FAILURE(status)) return std::string(raw);
    std::string out;
    folded.toUTF8String(out);
    return out;
}

constexpr std::string_view kStopwords[] = {
    "a",     "an",    "the",   "and",  "or",   "but",  "if",   "of",    "to",    "in",    "on",
    "at",    "for",   "with",  "by",   "from", "as",   "is",   "are",   "was",   "were",  "be",
    "been",  "am",    "do",    "does", "did",  "have", "has",  "had",   "i",     "you",   "your",
    "yours", "me",    "my",    "we",   "our",  "he",   "she",  "it",    "its",   "they",  "them",
    "their", "this",  "that",  "these", "those", "what", "which", "who", "how", "when",  "where",
    "why",   "can",   "could", "would", "should", "will", "there", "any", "about"};

}  // namespace

std::vector<Token> normalize(std::string_view text) {
    std::vector<Token> tokens;
    const auto* bytes = reinterpret_cast<const std::uint8_t*>(text.data());
    const auto length = static_cast<int32_t>(text.size());
    int32_t i = 0;
    int32_t token_start = -1;
    while (i < length) {
        const int32_t at = i;
        UChar32 c = 0;
        U8_NEXT(bytes, i, length, c);
        const bool word = is_word_char(c, token_start >= 0);
        if (word && token_start < 0) {
            token_start = at;
        } else if (!word && token_start >= 0) {
            auto raw = text.substr(static_cast<std::size_t>(token_start), static_cast<std::size_t>(at - token_start));
            tokens.push_back({fold(raw), static_cast<std::size_t>(token_start), static_cast<std::size_t>(at)});
            token_start = -1;
        }
    }
    if (token_start >= 0) {
        auto raw = text.substr(static_cast<std::size_t>(token_start));
        tokens.push_back({fold(raw), static_cast<std::size_t>(token_start), text.size()});
    }
    return tokens;
}

std::string normalize_phrase(std::string_view text) {
    std::string out;
    for (const auto& t : normalize(text)) {
        if (!out.empty()) out += ' ';
        out += t.text;
    }
    return out;
}

std::vector<std::string> token_texts(std::string_view text) {
    std::vector<std::string> out;
    for (auto& t : normalize(text)) out.push_back(std::move(t.text));
    return out;
}

std::set<std::string> token_set(std::string_view text) {
    auto texts = token_texts(text);
    return {texts.begin(), texts.end()};
}

bool is_stopword(std::string_view token) {
    return std::find(std::begin(kStopwords), std::end(kStopwords), token) != std::end(kStopwords);
}

std::set<std::string> content_token_set(std::string_view text) {
    std::set<std::string> out;
    for (auto& t : token_texts(text)) {
        if (!is_stopword(t)) out.insert(std::move(t));
    }
    return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t shared = 0;
    for (const auto& t : a) shared += b.count(t);
    const std::size_t combined = a.size() + b.size() - shared;
    return static_cast<double>(shared) / static_cast<double>(combined);
}

double token_set_similarity(std::string_view a, std::string_view b) { return jaccard(token_set(a), token_set(b)); }

double content_token_similarity(std::string_view a, std::string_view b) {
    auto ca = content_token_set(a);
    auto cb = content_token_set(b);
    if (ca.empty() && cb.empty()) return token_set_similarity(a, b);
    return jaccard(ca, cb);
}

}  // namespace prokno
