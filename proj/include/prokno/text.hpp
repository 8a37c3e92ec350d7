#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace prokno {

/// A normalized token and the byte range [start, end) it came from in the
/// original UTF-8 text.
struct Token {
    std::string text;
    std::size_t start = 0;
    std::size_t end = 0;

    bool operator==(const Token&) const = default;
};

/// Splits on whitespace and punctuation, then applies NFKC case folding to
/// each token. Offsets always index the caller's original string.
std::vector<Token> normalize(std::string_view text);

/// Normalized tokens joined by single spaces ("I can't" -> "i can t").
std::string normalize_phrase(std::string_view text);

std::vector<std::string> token_texts(std::string_view text);
std::set<std::string> token_set(std::string_view text);

bool is_stopword(std::string_view token);

/// Token set with stopwords removed.
std::set<std::string> content_token_set(std::string_view text);

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

/// Jaccard over normalized token sets; two token-free texts score 1.0.
double token_set_similarity(std::string_view a, std::string_view b);

/// Jaccard over content tokens, falling back to all tokens when both sides
/// are nothing but stopwords.
double content_token_similarity(std::string_view a, std::string_view b);

}  // namespace prokno
