#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace mindtrail::text {

// UTF-8 helpers. Invalid sequences decode as U+FFFD.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);
bool is_valid_utf8(std::string_view s);
std::size_t code_point_count(std::string_view s);
// First `n` code points of `s`.
std::string take_code_points(std::string_view s, std::size_t n);

bool is_unicode_whitespace(char32_t c);
char32_t fold_case(char32_t c);

/// Collapses runs of Unicode whitespace (and C0 controls) to one space, trims,
/// and case-folds. Used for grounding checks and duplicate detection.
std::string normalize_ws(std::string_view s);

/// True when normalize_ws(quote) is non-empty and occurs inside normalize_ws(corpus).
bool is_grounded(std::string_view quote, std::string_view corpus);

/// Smallest edit distance between normalize_ws(quote) and any substring of
/// normalize_ws(corpus), computed over code points.
std::size_t approximate_match_distance(std::string_view quote, std::string_view corpus);

bool same_name(std::string_view a, std::string_view b);

// Whitespace-separated tokens with leading/trailing punctuation stripped.
std::vector<std::string> words(std::string_view s);
bool is_stop_word(std::string_view lowered_word);
// Lowercased words that are not stop words and carry at least one letter.
std::vector<std::string> content_words(std::string_view s);

struct Sentence {
    std::string text;      // verbatim slice of the source, trimmed
    std::size_t offset{};  // byte offset of `text` in the source
};
// Splits on . ! ? and their full-width forms, ellipses and line breaks.
std::vector<Sentence> split_sentences(std::string_view s);

std::string trim(std::string_view s);

}  // namespace mindtrail::text
