#include "mindtrail/text.hpp"

#include <algorithm>
#include <iterator>

namespace mindtrail::text {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

bool is_punctuation(char32_t c) {
    if (c < 0x80) {
        return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
               (c >= 0x7B && c <= 0x7E);
    }
    return (c >= 0x2010 && c <= 0x205E) ||  // general punctuation
           (c >= 0x3001 && c <= 0x303F) ||  // CJK symbols and punctuation
           (c >= 0xFF01 && c <= 0xFF0F) || (c >= 0xFF1A && c <= 0xFF20) || c == 0x00A1 ||
           c == 0x00AB || c == 0x00BB || c == 0x00BF || c == 0x00B7;
}

bool is_letter(char32_t c) {
    if (c < 0x80) return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    if (c < 0xC0) return false;
    return !is_punctuation(c) && !is_unicode_whitespace(c) && c != kReplacement;
}

bool is_sentence_end(char32_t c) {
    return c == '.' || c == '!' || c == '?' || c == 0x3002 || c == 0xFF01 || c == 0xFF1F ||
           c == 0x2026;
}

}  // namespace

std::u32string decode_utf8(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        const auto b0 = static_cast<unsigned char>(s[i]);
        if (b0 < 0x80) {
            out.push_back(b0);
            ++i;
            continue;
        }
        int len = 0;
        char32_t cp = 0;
        if ((b0 & 0xE0) == 0xC0) {
            len = 2;
            cp = b0 & 0x1F;
        } else if ((b0 & 0xF0) == 0xE0) {
            len = 3;
            cp = b0 & 0x0F;
        } else if ((b0 & 0xF8) == 0xF0) {
            len = 4;
            cp = b0 & 0x07;
        } else {
            out.push_back(kReplacement);
            ++i;
            continue;
        }
        if (i + len > s.size()) {
            out.push_back(kReplacement);
            ++i;
            continue;
        }
        bool ok = true;
        for (int k = 1; k < len; ++k) {
            const auto b = static_cast<unsigned char>(s[i + k]);
            if ((b & 0xC0) != 0x80) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (b & 0x3F);
        }
        const bool overlong = (len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
                              (len == 4 && cp < 0x10000);
        if (!ok || overlong || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
            out.push_back(kReplacement);
            ++i;
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

std::string encode_utf8(std::u32string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char32_t c : s) {
        if (c < 0x80) {
            out.push_back(static_cast<char>(c));
        } else if (c < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (c >> 6)));
            out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
        } else if (c < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (c >> 12)));
            out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (c >> 18)));
            out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
        }
    }
    return out;
}

bool is_valid_utf8(std::string_view s) {
    // Round-tripping through the decoder is exact only for valid input.
    const auto decoded = decode_utf8(s);
    if (std::find(decoded.begin(), decoded.end(), kReplacement) == decoded.end()) return true;
    return encode_utf8(decoded) == s;
}

std::size_t code_point_count(std::string_view s) {
    std::size_t n = 0;
    for (char c : s) {
        if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
    }
    return n;
}

std::string take_code_points(std::string_view s, std::size_t n) {
    std::size_t seen = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) {
            if (seen == n) return std::string(s.substr(0, i));
            ++seen;
        }
    }
    return std::string(s);
}

bool is_unicode_whitespace(char32_t c) {
    return (c >= 0x09 && c <= 0x0D) || c == 0x20 || c == 0x85 || c == 0xA0 || c == 0x1680 ||
           (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F ||
           c == 0x205F || c == 0x3000;
}

char32_t fold_case(char32_t c) {
    if (c >= 'A' && c <= 'Z') return c + 32;
    if (c < 0xC0) return c;
    if (c <= 0xDE && c != 0xD7) return c + 32;                    // Latin-1
    // Latin Extended-A upper/lower pairs.
    if ((c >= 0x0100 && c <= 0x012F) || (c >= 0x0132 && c <= 0x0137) || (c >= 0x014A && c <= 0x0177)) {
        return (c % 2 == 0) ? c + 1 : c;
    }
    if ((c >= 0x0139 && c <= 0x0148) || (c >= 0x0179 && c <= 0x017E)) return (c % 2 == 1) ? c + 1 : c;
    if (c == 0x0178) return 0xFF;
    if (c >= 0x0391 && c <= 0x03A9 && c != 0x03A2) return c + 32;  // Greek
    if (c >= 0x0410 && c <= 0x042F) return c + 32;                 // Cyrillic
    if (c >= 0x0400 && c <= 0x040F) return c + 80;
    if (c >= 0xFF21 && c <= 0xFF3A) return c + 32;                 // full-width Latin
    return c;
}

std::string normalize_ws(std::string_view s) {
    const auto cps = decode_utf8(s);
    std::u32string out;
    out.reserve(cps.size());
    bool pending_space = false;
    for (char32_t c : cps) {
        if (is_unicode_whitespace(c) || c < 0x20 || c == 0x7F) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(U' ');
        pending_space = false;
        out.push_back(fold_case(c));
    }
    return encode_utf8(out);
}

bool is_grounded(std::string_view quote, std::string_view corpus) {
    const auto q = normalize_ws(quote);
    if (q.empty()) return false;
    return normalize_ws(corpus).find(q) != std::string::npos;
}

std::size_t approximate_match_distance(std::string_view quote, std::string_view corpus) {
    const auto q = decode_utf8(normalize_ws(quote));
    const auto t = decode_utf8(normalize_ws(corpus));
    if (q.empty()) return 0;
    // Sellers' variant of Levenshtein: the match may start anywhere in the corpus.
    std::vector<std::size_t> prev(t.size() + 1, 0), cur(t.size() + 1, 0);
    for (std::size_t i = 1; i <= q.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= t.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (q[i - 1] == t[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return *std::min_element(prev.begin(), prev.end());
}

bool same_name(std::string_view a, std::string_view b) { return normalize_ws(a) == normalize_ws(b); }

std::string trim(std::string_view s) {
    const auto cps = decode_utf8(s);
    std::size_t b = 0, e = cps.size();
    while (b < e && is_unicode_whitespace(cps[b])) ++b;
    while (e > b && is_unicode_whitespace(cps[e - 1])) --e;
    return encode_utf8(std::u32string_view(cps).substr(b, e - b));
}

std::vector<std::string> words(std::string_view s) {
    std::vector<std::string> out;
    const auto cps = decode_utf8(s);
    std::u32string token;
    auto flush = [&] {
        std::size_t b = 0, e = token.size();
        while (b < e && is_punctuation(token[b])) ++b;
        while (e > b && is_punctuation(token[e - 1])) --e;
        if (e > b) out.push_back(encode_utf8(std::u32string_view(token).substr(b, e - b)));
        token.clear();
    };
    for (char32_t c : cps) {
        if (is_unicode_whitespace(c)) {
            flush();
        } else {
            token.push_back(c);
        }
    }
    flush();
    return out;
}

bool is_stop_word(std::string_view w) {
    static constexpr std::string_view kStop[] = {
        "a", "about", "above", "after", "again", "against", "all", "also", "am", "an", "and",
        "any", "are", "as", "at", "be", "because", "been", "before", "being", "below", "between",
        "both", "but", "by", "can", "could", "did", "do", "does", "doing", "down", "during",
        "each", "even", "ever", "every", "few", "for", "from", "further", "get", "got", "had",
        "has", "have", "having", "he", "her", "here", "hers", "herself", "him", "himself", "his",
        "how", "i", "i'm", "i've", "if", "in", "into", "is", "it", "it's", "its", "itself", "just",
        "like", "me", "more", "most", "much", "my", "myself", "no", "nor", "not", "now", "of",
        "off", "on", "once", "only", "or", "other", "our", "ours", "out", "over", "own", "really",
        "same", "she", "should", "so", "some", "such", "than", "that", "the", "their", "them",
        "then", "there", "these", "they", "this", "those", "through", "to", "too", "under",
        "until", "up", "very", "was", "we", "were", "what", "when", "where", "which", "while",
        "who", "why", "will", "with", "would", "you", "your", "don't", "can't", "still", "yet",
        "그리고", "하지만", "그래서", "그런데", "너무", "정말", "그냥", "나는", "내가", "저는",
        "제가", "것", "수", "그", "이", "저", "좀", "더", "또", "잘"};
    return std::find(std::begin(kStop), std::end(kStop), w) != std::end(kStop);
}

std::vector<std::string> content_words(std::string_view s) {
    std::vector<std::string> out;
    for (const auto& w : words(s)) {
        auto cps = decode_utf8(w);
        if (std::none_of(cps.begin(), cps.end(), is_letter)) continue;
        for (auto& c : cps) c = fold_case(c);
        auto lowered = encode_utf8(cps);
        if (is_stop_word(lowered) || code_point_count(lowered) < 2) continue;
        out.push_back(std::move(lowered));
    }
    return out;
}

std::vector<Sentence> split_sentences(std::string_view s) {
    std::vector<Sentence> out;
    std::size_t start = 0;
    auto emit = [&](std::size_t end) {
        const auto piece = s.substr(start, end - start);
        const auto trimmed = trim(piece);
        if (!trimmed.empty()) {
            const auto at = piece.find(trimmed);
            out.push_back({trimmed, start + (at == std::string_view::npos ? 0 : at)});
        }
        start = end;
    };
    std::size_t i = 0;
    while (i < s.size()) {
        const auto b0 = static_cast<unsigned char>(s[i]);
        std::size_t len = b0 < 0x80 ? 1 : (b0 & 0xE0) == 0xC0 ? 2 : (b0 & 0xF0) == 0xE0 ? 3 : 4;
        len = std::min(len, s.size() - i);
        const auto cps = decode_utf8(s.substr(i, len));
        const char32_t c = cps.empty() ? 0 : cps[0];
        i += len;
        if (c == '\n' || c == '\r') {
            emit(i - len);
            start = i;
        } else if (is_sentence_end(c)) {
            // Absorb runs like "?!" or "..." into the same sentence.
            while (i < s.size()) {
                const auto nb = static_cast<unsigned char>(s[i]);
                std::size_t nlen = nb < 0x80 ? 1 : (nb & 0xE0) == 0xC0 ? 2 : (nb & 0xF0) == 0xE0 ? 3 : 4;
                nlen = std::min(nlen, s.size() - i);
                const auto ncp = decode_utf8(s.substr(i, nlen));
                if (ncp.empty() || !(is_sentence_end(ncp[0]) || ncp[0] == '"' || ncp[0] == 0x201D ||
                                     ncp[0] == '\'' || ncp[0] == 0x2019 || ncp[0] == ')')) {
                    break;
                }
                i += nlen;
            }
            emit(i);
        }
    }
    emit(s.size());
    return out;
}

}  // namespace mindtrail::text
