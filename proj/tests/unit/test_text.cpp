#include <gtest/gtest.h>

#include <random>

#include "mindtrail/text.hpp"

using namespace mindtrail::text;

namespace {

// Plain O(n^3) reference: best edit distance of q against every substring of t.
std::size_t brute_distance(const std::u32string& q, const std::u32string& t) {
    auto lev = [](const std::u32string& a, const std::u32string& b) {
        std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
        for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
        for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
        for (std::size_t i = 1; i <= a.size(); ++i)
            for (std::size_t j = 1; j <= b.size(); ++j)
                d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1])});
        return d[a.size()][b.size()];
    };
    std::size_t best = q.size();
    for (std::size_t i = 0; i <= t.size(); ++i)
        for (std::size_t j = i; j <= t.size(); ++j) best = std::min(best, lev(q, t.substr(i, j - i)));
    return best;
}

}  // namespace

TEST(Utf8, RoundTripsMixedScripts) {
    const std::string s = "Hello 세계! Привет 🙂";
    EXPECT_EQ(encode_utf8(decode_utf8(s)), s);
    EXPECT_EQ(code_point_count(s), 18u);
    EXPECT_TRUE(is_valid_utf8(s));
    EXPECT_FALSE(is_valid_utf8("\xC3\x28"));
    EXPECT_FALSE(is_valid_utf8("\xED\xA0\x80"));  // surrogate
}

TEST(Utf8, InvalidBytesDecodeAsReplacement) {
    const auto cps = decode_utf8("a\xFF" "b");
    ASSERT_EQ(cps.size(), 3u);
    EXPECT_EQ(cps[1], U'�');
}

TEST(Utf8, TakeCodePointsNeverSplitsACharacter) {
    EXPECT_EQ(take_code_points("안녕하세요", 2), "안녕");
    EXPECT_EQ(take_code_points("abc", 10), "abc");
}

TEST(Normalize, CollapsesWhitespaceAndFoldsCase) {
    EXPECT_EQ(normalize_ws("  Hello\t\n  WORLD  "), "hello world");
    EXPECT_EQ(normalize_ws("　안녕  세계"), "안녕 세계");
    EXPECT_EQ(normalize_ws(" \t\n"), "");
    EXPECT_TRUE(same_name("About  Grandson", "about grandson"));
    EXPECT_FALSE(same_name("About grandson", "About grandsons"));
}

TEST(Grounding, SubstringAfterNormalization) {
    const std::string corpus = "I retired last year.\nNow I   care for my grandson.";
    EXPECT_TRUE(is_grounded("now i care for my grandson", corpus));
    EXPECT_TRUE(is_grounded("year. Now", corpus));
    EXPECT_FALSE(is_grounded("I care for my granddaughter", corpus));
    EXPECT_FALSE(is_grounded("   ", corpus));
}

TEST(Grounding, ApproximateDistanceMatchesBruteForce) {
    std::mt19937 rng(3);
    const std::u32string alphabet = U"ab c가나";
    for (int i = 0; i < 300; ++i) {
        std::u32string q, t;
        for (std::size_t k = 1 + rng() % 5; k > 0; --k) q.push_back(alphabet[rng() % alphabet.size()]);
        for (std::size_t k = rng() % 10; k > 0; --k) t.push_back(alphabet[rng() % alphabet.size()]);
        const auto nq = decode_utf8(normalize_ws(encode_utf8(q)));
        const auto nt = decode_utf8(normalize_ws(encode_utf8(t)));
        if (nq.empty()) continue;
        EXPECT_EQ(approximate_match_distance(encode_utf8(q), encode_utf8(t)), brute_distance(nq, nt))
            << encode_utf8(q) << " in " << encode_utf8(t);
    }
}

TEST(Grounding, OneCharacterEditIsANearMiss) {
    EXPECT_EQ(approximate_match_distance("the days feel lxng", "but the days feel long."), 1u);
    EXPECT_EQ(approximate_match_distance("the days feel long", "but the days feel long."), 0u);
}

TEST(Words, StripsPunctuationAndStopWords) {
    EXPECT_EQ(words("Hello, world!  (yes)"), (std::vector<std::string>{"Hello", "world", "yes"}));
    EXPECT_EQ(content_words("I care for my Grandson, and it is hard."),
              (std::vector<std::string>{"care", "grandson", "hard"}));
}

TEST(Sentences, SplitsOnTerminatorsAndLineBreaks) {
    const std::string s = "First one. Second?! 세 번째입니다。\nFourth line without end";
    const auto out = split_sentences(s);
    ASSERT_EQ(out.size(), 4u);
    EXPECT_EQ(out[0].text, "First one.");
    EXPECT_EQ(out[1].text, "Second?!");
    EXPECT_EQ(out[2].text, "세 번째입니다。");
    EXPECT_EQ(out[3].text, "Fourth line without end");
    for (const auto& sen : out) EXPECT_EQ(s.substr(sen.offset, sen.text.size()), sen.text);
}

TEST(Sentences, EllipsisStaysWithItsSentence) {
    const auto out = split_sentences("I don't know... Maybe tomorrow.");
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0].text, "I don't know...");
}
