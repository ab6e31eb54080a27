#include <gtest/gtest.h>

#include "mindtrail/error.hpp"
#include "mindtrail/metrics.hpp"
#include "support.hpp"

using namespace mindtrail;
using namespace mindtrail::metrics;

namespace {

EventRecord enter(Timestamp t, const char* page) { return {t, EventKind::page_enter, {{"page", page}}}; }
EventRecord leave(Timestamp t, const char* page) { return {t, EventKind::page_leave, {{"page", page}}}; }
EventRecord other(Timestamp t) { return {t, EventKind::answer_updated, {{"question_id", "q1"}}}; }

}  // namespace

TEST(Syllables, WorkedExamples) {
    EXPECT_EQ(count_syllables("안녕하세요"), 5);
    EXPECT_EQ(count_syllables(""), 0);
    EXPECT_EQ(count_syllables("Hello 세계!"), 2);
    EXPECT_EQ(count_syllables("ㄱㄴㄷ 가"), 1);  // bare jamo are not syllables
}

TEST(Usage, FreshSessionCountsOnlyTheNarrative) {
    const auto s = create_session("s1", "안녕하세요 반가워요", "ko", 0);
    EXPECT_EQ(usage_row(s), (UsageRow{9, 0, 0, 0, 0, 0}));
}

TEST(Usage, CountsThemesQuestionsKeywordsAndUserComments) {
    auto s = create_session("s1", "가나다", "ko", 0);
    const auto t1 = activate_theme(s, {"하나", {}, "", Origin::user}, 1).id;
    const auto t2 = activate_theme(s, {"둘", {}, "", Origin::user}, 1).id;
    const auto q1 = select_question(s, t1, {"왜?", "x"}, 2).id;
    select_question(s, t1, {"언제?", "x"}, 2);
    select_question(s, t2, {"누구?", "x"}, 2);
    update_answer(s, q1, "네 맞아요", 3);
    append_keyword_batch(s, q1, {"가족", "친구"});
    append_comment(s, q1, {"a", CommentCategory::tip, "r", Trigger::automatic, 4});
    append_comment(s, q1, {"b", CommentCategory::insight, "r", Trigger::user, 5});
    EXPECT_EQ(usage_row(s), (UsageRow{3, 4, 2, 3, 2, 1}));
}

TEST(Aggregate, ThemeAndQuestionRows) {
    const auto themes = aggregate(std::vector<double>{7, 3, 2, 2, 9, 5, 5, 5, 6, 4, 3, 4, 5, 6, 4, 11, 3, 4, 5});
    EXPECT_EQ(format_fixed(themes.mean), "4.89");
    EXPECT_EQ(format_fixed(themes.sample_sd), "2.26");
    EXPECT_EQ(themes.min, 2);
    EXPECT_EQ(themes.max, 11);
    const auto qs = aggregate(std::vector<double>{17, 7, 18, 3, 11, 4, 15, 6, 5, 4, 8, 28, 12, 9, 10, 12, 22, 4, 23});
    EXPECT_EQ(format_fixed(qs.mean), "11.47");
    EXPECT_EQ(format_fixed(qs.sample_sd), "7.28");
}

TEST(Aggregate, EqualValuesAndTooFewRows) {
    const auto s = aggregate(std::vector<double>{5, 5});
    EXPECT_EQ(format_fixed(s.mean), "5.00");
    EXPECT_EQ(format_fixed(s.sample_sd), "0.00");
    try {
        aggregate(std::vector<double>{5});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::InsufficientRows);
    }
}

TEST(Aggregate, RoundingIsHalfUp) {
    EXPECT_EQ(round_half_up(2.345, 2), 2.35);
    EXPECT_EQ(round_half_up(-0.001, 2), 0.0);
    EXPECT_EQ(format_fixed(-0.001), "0.00");
    EXPECT_EQ(format_fixed(1.005), "1.01");
}

TEST(Timeline, HandSegmentation) {
    const auto tl = phase_timeline({enter(0, "narrative"), enter(300, "exploration"), enter(1800, "summary"),
                                    other(2100)});
    EXPECT_EQ(tl.segments, (std::vector<Segment>{{Page::narrative, 0, 300},
                                                 {Page::exploration, 300, 1800},
                                                 {Page::summary, 1800, 2100}}));
    EXPECT_FALSE(tl.flagged);
}

TEST(Timeline, SingleEnter) {
    const auto tl = phase_timeline({enter(0, "narrative"), other(60)});
    EXPECT_EQ(tl.segments, (std::vector<Segment>{{Page::narrative, 0, 60}}));
}

TEST(Timeline, PhasesRecur) {
    const auto tl = phase_timeline({enter(0, "exploration"), leave(10, "exploration"), enter(10, "summary"),
                                    leave(20, "summary"), enter(20, "exploration"), other(30)});
    ASSERT_EQ(tl.segments.size(), 3u);
    EXPECT_EQ(tl.segments[0].phase, Page::exploration);
    EXPECT_EQ(tl.segments[2].phase, Page::exploration);
    EXPECT_FALSE(tl.flagged);
}

TEST(Timeline, MalformedInputIsFlaggedNotFatal) {
    EXPECT_TRUE(phase_timeline({other(5), enter(10, "summary"), other(20)}).flagged);
    EXPECT_TRUE(phase_timeline({enter(10, "summary"), leave(15, "narrative"), other(20)}).flagged);
    EXPECT_TRUE(phase_timeline({enter(10, "summary"), enter(5, "narrative")}).flagged);
    EXPECT_TRUE(phase_timeline({enter(10, "lobby"), enter(12, "summary")}).flagged);
    const auto none = phase_timeline({other(1), other(2)});
    EXPECT_TRUE(none.flagged);
    EXPECT_TRUE(none.segments.empty());
    EXPECT_TRUE(phase_timeline({}).segments.empty());
}

TEST(Render, CsvHasFootersForTwoOrMoreRows) {
    const std::vector<LabeledRow> rows{{"a", {10, 20, 1, 2, 3, 4}}, {"b", {20, 40, 3, 4, 5, 6}}};
    const auto csv = render_csv(rows);
    EXPECT_NE(csv.find("session,narrative_syllables"), std::string::npos);
    EXPECT_NE(csv.find("a,10,20,1,2,3,4"), std::string::npos);
    EXPECT_NE(csv.find("Mean,15.00,30.00,2.00,3.00,4.00,5.00"), std::string::npos);
    EXPECT_NE(csv.find("SD,7.07,14.14"), std::string::npos);
    EXPECT_EQ(render_csv({rows[0]}).find("Mean"), std::string::npos);
    EXPECT_NE(render_table(rows).find("Mean"), std::string::npos);
}
