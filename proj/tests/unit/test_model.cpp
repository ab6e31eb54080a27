#include <gtest/gtest.h>

#include "mindtrail/error.hpp"
#include "mindtrail/model.hpp"
#include "support.hpp"

using namespace mindtrail;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::NotFound;
}

ThemeSuggestion ai(std::string name, std::string quote) {
    return {std::move(name), {"another way to say it"}, std::move(quote), Origin::ai};
}

}  // namespace

TEST(CreateSession, StartsAtVersionOneWithoutThemes) {
    const auto s = create_session("s1", testkit::kJaneNarrative, "ko", 10);
    EXPECT_EQ(s.state_version, 1);
    EXPECT_TRUE(s.themes.empty());
    EXPECT_EQ(s.created_at, 10);
}

TEST(CreateSession, RejectsBlankNarrative) {
    EXPECT_EQ(code_of([] { create_session("s1", "   ", "ko", 0); }), ErrorCode::EmptyNarrative);
    EXPECT_EQ(code_of([] { create_session("s1", "　\t\n", "ko", 0); }), ErrorCode::EmptyNarrative);
    EXPECT_EQ(create_session("s1", "x", "en", 0).narrative, "x");
}

TEST(Themes, ActivateAppendsAndRejectsDuplicates) {
    auto s = create_session("s1", testkit::kJaneNarrative, "en", 0);
    const auto& t = activate_theme(s, ai("Overwhelmed by new responsibilities", "the days feel long"), 5);
    EXPECT_EQ(t.id, "t1");
    EXPECT_EQ(s.state_version, 2);
    activate_theme(s, {"About grandson", {}, "", Origin::user}, 6);
    EXPECT_EQ(s.themes.size(), 2u);
    EXPECT_EQ(code_of([&] { activate_theme(s, ai("overwhelmed  by NEW responsibilities", "x"), 7); }),
              ErrorCode::DuplicateTheme);
}

TEST(Themes, UserOriginCarriesNoExpressionsOrQuote) {
    auto s = create_session("s1", "x", "en", 0);
    const auto& t = activate_theme(s, {"Mine", {"stray"}, "stray quote", Origin::user}, 1);
    EXPECT_TRUE(t.suggestion.expressions.empty());
    EXPECT_TRUE(t.suggestion.quote.empty());
}

TEST(Themes, PinThenActivateMovesTheSuggestion) {
    auto s = create_session("s1", testkit::kJaneNarrative, "en", 0);
    const auto p = ai("Struggle with purposelessness", "I wonder what my purpose is");
    pin_theme(s, p);
    EXPECT_EQ(s.pinned.size(), 1u);
    EXPECT_EQ(code_of([&] { pin_theme(s, p); }), ErrorCode::DuplicateTheme);
    activate_theme(s, p, 3);
    EXPECT_TRUE(s.pinned.empty());
    EXPECT_EQ(s.themes.size(), 1u);
}

TEST(Questions, SelectBuildsAnOrderedThread) {
    auto s = create_session("s1", testkit::kJaneNarrative, "en", 0);
    const auto tid = activate_theme(s, ai("Overwhelmed by new responsibilities", "the days feel long"), 10).id;
    select_question(s, tid,
                    {"In what ways could you possibly incorporate your hobbies or self-development activities into "
                     "your current routine?",
                     "connect to past strengths"},
                    20);
    select_question(s, tid, {"What feels heaviest on a typical day?", "locate the load"}, 30);
    select_question(s, tid, {"Who could share some of it?", "find support"}, 25);
    const auto& qs = s.find_theme(tid)->questions;
    ASSERT_EQ(qs.size(), 3u);
    EXPECT_EQ(qs[2].id, "q3");
    EXPECT_EQ(code_of([&] { select_question(s, "t9", {"Why?", "x"}, 40); }), ErrorCode::UnknownTheme);
    EXPECT_EQ(code_of([&] { select_question(s, tid, {"who could share SOME of it?", "x"}, 40); }),
              ErrorCode::InvalidRequest);
}

TEST(Answers, RevisionCountsEveryUpdate) {
    auto s = create_session("s1", testkit::kJaneNarrative, "en", 0);
    const auto tid = activate_theme(s, ai("Retirement", "I retired last year"), 1).id;
    const auto qid = select_question(s, tid, {"What changed?", "x"}, 2).id;
    EXPECT_EQ(s.find_question(qid)->answer.revision, 0);
    update_answer(s, qid, "finding peer older adults", 3);
    EXPECT_EQ(update_answer(s, qid, "finding peer older adults nearby", 4).revision, 2);
    EXPECT_EQ(update_answer(s, qid, "", 5).revision, 3);
    for (int i = 0; i < 100; ++i) update_answer(s, qid, "draft " + std::to_string(i), 6 + i);
    EXPECT_EQ(s.find_question(qid)->answer.revision, 103);
    EXPECT_EQ(code_of([&] { update_answer(s, "q77", "x", 1); }), ErrorCode::UnknownQuestion);
}

TEST(Keywords, BatchesAreDisjoint) {
    auto s = create_session("s1", testkit::kJaneNarrative, "en", 0);
    const auto tid = activate_theme(s, ai("Retirement", "I retired last year"), 1).id;
    const auto qid = select_question(s, tid, {"What changed?", "x"}, 2).id;
    EXPECT_EQ(append_keyword_batch(s, qid, {"flexibility", "support network"}).batch_index, 0);
    EXPECT_EQ(append_keyword_batch(s, qid, {"routine"}).batch_index, 1);
    EXPECT_EQ(code_of([&] { append_keyword_batch(s, qid, {"Flexibility"}); }), ErrorCode::InvalidRequest);
}

TEST(Comments, AutomaticComesFirstAndOnlyOnce) {
    auto s = create_session("s1", testkit::kJaneNarrative, "en", 0);
    const auto tid = activate_theme(s, ai("Retirement", "I retired last year"), 1).id;
    const auto qid = select_question(s, tid, {"What changed?", "x"}, 2).id;
    EXPECT_EQ(code_of([&] { append_comment(s, qid, {"hi", CommentCategory::tip, "r", Trigger::user, 3}); }),
              ErrorCode::InvalidRequest);
    append_comment(s, qid, {"hi", CommentCategory::tip, "r", Trigger::automatic, 3});
    EXPECT_EQ(code_of([&] { append_comment(s, qid, {"hi", CommentCategory::tip, "r", Trigger::automatic, 4}); }),
              ErrorCode::InvalidRequest);
    append_comment(s, qid, {"more", CommentCategory::insight, "r", Trigger::user, 5});
    append_comment(s, qid, {"again", CommentCategory::insight, "r", Trigger::user, 6});
    EXPECT_EQ(s.find_question(qid)->comments.size(), 3u);
}

TEST(Summary, SnapshotAnchorsToTheVersionItSaw) {
    auto s = create_session("s1", testkit::kJaneNarrative, "en", 0);
    const auto& a = append_summary(s, "first", 1);
    EXPECT_EQ(a.state_version, 1);
    EXPECT_EQ(append_summary(s, "second", 2).state_version, 2);
}

TEST(Pathways, ScoresAndDeltas) {
    EXPECT_EQ(score_pathways(PathwaysResponse{1, 1, 1, 1}), 4);
    EXPECT_EQ(score_pathways(PathwaysResponse{8, 8, 8, 8}), 32);
    EXPECT_EQ(score_pathways(PathwaysResponse{2, 3, 4, 5}), 14);
    EXPECT_EQ(code_of([] { score_pathways(PathwaysResponse{0, 3, 4, 5}); }), ErrorCode::OutOfRangeItem);
    EXPECT_EQ(code_of([] { score_pathways(std::vector<int>{1, 2, 3}); }), ErrorCode::OutOfRangeItem);
    EXPECT_EQ(pathways_delta({{3, 2, 3, 2}, PathwaysResponse{5, 6, 5, 6}}), 12);
    EXPECT_FALSE(pathways_delta({{3, 2, 3, 2}, std::nullopt}).has_value());
}

TEST(Pathways, PostNeedsPre) {
    auto s = create_session("s1", "x", "en", 0);
    EXPECT_EQ(code_of([&] { submit_survey(s, true, {4, 4, 4, 4}); }), ErrorCode::InvalidRequest);
    EXPECT_EQ(submit_survey(s, false, {4, 4, 4, 4}), 16);
    EXPECT_EQ(submit_survey(s, true, {5, 5, 5, 5}), 20);
    EXPECT_EQ(pathways_delta(*s.survey), 4);
}
