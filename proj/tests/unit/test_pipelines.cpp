#include <gtest/gtest.h>

#include <set>

#include "mindtrail/error.hpp"
#include "mindtrail/pipelines.hpp"
#include "mindtrail/text.hpp"
#include "mindtrail/xml.hpp"
#include "support.hpp"

using namespace mindtrail;
using namespace mindtrail::pipelines;

namespace {

std::size_t occurrences(const std::string& hay, const std::string& needle) {
    std::size_t n = 0;
    for (auto at = hay.find(needle); at != std::string::npos; at = hay.find(needle, at + 1)) ++n;
    return n;
}

struct Fixture : ::testing::Test {
    std::shared_ptr<llm::MockProvider> mock = std::make_shared<llm::MockProvider>(7);
    llm::Gateway gateway{llm::ProviderConfig{}, mock};
    Pipelines pipes{gateway};
    Session session = create_session("s1", testkit::kJaneNarrative, "en", 0);

    std::string theme() {
        return activate_theme(session, {"Overwhelmed by new responsibilities", {"too much at once"},
                                        "the days feel long", Origin::ai},
                              1)
            .id;
    }
};

}  // namespace

TEST(StateXml, FreshSessionHasEmptyLog) {
    const auto s = create_session("s1", "x", "en", 0);
    const auto xml_text = serialize_state_xml(s, {});
    EXPECT_NE(xml_text.find("<previous_session_log></previous_session_log>"), std::string::npos);
    EXPECT_EQ(xml::parse(xml_text).name, "state");
}

TEST(StateXml, FullScopeCarriesEveryTagOnce) {
    auto s = create_session("s1", testkit::kJaneNarrative, "en", 0);
    const auto tid = activate_theme(s, {"Retirement", {"after work"}, "I retired last year", Origin::ai}, 1).id;
    const auto qid = select_question(s, tid, {"What changed?", "x"}, 2).id;
    update_answer(s, qid, "A lot.", 3);
    const auto x = serialize_state_xml(s, {true, tid, qid, true});
    const auto doc = xml::parse(x);
    for (const char* tag :
         {"initial_information", "previous_session_log", "theme_of_session", "question", "current_response"}) {
        EXPECT_EQ(doc.children_named(tag).size(), 1u) << tag;
    }
    EXPECT_EQ(doc.child("question")->text, "What changed?");
    EXPECT_EQ(doc.child("current_response")->text, "A lot.");
}

TEST(StateXml, EscapesUserTextAndReparses) {
    const auto s = create_session("s1", "if a < b & c > d \"quoted\"", "en", 0);
    const auto x = serialize_state_xml(s, {});
    EXPECT_NE(x.find("&lt;"), std::string::npos);
    EXPECT_EQ(xml::parse(x).child("initial_information")->child("narrative")->text, s.narrative);
}

TEST(StateXml, ScopeRulesAndUnknownIds) {
    const auto s = create_session("s1", "x", "en", 0);
    EXPECT_THROW(serialize_state_xml(s, {true, std::nullopt, std::string("q1"), false}), Error);
    try {
        serialize_state_xml(s, {true, std::string("t4"), std::nullopt, false});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UnknownTheme);
    }
}

TEST(Prompts, BuiltinPacksPassTheirChecks) {
    for (const auto& loc : builtin_locales()) {
        const auto pack = PromptPack::builtin(loc);
        EXPECT_FALSE(pack.check().has_value()) << loc << ": " << pack.check().value_or("");
        EXPECT_FALSE(pack.version.empty());
    }
    EXPECT_EQ(PromptPack::builtin("fr").locale, "en");
    EXPECT_EQ(PromptPack::builtin("ko-KR").locale, "ko");
}

TEST(Prompts, FilesOnDiskMatchTheEmbeddedPack) {
    const auto disk = PromptPack::load(MINDTRAIL_PROMPT_DIR, "ko");
    const auto embedded = PromptPack::builtin("ko");
    EXPECT_EQ(disk.version, embedded.version);
    EXPECT_EQ(disk.templates, embedded.templates);
}

TEST(Prompts, RenderFillsPlaceholders) {
    const auto pack = PromptPack::builtin("en");
    const auto text = pack.render(llm::SchemaId::keywords, {{"count", "3"}, {"avoid", "none"}});
    EXPECT_NE(text.find("Offer 3 keywords"), std::string::npos);
    EXPECT_EQ(text.find("{schema}"), std::string::npos);
    EXPECT_NE(text.find("\"keywords\""), std::string::npos);
}

TEST_F(Fixture, ThemeQuotesAreVerbatimSentences) {
    const auto out = pipes.generate_themes(session, 3);
    ASSERT_FALSE(out.empty());
    for (const auto& t : out) {
        EXPECT_NE(session.narrative.find(t.quote), std::string::npos) << t.quote;
        EXPECT_FALSE(t.expressions.empty());
        EXPECT_EQ(t.origin, Origin::ai);
    }
}

TEST_F(Fixture, SecondThemeCallAvoidsActivatedNames) {
    const auto first = pipes.generate_themes(session, 2);
    for (const auto& t : first) activate_theme(session, t, 1);
    const auto second = pipes.generate_themes(session, 2);
    for (const auto& t : second) EXPECT_FALSE(theme_name_taken(session, t.main_theme)) << t.main_theme;
}

TEST_F(Fixture, ParaphrasedQuotesAreRepairedOrDropped) {
    mock->inject(llm::Fault::paraphrase_quote, 1);
    const auto report = pipes.generate_themes_detailed(session, 3);
    EXPECT_TRUE(report.retried);
    EXPECT_GE(report.provider_attempts, 2);
    for (const auto& t : report.suggestions) EXPECT_TRUE(text::is_grounded(t.quote, session.narrative));
}

TEST_F(Fixture, FabricatedQuotesEverywhereMeanNoSuggestions) {
    mock->inject(llm::Fault::fabricate_quote, 10);
    try {
        pipes.generate_themes(session, 3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NoValidSuggestions);
    }
}

TEST_F(Fixture, QuestionsAreDistinctAndEndWithQuestionMarks) {
    const auto tid = theme();
    const auto qs = pipes.generate_questions(session, tid, 3);
    ASSERT_EQ(qs.size(), 3u);
    std::set<std::string> seen;
    for (const auto& q : qs) {
        seen.insert(text::normalize_ws(q.text));
        EXPECT_EQ(q.text.back(), '?');
        EXPECT_FALSE(q.intention.empty());
    }
    EXPECT_EQ(seen.size(), 3u);
}

TEST_F(Fixture, QuestionsAfterAnEmptyAnswerStillComeBack) {
    const auto tid = theme();
    const auto qid = select_question(session, tid, {"What feels heaviest?", "x"}, 2).id;
    EXPECT_EQ(pipes.generate_questions(session, tid, 3, qid).size(), 3u);
    EXPECT_THROW(pipes.generate_questions(session, "t9", 3), Error);
}

TEST_F(Fixture, MoreKeywordsAreDisjointFromEarlierOnes) {
    const auto tid = theme();
    const auto qid = select_question(session, tid, {"What feels heaviest?", "x"}, 2).id;
    const auto a = pipes.generate_keywords(session, qid, 2);
    ASSERT_FALSE(a.keywords.empty());
    append_keyword_batch(session, qid, a.keywords);
    const auto b = pipes.generate_keywords(session, qid, 3);
    EXPECT_EQ(b.batch_index, 1);
    for (const auto& k : b.keywords) {
        EXPECT_TRUE(keyword_shape_ok(k));
        for (const auto& old : a.keywords) EXPECT_FALSE(text::same_name(k, old));
    }
}

TEST(Pipelines, TinyNarrativeGivesAShortKeywordBatch) {
    auto mock = std::make_shared<llm::MockProvider>(7);
    llm::Gateway gw(llm::ProviderConfig{}, mock);
    Pipelines pipes(gw);
    auto s = create_session("s1", "Tired again.", "en", 0);
    const auto tid = activate_theme(s, {"Tired", {}, "", Origin::user}, 1).id;
    const auto qid = select_question(s, tid, {"Why tired?", "x"}, 2).id;
    const auto batch = pipes.generate_keywords(s, qid, 4);
    EXPECT_LT(batch.keywords.size(), 4u);
}

TEST_F(Fixture, CommentCategoryFollowsTheAnswer) {
    const auto tid = theme();
    const auto qid = select_question(session, tid, {"What feels heaviest?", "x"}, 2).id;
    EXPECT_EQ(pipes.generate_comment(session, qid, Trigger::automatic).category, CommentCategory::tip);
    update_answer(session, qid, "Mornings, mostly, when he refuses breakfast.", 3);
    const auto c = pipes.generate_comment(session, qid, Trigger::user);
    EXPECT_EQ(c.category, CommentCategory::encouragement);
    EXPECT_FALSE(c.rationale.empty());
    EXPECT_EQ(c.trigger, Trigger::user);
}

TEST_F(Fixture, SummaryQuotesAnswersPerTheme) {
    const auto t1 = theme();
    const auto t2 = activate_theme(session, {"Loss of role", {"no longer leading"}, "nobody asks for my opinion",
                                             Origin::ai},
                                   2)
                        .id;
    const auto q1 = select_question(session, t1, {"What feels heaviest?", "x"}, 3).id;
    const auto q2 = select_question(session, t1, {"Who helps?", "x"}, 3).id;
    const auto q3 = select_question(session, t2, {"What did you enjoy about leading?", "x"}, 3).id;
    update_answer(session, q1, "Mornings are hard when he refuses breakfast.", 4);
    update_answer(session, q2, "My daughter helps on Fridays.", 4);
    update_answer(session, q3, "I enjoyed mentoring younger colleagues.", 4);
    const auto sum = pipes.generate_summary(session);
    EXPECT_EQ(sum.state_version, session.state_version);
    EXPECT_EQ(occurrences(sum.text, "\n\n") + 1, 2u);
    EXPECT_TRUE(sum.text.find("Mornings are hard") != std::string::npos ||
                sum.text.find("My daughter helps") != std::string::npos);
    EXPECT_NE(sum.text.find("I enjoyed mentoring"), std::string::npos);
    EXPECT_LE(text::code_point_count(sum.text), summary_limit(session, 600));
}

TEST_F(Fixture, SummaryWithoutThemesRecapsTheNarrative) {
    const auto sum = pipes.generate_summary(session);
    EXPECT_EQ(occurrences(sum.text, "\n\n"), 0u);
    EXPECT_NE(sum.text.find("I retired last year"), std::string::npos);
}

TEST_F(Fixture, OversizeSummaryIsRetriedThenRejected) {
    mock->inject(llm::Fault::oversize_summary, 1);
    EXPECT_NO_THROW(pipes.generate_summary(session));
    mock->inject(llm::Fault::oversize_summary, 2);
    EXPECT_THROW(pipes.generate_summary(session), SchemaViolationError);
}

TEST(Helpers, KeywordShapeAndQuestionMarks) {
    EXPECT_TRUE(keyword_shape_ok("support network"));
    EXPECT_FALSE(keyword_shape_ok("one two three four five six"));
    EXPECT_FALSE(keyword_shape_ok("   "));
    EXPECT_EQ(normalize_question_mark(" 왜 그런가요？ "), "왜 그런가요?");
    EXPECT_EQ(normalize_question_mark("لماذا؟"), "لماذا?");
}
