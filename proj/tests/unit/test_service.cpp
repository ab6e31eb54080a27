#include <gtest/gtest.h>

#include "mindtrail/error.hpp"
#include "mindtrail/validate.hpp"
#include "support.hpp"

using namespace mindtrail;
using testkit::Harness;

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

std::size_t count_kind(const std::vector<EventRecord>& ev, EventKind k) {
    return static_cast<std::size_t>(std::count_if(ev.begin(), ev.end(), [k](const auto& e) { return e.kind == k; }));
}

}  // namespace

TEST(Service, ScriptedScenarioPassesEveryInvariant) {
    Harness h;
    auto& svc = *h.service;
    const auto id = svc.create_session(testkit::kJaneNarrative, "en").id;
    svc.submit_survey(id, "pre", {3, 2, 3, 2});
    const auto sug = svc.suggest_themes(id, 2);
    ASSERT_EQ(sug.size(), 2u);
    h.clock->advance(1000);
    const auto tid = svc.activate_theme(id, sug[0]).id;
    const auto cands = svc.suggest_questions(id, tid, 3, std::nullopt);
    const auto qid = svc.select_question(id, tid, cands[0]).id;
    svc.wait_idle();
    svc.request_keywords(id, qid, KeywordMode::initial);
    svc.update_answer(id, qid, "Mornings are hard. My daughter helps on Fridays.");
    svc.request_comment(id, qid);
    svc.request_summary(id);
    EXPECT_EQ(svc.submit_survey(id, "post", {5, 6, 5, 6}), 22);
    svc.wait_idle();

    const auto record = svc.export_record(id);
    const auto findings = validate_record(record);
    for (const auto& f : findings) ADD_FAILURE() << f.invariant << " " << f.locator << " " << f.message;
    const auto s = parse_session(record.document);
    ASSERT_EQ(s.find_question(qid)->comments.size(), 2u);
    EXPECT_EQ(s.find_question(qid)->comments[0].trigger, Trigger::automatic);
    EXPECT_EQ(count_kind(record.events, EventKind::theme_activated), 1u);
    EXPECT_EQ(count_kind(record.events, EventKind::theme_suggested), 2u);
    EXPECT_EQ(svc.usage(id).user_comment_request_count, 1);
}

TEST(Service, StaleGenerationIsRejectedAndNotApplied) {
    Harness h;
    auto& svc = *h.service;
    const auto id = svc.create_session(testkit::kJaneNarrative, "en").id;
    const auto tid = svc.activate_theme(id, {"Mine", {}, "", Origin::user}).id;
    const auto qid = svc.select_question(id, tid, {"What is hard?", "x"}).id;
    svc.wait_idle();
    bool once = true;
    svc.set_before_apply([&](const std::string& sid) {
        if (std::exchange(once, false)) svc.update_answer(sid, qid, "changed meanwhile");
    });
    const auto before = svc.get_session(id).state_version;
    EXPECT_EQ(code_of([&] { svc.request_keywords(id, qid, KeywordMode::initial); }), ErrorCode::StaleVersion);
    EXPECT_EQ(http_status_for(ErrorCode::StaleVersion), 409);
    const auto after = svc.get_session(id);
    EXPECT_EQ(after.state_version, before + 1);  // only the interleaved write landed
    EXPECT_TRUE(after.find_question(qid)->keyword_batches.empty());
    EXPECT_TRUE(validate_record(svc.export_record(id)).empty());
}

TEST(Service, AutomaticCommentArrivesAfterSelection) {
    Harness h;
    auto& svc = *h.service;
    const auto id = svc.create_session(testkit::kJaneNarrative, "en").id;
    const auto tid = svc.activate_theme(id, {"Mine", {}, "", Origin::user}).id;
    const auto qid = svc.select_question(id, tid, {"What is hard?", "x"}).id;
    svc.wait_idle();
    const auto q = svc.get_question(id, qid);
    ASSERT_EQ(q.comments.size(), 1u);
    EXPECT_EQ(q.comments[0].trigger, Trigger::automatic);
    EXPECT_EQ(q.comments[0].category, CommentCategory::tip);
}

TEST(Service, FailedAutomaticCommentFallsBackToATip) {
    Harness h;
    auto& svc = *h.service;
    const auto id = svc.create_session(testkit::kJaneNarrative, "ko").id;
    const auto tid = svc.activate_theme(id, {"Mine", {}, "", Origin::user}).id;
    h.mock->inject(llm::Fault::timeout, 1);
    const auto qid = svc.select_question(id, tid, {"무엇이 힘든가요?", "x"}).id;
    svc.wait_idle();
    const auto q = svc.get_question(id, qid);
    ASSERT_EQ(q.comments.size(), 1u);
    EXPECT_EQ(q.comments[0].category, CommentCategory::tip);
    EXPECT_NE(q.comments[0].rationale.find("ProviderTimeout"), std::string::npos);
    EXPECT_TRUE(validate_record(svc.export_record(id)).empty());
}

TEST(Service, QuestionMarksAreNormalized) {
    Harness h;
    auto& svc = *h.service;
    const auto id = svc.create_session("x", "ko").id;
    const auto tid = svc.activate_theme(id, {"Mine", {}, "", Origin::user}).id;
    EXPECT_EQ(svc.select_question(id, tid, {"왜 그런가요？", "x"}).text, "왜 그런가요?");
}

TEST(Service, TamperedAiSuggestionIsRefused) {
    Harness h;
    auto& svc = *h.service;
    const auto id = svc.create_session(testkit::kJaneNarrative, "en").id;
    auto sug = svc.suggest_themes(id, 1).at(0);
    sug.quote = "words the user never wrote";
    EXPECT_EQ(code_of([&] { svc.activate_theme(id, sug); }), ErrorCode::InvalidRequest);
}

TEST(Service, RequestValidation) {
    Harness h;
    auto& svc = *h.service;
    EXPECT_EQ(code_of([&] { svc.create_session("  ", "ko"); }), ErrorCode::EmptyNarrative);
    EXPECT_EQ(code_of([&] { svc.get_session("missing"); }), ErrorCode::UnknownSession);
    const auto id = svc.create_session("x", "").id;
    EXPECT_EQ(svc.get_session(id).locale, "ko");
    EXPECT_EQ(code_of([&] { svc.suggest_themes(id, 0); }), ErrorCode::InvalidRequest);
    EXPECT_EQ(code_of([&] { svc.record_event(id, "page_teleport", {}); }), ErrorCode::UnknownEventKind);
    EXPECT_EQ(code_of([&] { svc.record_event(id, "theme_activated", {}); }), ErrorCode::InvalidRequest);
    EXPECT_EQ(code_of([&] { svc.record_event(id, "page_enter", {{"page", "lobby"}}); }), ErrorCode::InvalidRequest);
    EXPECT_EQ(code_of([&] { svc.submit_survey(id, "pre", {9, 1, 1, 1}); }), ErrorCode::OutOfRangeItem);
    EXPECT_EQ(code_of([&] { svc.submit_survey(id, "mid", {1, 1, 1, 1}); }), ErrorCode::InvalidRequest);
    EXPECT_EQ(code_of([&] { svc.latest_summary(id); }), ErrorCode::NotFound);
    EXPECT_EQ(code_of([&] { svc.update_answer(id, "q1", "x"); }), ErrorCode::UnknownQuestion);
}

TEST(Service, SessionsSurviveARestart) {
    testkit::TempDir dir("svc");
    std::string id, qid;
    {
        Harness h(std::make_shared<FileStore>(dir.path));
        id = h.service->create_session(testkit::kJaneNarrative, "en").id;
        const auto tid = h.service->activate_theme(id, {"Mine", {}, "", Origin::user}).id;
        qid = h.service->select_question(id, tid, {"What is hard?", "x"}).id;
        h.service->wait_idle();
        h.service->update_answer(id, qid, "Everything, some days.");
    }
    Harness h(std::make_shared<FileStore>(dir.path));
    EXPECT_EQ(h.service->get_question(id, qid).answer.text, "Everything, some days.");
    EXPECT_EQ(h.service->list_sessions(), std::vector<std::string>{id});
}
