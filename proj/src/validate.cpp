#include "mindtrail/validate.hpp"

#include <algorithm>
#include <set>

#include "mindtrail/error.hpp"
#include "mindtrail/llm.hpp"
#include "mindtrail/pipelines.hpp"
#include "mindtrail/text.hpp"

namespace mindtrail {

std::string historical_corpus(const Session& session, const std::vector<EventRecord>& events) {
    std::string corpus = session.grounding_corpus();
    for (const auto& e : events) {
        if (e.kind != EventKind::answer_updated) continue;
        auto it = e.payload.find("text");
        if (it == e.payload.end() || it->second.empty()) continue;
        corpus += '\n';
        corpus += it->second;
    }
    return corpus;
}

namespace {

class Checker {
public:
    std::vector<Finding> findings;

    void fail(std::string invariant, std::string locator, std::string message) {
        findings.push_back({std::move(invariant), std::move(locator), std::move(message)});
    }

    // Schema closure: rebuild the pipeline payload and validate it again.
    void schema(llm::SchemaId id, json payload, const std::string& locator) {
        payload["meta"] = {{"rationale", "stored"}};
        const auto round_trip = json::parse(payload.dump());
        if (auto err = llm::validate_payload(id, round_trip)) {
            fail("schema_closure", locator, *err);
        }
    }
};

std::string loc_theme(std::size_t i) { return "themes[" + std::to_string(i) + "]"; }

void check_suggestion(Checker& c, const ThemeSuggestion& s, const std::string& corpus, const std::string& at) {
    if (text::normalize_ws(s.main_theme).empty()) c.fail("theme_name", at, "main_theme is empty");
    if (s.origin == Origin::user) {
        if (!s.expressions.empty() || !s.quote.empty()) {
            c.fail("user_theme_fields", at, "user-origin theme carries expressions or a quote");
        }
        return;
    }
    if (!text::is_grounded(s.quote, corpus)) {
        c.fail("grounding", at + ".quote", "quote is not a substring of the user's writing: \"" + s.quote + "\"");
    }
    if (s.expressions.empty()) c.fail("expressions", at, "AI theme has no alternative expression");
    for (std::size_t i = 0; i < s.expressions.size(); ++i) {
        if (text::same_name(s.expressions[i], s.main_theme)) {
            c.fail("expressions", at + ".expressions[" + std::to_string(i) + "]", "expression equals main_theme");
        }
    }
    c.schema(llm::SchemaId::themes,
             {{"themes", json::array({{{"main_theme", s.main_theme}, {"expressions", s.expressions}, {"quote", s.quote}}})}},
             at);
}

}  // namespace

std::vector<Finding> validate_session(const Session& s, const std::vector<EventRecord>& events,
                                      std::size_t summary_allowance) {
    Checker c;
    if (s.id.empty()) c.fail("session_id", "id", "session id is empty");
    if (s.locale.empty()) c.fail("locale", "locale", "locale is empty");
    if (text::normalize_ws(s.narrative).empty()) c.fail("narrative", "narrative", "narrative is empty");
    if (!text::is_valid_utf8(s.narrative)) c.fail("utf8", "narrative", "narrative is not valid UTF-8");
    if (s.state_version < 1) c.fail("version", "state_version", "state_version must be at least 1");

    const auto corpus = historical_corpus(s, events);
    std::set<std::string> theme_ids, theme_names, question_ids;
    std::int64_t mutations = 1;  // creation
    std::int64_t user_comments = 0;
    std::size_t max_user_chars = text::code_point_count(s.narrative);
    std::map<std::string, std::size_t> longest_answer;

    for (std::size_t ti = 0; ti < s.themes.size(); ++ti) {
        const auto& t = s.themes[ti];
        const auto at = loc_theme(ti);
        ++mutations;
        if (t.id != "t" + std::to_string(ti + 1)) c.fail("theme_id", at + ".id", "unexpected theme id '" + t.id + "'");
        if (!theme_ids.insert(t.id).second) c.fail("theme_id", at + ".id", "duplicate theme id");
        if (!theme_names.insert(text::normalize_ws(t.suggestion.main_theme)).second) {
            c.fail("dedup", at + ".suggestion.main_theme", "theme name duplicates an earlier theme");
        }
        check_suggestion(c, t.suggestion, corpus, at + ".suggestion");

        std::set<std::string> texts;
        for (std::size_t qi = 0; qi < t.questions.size(); ++qi) {
            const auto& q = t.questions[qi];
            const auto qa = at + ".questions[" + std::to_string(qi) + "]";
            ++mutations;
            if (!question_ids.insert(q.id).second) c.fail("question_id", qa + ".id", "duplicate question id");
            if (text::normalize_ws(q.text).empty()) c.fail("question_text", qa + ".text", "question text is empty");
            if (!texts.insert(text::normalize_ws(q.text)).second) {
                c.fail("dedup", qa + ".text", "question repeats an earlier question of the theme");
            }
            c.schema(llm::SchemaId::questions,
                     {{"questions", json::array({{{"question", q.text}, {"intention", q.intention}}})}}, qa);
            if (q.selected_at < t.activated_at) c.fail("ordering", qa + ".selected_at", "selected before theme activation");

            if (q.answer.revision < 0) c.fail("revision", qa + ".answer.revision", "negative revision");
            if (q.answer.revision == 0 && !q.answer.text.empty()) {
                c.fail("revision", qa + ".answer", "answer text present at revision 0");
            }
            mutations += q.answer.revision;
            longest_answer[q.id] = text::code_point_count(q.answer.text);

            std::set<std::string> keywords;
            for (std::size_t bi = 0; bi < q.keyword_batches.size(); ++bi) {
                const auto& b = q.keyword_batches[bi];
                const auto ba = qa + ".keyword_batches[" + std::to_string(bi) + "]";
                ++mutations;
                if (b.batch_index != static_cast<std::int64_t>(bi)) {
                    c.fail("batch_index", ba + ".batch_index", "batch_index differs from position");
                }
                if (b.keywords.empty()) c.fail("keywords", ba, "empty keyword batch");
                for (const auto& k : b.keywords) {
                    if (!pipelines::keyword_shape_ok(k)) c.fail("keyword_shape", ba, "keyword \"" + k + "\" is not 1-5 words");
                    if (!keywords.insert(text::normalize_ws(k)).second) {
                        c.fail("keyword_dedup", ba, "keyword \"" + k + "\" repeats an earlier keyword");
                    }
                }
                c.schema(llm::SchemaId::keywords, {{"keywords", b.keywords}}, ba);
            }
            if (!q.keyword_batches.empty() && !q.keywords_visible) {
                c.fail("keywords_visible", qa + ".keywords_visible", "generated keywords are not marked visible");
            }

            int autos = 0;
            for (std::size_t ci = 0; ci < q.comments.size(); ++ci) {
                const auto& cm = q.comments[ci];
                const auto ca = qa + ".comments[" + std::to_string(ci) + "]";
                ++mutations;
                if (cm.trigger == Trigger::automatic) ++autos;
                if (cm.trigger == Trigger::user) ++user_comments;
                if (ci == 0 && cm.trigger != Trigger::automatic) c.fail("auto_comment", ca, "first comment is not automatic");
                if (ci > 0 && cm.created_at < q.comments[ci - 1].created_at) {
                    c.fail("ordering", ca + ".created_at", "comments not ordered by created_at");
                }
                if (cm.rationale.empty()) c.fail("rationale", ca + ".rationale", "comment has no rationale");
                c.schema(llm::SchemaId::comment, {{"category", to_string(cm.category)}, {"comment", cm.text}}, ca);
            }
            if (!q.comments.empty() && autos != 1) c.fail("auto_comment", qa + ".comments", "expected exactly one automatic comment");
        }
    }

    std::set<std::string> pinned_names;
    for (std::size_t i = 0; i < s.pinned.size(); ++i) {
        const auto at = "pinned[" + std::to_string(i) + "]";
        const auto key = text::normalize_ws(s.pinned[i].main_theme);
        if (theme_names.contains(key) || !pinned_names.insert(key).second) {
            c.fail("dedup", at, "pinned theme duplicates another theme");
        }
        check_suggestion(c, s.pinned[i], corpus, at);
        ++mutations;
    }

    // Upper bound of what the user had written at any point.
    for (const auto& e : events) {
        if (e.kind != EventKind::answer_updated) continue;
        auto q = e.payload.find("question_id");
        auto tx = e.payload.find("text");
        if (q == e.payload.end() || tx == e.payload.end()) continue;
        auto& m = longest_answer[q->second];
        m = std::max(m, text::code_point_count(tx->second));
    }
    for (const auto& [qid, n] : longest_answer) max_user_chars += n;

    for (std::size_t i = 0; i < s.summaries.size(); ++i) {
        const auto& sm = s.summaries[i];
        const auto at = "summaries[" + std::to_string(i) + "]";
        ++mutations;
        if (text::normalize_ws(sm.text).empty()) c.fail("summary_text", at + ".text", "empty summary");
        if (sm.state_version >= s.state_version) c.fail("version", at + ".state_version", "summary newer than session");
        if (i > 0) {
            if (sm.created_at < s.summaries[i - 1].created_at) c.fail("ordering", at + ".created_at", "summaries out of order");
            if (sm.state_version < s.summaries[i - 1].state_version) {
                c.fail("version", at + ".state_version", "summary state_version decreased");
            }
        }
        if (text::code_point_count(sm.text) > max_user_chars + summary_allowance) {
            c.fail("proportionality", at + ".text", "summary longer than the user's writing plus allowance");
        }
        c.schema(llm::SchemaId::summary, {{"summary", sm.text}}, at);
    }

    if (s.survey) {
        auto check = [&](const PathwaysResponse& r, const std::string& at) {
            for (std::size_t i = 0; i < r.size(); ++i) {
                if (r[i] < 1 || r[i] > 8) c.fail("pathways_range", at + "[" + std::to_string(i) + "]", "item outside [1, 8]");
            }
        };
        check(s.survey->pre, "survey.pre");
        if (s.survey->post) check(*s.survey->post, "survey.post");
        ++mutations;
    }
    if (s.state_version < mutations) {
        c.fail("version", "state_version",
               "state_version " + std::to_string(s.state_version) + " is below the " + std::to_string(mutations) +
                   " mutations the document implies");
    }

    if (!events.empty()) {
        const auto& first = events.front();
        auto page = first.payload.find("page");
        if (first.kind != EventKind::page_enter || page == first.payload.end() || page->second != "narrative") {
            c.fail("event_log", "events[0]", "log must start with page_enter(narrative)");
        }
        std::int64_t activated = 0, selected = 0, user_requests = 0, last_summary_version = 0;
        for (std::size_t i = 0; i < events.size(); ++i) {
            const auto& e = events[i];
            const auto at = "events[" + std::to_string(i) + "]";
            if (i > 0 && e.timestamp < events[i - 1].timestamp) c.fail("event_order", at, "timestamp decreased");
            switch (e.kind) {
                case EventKind::theme_activated: ++activated; break;
                case EventKind::question_selected: ++selected; break;
                case EventKind::comment_requested: {
                    auto t = e.payload.find("trigger");
                    if (t != e.payload.end() && t->second == "user") ++user_requests;
                    break;
                }
                case EventKind::summary_requested: {
                    auto v = e.payload.find("state_version");
                    if (v != e.payload.end()) {
                        const auto n = std::stoll(v->second);
                        if (n < last_summary_version) c.fail("version", at, "summary_requested version decreased");
                        last_summary_version = n;
                    }
                    break;
                }
                case EventKind::page_enter:
                case EventKind::page_leave: {
                    auto p = e.payload.find("page");
                    if (p == e.payload.end() || !parse_page(p->second)) c.fail("event_payload", at, "invalid page");
                    break;
                }
                default: break;
            }
        }
        if (activated != static_cast<std::int64_t>(s.themes.size())) {
            c.fail("event_log", "events", "theme_activated events do not match the theme count");
        }
        if (selected != static_cast<std::int64_t>(s.question_total())) {
            c.fail("event_log", "events", "question_selected events do not match the question count");
        }
        if (user_requests != user_comments) {
            c.fail("event_log", "events",
                   "user comment_requested events (" + std::to_string(user_requests) + ") differ from user comments (" +
                       std::to_string(user_comments) + ")");
        }
        if (first.timestamp > s.created_at) c.fail("event_order", "events[0]", "first event after session creation");
    }
    return c.findings;
}

std::vector<Finding> validate_record(const StoreRecord& record) {
    std::vector<Finding> out;
    if (sha256_hex(record.document) != record.checksum) {
        out.push_back({"checksum", "checksum", "checksum does not match the session document"});
    }
    Session s;
    try {
        s = parse_session(record.document);
    } catch (const Error& e) {
        out.push_back({"parse", "session", e.what()});
        return out;
    }
    if (canonical_session(s) != record.document) {
        out.push_back({"canonical", "session", "document is not in canonical form"});
    }
    auto more = validate_session(s, record.events);
    out.insert(out.end(), more.begin(), more.end());
    return out;
}

}  // namespace mindtrail
