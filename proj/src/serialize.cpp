#include "mindtrail/serialize.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>

#include "mindtrail/error.hpp"

namespace mindtrail {

namespace {

template <typename Enum, typename Parser>
Enum enum_field(const json& j, const char* key, Parser parse) {
    const auto name = j.at(key).get<std::string>();
    auto v = parse(name);
    if (!v) throw Error(ErrorCode::ParseError, std::string("invalid value '") + name + "' for " + key);
    return *v;
}

PathwaysResponse response_from(const json& j) {
    if (!j.is_array() || j.size() != 4) throw Error(ErrorCode::ParseError, "pathways response needs 4 items");
    PathwaysResponse r{};
    for (std::size_t i = 0; i < 4; ++i) r[i] = j[i].get<int>();
    return r;
}

}  // namespace

void to_json(json& j, const ThemeSuggestion& v) {
    j = json{{"main_theme", v.main_theme},
             {"expressions", v.expressions},
             {"quote", v.quote},
             {"origin", to_string(v.origin)}};
}

void from_json(const json& j, ThemeSuggestion& v) {
    v.main_theme = j.at("main_theme").get<std::string>();
    v.expressions = j.at("expressions").get<std::vector<std::string>>();
    v.quote = j.at("quote").get<std::string>();
    v.origin = enum_field<Origin>(j, "origin", parse_origin);
}

void to_json(json& j, const AnswerDraft& v) {
    j = json{{"text", v.text}, {"revision", v.revision}, {"updated_at", v.updated_at}};
}

void from_json(const json& j, AnswerDraft& v) {
    v.text = j.at("text").get<std::string>();
    v.revision = j.at("revision").get<std::int64_t>();
    v.updated_at = j.at("updated_at").get<Timestamp>();
}

void to_json(json& j, const KeywordBatch& v) {
    j = json{{"batch_index", v.batch_index}, {"keywords", v.keywords}};
}

void from_json(const json& j, KeywordBatch& v) {
    v.batch_index = j.at("batch_index").get<std::int64_t>();
    v.keywords = j.at("keywords").get<std::vector<std::string>>();
}

void to_json(json& j, const Comment& v) {
    j = json{{"text", v.text},
             {"category", to_string(v.category)},
             {"rationale", v.rationale},
             {"trigger", to_string(v.trigger)},
             {"created_at", v.created_at}};
}

void from_json(const json& j, Comment& v) {
    v.text = j.at("text").get<std::string>();
    v.category = enum_field<CommentCategory>(j, "category", parse_comment_category);
    v.rationale = j.at("rationale").get<std::string>();
    v.trigger = enum_field<Trigger>(j, "trigger", parse_trigger);
    v.created_at = j.at("created_at").get<Timestamp>();
}

void to_json(json& j, const Question& v) {
    j = json{{"id", v.id},
             {"text", v.text},
             {"intention", v.intention},
             {"selected_at", v.selected_at},
             {"answer", v.answer},
             {"keyword_batches", v.keyword_batches},
             {"comments", v.comments},
             {"keywords_visible", v.keywords_visible}};
}

void from_json(const json& j, Question& v) {
    v.id = j.at("id").get<std::string>();
    v.text = j.at("text").get<std::string>();
    v.intention = j.at("intention").get<std::string>();
    v.selected_at = j.at("selected_at").get<Timestamp>();
    v.answer = j.at("answer").get<AnswerDraft>();
    v.keyword_batches = j.at("keyword_batches").get<std::vector<KeywordBatch>>();
    v.comments = j.at("comments").get<std::vector<Comment>>();
    v.keywords_visible = j.at("keywords_visible").get<bool>();
}

void to_json(json& j, const Theme& v) {
    j = json{{"id", v.id},
             {"suggestion", v.suggestion},
             {"status", to_string(v.status)},
             {"questions", v.questions},
             {"activated_at", v.activated_at}};
}

void from_json(const json& j, Theme& v) {
    v.id = j.at("id").get<std::string>();
    v.suggestion = j.at("suggestion").get<ThemeSuggestion>();
    v.status = enum_field<ThemeStatus>(j, "status", parse_theme_status);
    v.questions = j.at("questions").get<std::vector<Question>>();
    v.activated_at = j.at("activated_at").get<Timestamp>();
}

void to_json(json& j, const SummarySnapshot& v) {
    j = json{{"text", v.text}, {"state_version", v.state_version}, {"created_at", v.created_at}};
}

void from_json(const json& j, SummarySnapshot& v) {
    v.text = j.at("text").get<std::string>();
    v.state_version = j.at("state_version").get<std::int64_t>();
    v.created_at = j.at("created_at").get<Timestamp>();
}

void to_json(json& j, const PathwaysPair& v) {
    j = json{{"pre", v.pre}};
    if (v.post) j["post"] = *v.post;
}

void from_json(const json& j, PathwaysPair& v) {
    v.pre = response_from(j.at("pre"));
    v.post.reset();
    if (j.contains("post")) v.post = response_from(j.at("post"));
}

void to_json(json& j, const Session& v) {
    j = json{{"id", v.id},
             {"locale", v.locale},
             {"narrative", v.narrative},
             {"themes", v.themes},
             {"pinned", v.pinned},
             {"summaries", v.summaries},
             {"state_version", v.state_version},
             {"created_at", v.created_at}};
    if (v.survey) j["survey"] = *v.survey;
}

void from_json(const json& j, Session& v) {
    v.id = j.at("id").get<std::string>();
    v.locale = j.at("locale").get<std::string>();
    v.narrative = j.at("narrative").get<std::string>();
    v.themes = j.at("themes").get<std::vector<Theme>>();
    v.pinned = j.at("pinned").get<std::vector<ThemeSuggestion>>();
    v.summaries = j.at("summaries").get<std::vector<SummarySnapshot>>();
    v.state_version = j.at("state_version").get<std::int64_t>();
    v.created_at = j.at("created_at").get<Timestamp>();
    v.survey.reset();
    if (j.contains("survey")) v.survey = j.at("survey").get<PathwaysPair>();
}

void to_json(json& j, const EventRecord& v) {
    j = json{{"timestamp", v.timestamp}, {"kind", to_string(v.kind)}, {"payload", v.payload}};
}

void from_json(const json& j, EventRecord& v) {
    v.timestamp = j.at("timestamp").get<Timestamp>();
    const auto kind = j.at("kind").get<std::string>();
    auto parsed = parse_event_kind(kind);
    if (!parsed) throw Error(ErrorCode::UnknownEventKind, "unknown event kind '" + kind + "'");
    v.kind = *parsed;
    v.payload = j.at("payload").get<std::map<std::string, std::string>>();
}

void to_json(json& j, const QuestionCandidate& v) {
    j = json{{"text", v.text}, {"intention", v.intention}};
}

void from_json(const json& j, QuestionCandidate& v) {
    v.text = j.at("text").get<std::string>();
    v.intention = j.value("intention", std::string{});
}

std::string canonical_dump(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::strict); }

std::string canonical_session(const Session& s) { return canonical_dump(json(s)); }

Session parse_session(std::string_view document) {
    try {
        return json::parse(document).get<Session>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("invalid session document: ") + e.what());
    }
}

std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr);
    std::string out;
    out.reserve(len * 2);
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        out += buf;
    }
    return out;
}

json export_json(const StoreRecord& record) {
    return json{{"session", json::parse(record.document)},
                {"events", record.events},
                {"checksum", record.checksum}};
}

StoreRecord parse_export(std::string_view text) {
    try {
        const auto j = json::parse(text);
        StoreRecord r;
        r.document = canonical_dump(j.at("session"));
        r.events = j.at("events").get<std::vector<EventRecord>>();
        r.checksum = j.at("checksum").get<std::string>();
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("invalid export document: ") + e.what());
    }
}

}  // namespace mindtrail
