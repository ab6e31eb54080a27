#include "mindtrail/pipelines.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>
#include <sstream>

#include "mindtrail/error.hpp"
#include "mindtrail/text.hpp"
#include "mindtrail/xml.hpp"

namespace mindtrail::pipelines {

namespace detail {
// Generated from prompts/ at build time.
const std::map<std::string, std::string>& embedded_prompts();
}  // namespace detail

using llm::SchemaId;

namespace {

constexpr std::array kSchemas{SchemaId::themes, SchemaId::questions, SchemaId::keywords, SchemaId::comment,
                              SchemaId::summary};

std::vector<std::string_view> mandatory_tags(SchemaId schema) {
    switch (schema) {
        case SchemaId::themes: return {"<initial_information/>", "<previous_session_log>"};
        case SchemaId::questions: return {"<initial_information/>", "<previous_session_log>", "<theme_of_session/>"};
        case SchemaId::keywords: return {"<initial_information/>", "<previous_session_log>", "<question/>"};
        case SchemaId::comment:
            return {"<initial_information/>", "<previous_session_log>", "<question/>", "<current_response>"};
        case SchemaId::summary: return {"<initial_information/>", "<previous_session_log>"};
    }
    return {};
}

std::string join_quoted(const std::vector<std::string>& items) {
    if (items.empty()) return "(none)";
    std::string out;
    for (const auto& i : items) {
        if (!out.empty()) out += ", ";
        out += "\"" + i + "\"";
    }
    return out;
}

const Question& require_question(const Session& session, std::string_view question_id) {
    const auto* q = session.find_question(question_id);
    if (q == nullptr) throw Error(ErrorCode::UnknownQuestion, "unknown question '" + std::string(question_id) + "'");
    return *q;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot read prompt file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

void StateScope::validate() const {
    if (question && !theme_of_session) {
        throw Error(ErrorCode::InvalidRequest, "a question scope requires theme_of_session");
    }
    if (include_current_response && !question) {
        throw Error(ErrorCode::InvalidRequest, "include_current_response requires a question");
    }
}

std::string serialize_state_xml(const Session& session, const StateScope& scope) {
    scope.validate();
    const Theme* theme = nullptr;
    const Question* question = nullptr;
    if (scope.theme_of_session) {
        theme = session.find_theme(*scope.theme_of_session);
        if (theme == nullptr) throw Error(ErrorCode::UnknownTheme, "unknown theme '" + *scope.theme_of_session + "'");
    }
    if (scope.question) {
        question = session.find_question(*scope.question);
        if (question == nullptr) {
            throw Error(ErrorCode::UnknownQuestion, "unknown question '" + *scope.question + "'");
        }
    }

    std::string out;
    out += "<state locale=\"" + xml::escape(session.locale) + "\">\n";
    out += "<initial_information><narrative>" + xml::escape(session.narrative) +
           "</narrative><background></background></initial_information>\n";
    if (scope.include_previous_log) {
        out += "<previous_session_log>";
        for (const auto& t : session.themes) {
            out += "<theme id=\"" + xml::escape(t.id) + "\" status=\"" + std::string(to_string(t.status)) + "\"><name>" +
                   xml::escape(t.suggestion.main_theme) + "</name>";
            for (const auto& q : t.questions) {
                out += "<qa><question>" + xml::escape(q.text) + "</question><answer>" + xml::escape(q.answer.text) +
                       "</answer></qa>";
            }
            out += "</theme>";
        }
        out += "</previous_session_log>\n";
    }
    if (theme != nullptr) out += "<theme_of_session>" + xml::escape(theme->suggestion.main_theme) + "</theme_of_session>\n";
    if (question != nullptr) {
        out += "<question>" + xml::escape(question->text) + "</question>\n";
        if (scope.include_current_response) {
            out += "<current_response revision=\"" + std::to_string(question->answer.revision) + "\">" +
                   xml::escape(question->answer.text) + "</current_response>\n";
        }
    }
    out += "</state>\n";
    return out;
}

PromptPack PromptPack::builtin(std::string_view locale) {
    const auto& files = detail::embedded_prompts();
    std::string loc(locale.substr(0, 2));
    if (!files.contains("persona." + loc)) loc = "en";
    PromptPack pack;
    pack.locale = loc;
    pack.version = text::trim(files.at("VERSION"));
    pack.persona_preamble = text::trim(files.at("persona." + loc));
    for (auto s : kSchemas) pack.templates[s] = files.at(std::string(llm::to_string(s)) + "." + loc);
    return pack;
}

PromptPack PromptPack::load(const std::string& directory, std::string_view locale) {
    PromptPack pack;
    pack.locale = std::string(locale);
    pack.version = text::trim(read_file(directory + "/VERSION"));
    pack.persona_preamble = text::trim(read_file(directory + "/persona." + pack.locale + ".txt"));
    for (auto s : kSchemas) {
        pack.templates[s] = read_file(directory + "/" + std::string(llm::to_string(s)) + "." + pack.locale + ".txt");
    }
    if (auto problem = pack.check()) throw Error(ErrorCode::ConfigError, "prompt pack: " + *problem);
    return pack;
}

std::vector<std::string> builtin_locales() {
    std::vector<std::string> out;
    for (const auto& [name, body] : detail::embedded_prompts()) {
        if (name.rfind("persona.", 0) == 0) out.push_back(name.substr(8));
    }
    return out;
}

std::string PromptPack::render(SchemaId schema, const std::map<std::string, std::string>& vars) const {
    std::string out = templates.at(schema);
    auto replace_all = [&out](const std::string& key, const std::string& value) {
        const std::string token = "{" + key + "}";
        for (auto at = out.find(token); at != std::string::npos; at = out.find(token, at + value.size())) {
            out.replace(at, token.size(), value);
        }
    };
    for (const auto& [k, v] : vars) replace_all(k, v);
    replace_all("schema", llm::schema_description(schema));
    return out;
}

std::optional<std::string> PromptPack::check() const {
    if (persona_preamble.find("therapeutic assistant") == std::string::npos) {
        return "persona must contain \"therapeutic assistant\"";
    }
    for (auto s : kSchemas) {
        auto it = templates.find(s);
        if (it == templates.end()) return "missing template for " + std::string(llm::to_string(s));
        for (auto tag : mandatory_tags(s)) {
            if (it->second.find(tag) == std::string::npos) {
                return std::string(llm::to_string(s)) + " template lacks " + std::string(tag);
            }
        }
    }
    const auto& summary = templates.at(SchemaId::summary);
    for (auto phrase : {"own language and expressions", "proportional to the content"}) {
        if (summary.find(phrase) == std::string::npos) return std::string("summary template lacks \"") + phrase + "\"";
    }
    return std::nullopt;
}

std::size_t user_written_chars(const Session& session) {
    std::size_t n = text::code_point_count(session.narrative);
    for (const auto& t : session.themes) {
        for (const auto& q : t.questions) n += text::code_point_count(q.answer.text);
    }
    return n;
}

std::size_t summary_limit(const Session& session, std::size_t allowance) {
    return user_written_chars(session) + allowance;
}

bool keyword_shape_ok(std::string_view keyword) {
    const auto n = text::words(keyword).size();
    return n >= 1 && n <= 5;
}

std::string normalize_question_mark(std::string_view question) {
    auto cps = text::decode_utf8(text::trim(question));
    for (auto& c : cps) {
        if (c == 0xFF1F || c == 0x061F || c == 0x2E2E) c = U'?';
    }
    return text::encode_utf8(cps);
}

Pipelines::Pipelines(const llm::Gateway& gateway, Options options) : gateway_(gateway), options_(options) {}

llm::CompletionRequest Pipelines::request_for(const Session& session, SchemaId schema, const StateScope& scope,
                                              std::map<std::string, std::string> vars, int expected_count) const {
    const auto pack = PromptPack::builtin(session.locale);
    llm::CompletionRequest req;
    req.persona_preamble = pack.persona_preamble;
    req.instruction = pack.render(schema, vars);
    req.state_xml = serialize_state_xml(session, scope);
    req.output_schema = schema;
    req.locale = session.locale;
    req.temperature = gateway_.config().temperature;
    req.expected_count = expected_count;
    return req;
}

ThemeReport Pipelines::generate_themes_detailed(const Session& session, int n, std::stop_token stop) const {
    if (n < 1) throw Error(ErrorCode::InvalidRequest, "n must be >= 1");
    std::vector<std::string> taken;
    for (const auto& t : session.themes) taken.push_back(t.suggestion.main_theme);
    for (const auto& p : session.pinned) taken.push_back(p.main_theme);

    StateScope scope;
    auto req = request_for(session, SchemaId::themes, scope,
                           {{"count", std::to_string(n)}, {"avoid", join_quoted(taken)}},
                           n + static_cast<int>(session.pinned.size()));
    const auto corpus = session.grounding_corpus();

    ThemeReport report;
    std::string note;
    for (int round = 0; round < 2; ++round) {
        const auto out = gateway_.complete_structured(req, stop, note);
        report.provider_attempts += out.attempts;
        report.suggestions.clear();
        report.dropped_ungrounded = report.dropped_duplicate = report.dropped_no_expression = 0;
        std::vector<std::string> near_misses;
        std::set<std::string> names;
        for (const auto& t : out.payload.at("themes")) {
            ThemeSuggestion s;
            s.origin = Origin::ai;
            s.main_theme = text::trim(t.at("main_theme").get<std::string>());
            s.quote = t.at("quote").get<std::string>();
            const auto key = text::normalize_ws(s.main_theme);
            if (!text::is_grounded(s.quote, corpus)) {
                if (!text::normalize_ws(s.quote).empty() &&
                    text::approximate_match_distance(s.quote, corpus) <= options_.near_miss_distance) {
                    near_misses.push_back(s.quote);
                }
                ++report.dropped_ungrounded;
                continue;
            }
            if (key.empty() || theme_name_taken(session, s.main_theme) || !names.insert(key).second) {
                ++report.dropped_duplicate;
                continue;
            }
            std::set<std::string> seen_expr;
            for (const auto& x : t.at("expressions")) {
                auto e = text::trim(x.get<std::string>());
                const auto ekey = text::normalize_ws(e);
                if (ekey.empty() || ekey == key || !seen_expr.insert(ekey).second) continue;
                s.expressions.push_back(std::move(e));
            }
            if (s.expressions.empty()) {
                ++report.dropped_no_expression;
                continue;
            }
            report.suggestions.push_back(std::move(s));
        }
        if (near_misses.empty() || round == 1) break;
        // One corrective round for quotes that were almost verbatim.
        report.retried = true;
        note = "These quotes were not copied exactly from the user's writing: " + join_quoted(near_misses) +
               ". Every quote must be an exact, character-for-character excerpt.";
    }
    if (report.suggestions.size() > static_cast<std::size_t>(n)) report.suggestions.resize(n);
    if (report.suggestions.empty()) {
        throw Error(ErrorCode::NoValidSuggestions, "no theme suggestion passed grounding and duplicate checks");
    }
    return report;
}

std::vector<ThemeSuggestion> Pipelines::generate_themes(const Session& session, int n, std::stop_token stop) const {
    return generate_themes_detailed(session, n, stop).suggestions;
}

std::vector<QuestionCandidate> Pipelines::generate_questions(const Session& session, std::string_view theme_id,
                                                             int n, const std::optional<std::string>& after_question,
                                                             std::stop_token stop) const {
    if (n < 1) throw Error(ErrorCode::InvalidRequest, "n must be >= 1");
    const auto* theme = session.find_theme(theme_id);
    if (theme == nullptr || theme->status != ThemeStatus::active) {
        throw Error(ErrorCode::UnknownTheme, "no active theme '" + std::string(theme_id) + "'");
    }
    StateScope scope;
    scope.theme_of_session = std::string(theme_id);
    if (after_question) {
        const auto* owner = session.theme_of_question(*after_question);
        if (owner == nullptr || owner->id != theme_id) {
            throw Error(ErrorCode::UnknownQuestion,
                        "question '" + *after_question + "' does not belong to theme '" + std::string(theme_id) + "'");
        }
        scope.question = *after_question;
        scope.include_current_response = true;
    }
    std::vector<std::string> asked;
    std::set<std::string> asked_keys;
    for (const auto& q : theme->questions) {
        asked.push_back(q.text);
        asked_keys.insert(text::normalize_ws(q.text));
    }
    auto req = request_for(session, SchemaId::questions, scope,
                           {{"count", std::to_string(n)}, {"avoid", join_quoted(asked)}}, n);

    std::vector<QuestionCandidate> out;
    std::set<std::string> keys;
    std::string note;
    std::string last_problem;
    const int rounds = gateway_.config().max_retries + 1;
    for (int round = 0; round < rounds && out.size() < static_cast<std::size_t>(n); ++round) {
        const auto reply = gateway_.complete_structured(req, stop, note);
        std::vector<std::string> problems;
        for (const auto& q : reply.payload.at("questions")) {
            QuestionCandidate c;
            c.text = normalize_question_mark(q.at("question").get<std::string>());
            c.intention = text::trim(q.at("intention").get<std::string>());
            const auto key = text::normalize_ws(c.text);
            if (c.text.empty() || c.text.back() != '?') {
                problems.push_back("\"" + c.text + "\" does not end with a question mark");
                continue;
            }
            if (c.intention.empty()) {
                problems.push_back("\"" + c.text + "\" has no intention");
                continue;
            }
            if (asked_keys.contains(key) || keys.contains(key)) {
                problems.push_back("\"" + c.text + "\" repeats an earlier question");
                continue;
            }
            if (out.size() < static_cast<std::size_t>(n)) {
                keys.insert(key);
                out.push_back(std::move(c));
            }
        }
        if (!problems.empty()) last_problem = problems.front();
        note = "Provide " + std::to_string(n) + " distinct questions. Problems with the previous reply: " +
               (problems.empty() ? std::string("too few questions") : join_quoted(problems)) + ".";
    }
    if (out.size() < static_cast<std::size_t>(n)) {
        throw SchemaViolationError("only " + std::to_string(out.size()) + " of " + std::to_string(n) +
                                       " valid questions" + (last_problem.empty() ? "" : ": " + last_problem),
                                   "");
    }
    return out;
}

KeywordBatch Pipelines::generate_keywords(const Session& session, std::string_view question_id, int count,
                                          std::stop_token stop) const {
    if (count < 1) throw Error(ErrorCode::InvalidRequest, "count must be >= 1");
    const auto& question = require_question(session, question_id);
    const auto* theme = session.theme_of_question(question_id);
    std::vector<std::string> earlier;
    std::set<std::string> earlier_keys;
    for (const auto& b : question.keyword_batches) {
        for (const auto& k : b.keywords) {
            earlier.push_back(k);
            earlier_keys.insert(text::normalize_ws(k));
        }
    }
    StateScope scope;
    scope.theme_of_session = theme->id;
    scope.question = std::string(question_id);
    scope.include_current_response = true;
    auto req = request_for(session, SchemaId::keywords, scope,
                           {{"count", std::to_string(count)}, {"avoid", join_quoted(earlier)}},
                           count + static_cast<int>(earlier.size()));
    const auto question_key = text::normalize_ws(question.text);

    KeywordBatch batch;
    batch.batch_index = static_cast<std::int64_t>(question.keyword_batches.size());
    std::set<std::string> keys;
    std::string note;
    const int rounds = gateway_.config().max_retries + 1;
    for (int round = 0; round < rounds && batch.keywords.empty(); ++round) {
        const auto reply = gateway_.complete_structured(req, stop, note);
        for (const auto& k : reply.payload.at("keywords")) {
            auto kw = text::trim(k.get<std::string>());
            const auto key = text::normalize_ws(kw);
            if (!keyword_shape_ok(kw) || key == question_key) continue;
            if (earlier_keys.contains(key) || !keys.insert(key).second) continue;
            if (batch.keywords.size() < static_cast<std::size_t>(count)) batch.keywords.push_back(std::move(kw));
        }
        note = "Every keyword you offered was already shown, too long, or a copy of the question. Offer new ones.";
    }
    if (batch.keywords.empty()) {
        throw SchemaViolationError("no new keyword could be produced for question '" + std::string(question_id) + "'",
                                   "");
    }
    return batch;
}

Comment Pipelines::generate_comment(const Session& session, std::string_view question_id, Trigger trigger,
                                    std::stop_token stop) const {
    require_question(session, question_id);
    const auto* theme = session.theme_of_question(question_id);
    StateScope scope;
    scope.theme_of_session = theme->id;
    scope.question = std::string(question_id);
    scope.include_current_response = true;
    auto req = request_for(session, SchemaId::comment, scope, {}, 1);
    const auto reply = gateway_.complete_structured(req, stop);
    Comment c;
    c.text = text::trim(reply.payload.at("comment").get<std::string>());
    c.category = *parse_comment_category(reply.payload.at("category").get<std::string>());
    c.rationale = reply.meta.rationale;
    c.trigger = trigger;
    return c;
}

SummarySnapshot Pipelines::generate_summary(const Session& session, std::stop_token stop) const {
    const auto limit = summary_limit(session, options_.summary_allowance);
    StateScope scope;
    auto req = request_for(session, SchemaId::summary, scope, {{"limit", std::to_string(limit)}}, 0);
    std::string note;
    std::size_t length = 0;
    for (int round = 0; round < 2; ++round) {
        const auto reply = gateway_.complete_structured(req, stop, note);
        auto summary = text::trim(reply.payload.at("summary").get<std::string>());
        length = text::code_point_count(summary);
        if (!summary.empty() && length <= limit) {
            SummarySnapshot snap;
            snap.text = std::move(summary);
            snap.state_version = session.state_version;
            return snap;
        }
        note = "The summary was " + std::to_string(length) + " characters; write a shorter one under " +
               std::to_string(limit) + " characters.";
    }
    throw SchemaViolationError("summary exceeds the proportionality limit (" + std::to_string(length) + " > " +
                                   std::to_string(limit) + ")",
                               "");
}

}  // namespace mindtrail::pipelines
