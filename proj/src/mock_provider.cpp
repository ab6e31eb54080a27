#include "mindtrail/mock_provider.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "mindtrail/error.hpp"
#include "mindtrail/text.hpp"
#include "mindtrail/xml.hpp"

namespace mindtrail::llm {

namespace {

struct LoggedQa {
    std::string question;
    std::string answer;
};

struct LoggedTheme {
    std::string name;
    std::vector<LoggedQa> qas;
};

struct StateView {
    std::string locale{"en"};
    std::string narrative;
    std::vector<LoggedTheme> log;
    std::string theme;
    std::string question;
    std::string response;
    long long revision{0};
};

StateView read_state(std::string_view state_xml) {
    const auto root = xml::parse(state_xml);
    if (root.name != "state") throw Error(ErrorCode::MalformedStateXml, "root element must be <state>");
    StateView v;
    v.locale = root.attribute("locale", "en");
    if (const auto* info = root.child("initial_information")) {
        if (const auto* n = info->child("narrative")) v.narrative = n->text;
    }
    if (const auto* log = root.child("previous_session_log")) {
        for (const auto* t : log->children_named("theme")) {
            LoggedTheme lt;
            if (const auto* n = t->child("name")) lt.name = n->text;
            for (const auto* qa : t->children_named("qa")) {
                LoggedQa q;
                if (const auto* x = qa->child("question")) q.question = x->text;
                if (const auto* x = qa->child("answer")) q.answer = x->text;
                lt.qas.push_back(std::move(q));
            }
            v.log.push_back(std::move(lt));
        }
    }
    if (const auto* t = root.child("theme_of_session")) v.theme = t->text;
    if (const auto* q = root.child("question")) v.question = q->text;
    if (const auto* r = root.child("current_response")) {
        v.response = r->text;
        try {
            v.revision = std::stoll(r->attribute("revision", "0"));
        } catch (const std::exception&) {
            throw Error(ErrorCode::MalformedStateXml, "current_response revision must be an integer");
        }
    }
    return v;
}

bool korean(const StateView& v) { return v.locale.rfind("ko", 0) == 0; }

std::string fill(std::string_view tmpl, std::string_view x) {
    std::string out(tmpl);
    const auto at = out.find("{x}");
    if (at == std::string::npos) return out;
    std::string inner(x);
    // Mid-sentence English names read better without the leading capital.
    if (at > 0 && inner.size() > 1 && inner[0] >= 'A' && inner[0] <= 'Z' && inner[1] >= 'a' && inner[1] <= 'z') {
        inner[0] = static_cast<char>(inner[0] - 'A' + 'a');
    }
    out.replace(at, 3, inner);
    return out;
}

std::string fence(const json& payload) { return "```json\n" + payload.dump(2) + "\n```"; }

// First three content-bearing tokens, original spelling, first letter capitalised.
std::string theme_name_for(std::string_view sentence) {
    std::vector<std::string> picked;
    for (const auto& w : text::words(sentence)) {
        const auto cw = text::content_words(w);
        if (cw.empty()) continue;
        picked.push_back(w);
        if (picked.size() == 3) break;
    }
    std::string name;
    for (const auto& p : picked) {
        if (!name.empty()) name += ' ';
        name += p;
    }
    if (!name.empty() && name[0] >= 'a' && name[0] <= 'z') name[0] = static_cast<char>(name[0] - 32);
    return name;
}

std::vector<std::string> ranked_words(const std::vector<std::string>& sources) {
    std::map<std::string, std::pair<int, std::size_t>> table;  // word -> (count, first position)
    std::size_t pos = 0;
    for (const auto& s : sources) {
        for (const auto& w : text::content_words(s)) {
            auto [it, fresh] = table.try_emplace(w, 0, pos);
            ++it->second.first;
            ++pos;
        }
    }
    std::vector<std::pair<std::string, std::pair<int, std::size_t>>> rows(table.begin(), table.end());
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        if (a.second.first != b.second.first) return a.second.first > b.second.first;
        return a.second.second < b.second.second;
    });
    std::vector<std::string> out;
    out.reserve(rows.size());
    for (auto& r : rows) out.push_back(r.first);
    return out;
}

json generate_themes(const StateView& v, std::uint64_t seed, int count) {
    static const std::vector<std::string> kEn = {"Living with {x}", "The weight of {x}",
                                                 "Making sense of {x}", "Where {x} leads"};
    static const std::vector<std::string> kKo = {"{x}에 대한 생각", "{x}의 무게", "{x} 돌아보기",
                                                 "{x} 속의 나"};
    const auto& templates = korean(v) ? kKo : kEn;

    struct Candidate {
        std::string name;
        std::string quote;
        std::size_t length;
        std::size_t order;
    };
    std::vector<std::string> sources{v.narrative};
    for (const auto& t : v.log) {
        for (const auto& qa : t.qas) sources.push_back(qa.answer);
    }
    std::vector<Candidate> candidates;
    std::set<std::string> seen;
    for (const auto& t : v.log) seen.insert(text::normalize_ws(t.name));
    std::size_t order = 0;
    for (const auto& src : sources) {
        for (const auto& sentence : text::split_sentences(src)) {
            auto name = theme_name_for(sentence.text);
            if (name.empty()) continue;
            if (!seen.insert(text::normalize_ws(name)).second) continue;
            candidates.push_back({std::move(name), sentence.text, text::code_point_count(sentence.text), order++});
        }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.length > b.length; });
    if (candidates.size() > static_cast<std::size_t>(count)) candidates.resize(count);

    json themes = json::array();
    for (const auto& c : candidates) {
        json expressions = json::array();
        for (std::size_t k = 0; k < 2; ++k) {
            const auto& tmpl = templates[(seed + k) % templates.size()];
            std::string lowered = c.name;
            if (!korean(v) && !lowered.empty() && lowered[0] >= 'A' && lowered[0] <= 'Z') {
                lowered[0] = static_cast<char>(lowered[0] + 32);
            }
            expressions.push_back(fill(tmpl, lowered));
        }
        themes.push_back({{"main_theme", c.name}, {"expressions", expressions}, {"quote", c.quote}});
    }
    const std::string rationale =
        candidates.empty() ? "Every sentence in the log already maps to an explored theme."
                           : "Each theme is named after one of the longest passages the user wrote, "
                             "and the quote points back to that passage.";
    return {{"meta", {{"rationale", rationale}}}, {"themes", themes}};
}

json generate_questions(const StateView& v, std::uint64_t seed, int count) {
    static const std::vector<std::pair<std::string, std::string>> kEn = {
        {"What makes {x} feel most pressing?", "Locates what gives this part of the story its urgency."},
        {"When did {x} begin?", "Anchors the experience in time so its origins can be examined."},
        {"What would change if {x} eased?", "Invites imagining an alternative to open room for change."},
    };
    static const std::vector<std::pair<std::string, std::string>> kKo = {
        {"‘{x}’에서 가장 절실하게 느껴지는 것은 무엇인가요?", "이 주제가 왜 지금 중요한지 살펴보도록 돕습니다."},
        {"‘{x}’은(는) 언제부터 시작되었나요?", "경험의 시작점을 떠올리며 그 뿌리를 살펴보게 합니다."},
        {"‘{x}’이(가) 조금 가벼워진다면 무엇이 달라질까요?", "변화의 가능성을 상상해 보도록 이끕니다."},
    };
    const auto& templates = korean(v) ? kKo : kEn;

    std::vector<std::string> selected;
    std::vector<std::string> theme_answers;
    for (const auto& t : v.log) {
        if (!text::same_name(t.name, v.theme)) continue;
        for (const auto& qa : t.qas) {
            selected.push_back(text::normalize_ws(qa.question));
            theme_answers.push_back(qa.answer);
        }
    }
    std::vector<std::string> focus;
    if (!text::normalize_ws(v.response).empty()) {
        for (auto& w : ranked_words({v.response})) focus.push_back(std::move(w));
    }
    focus.push_back(v.theme);
    for (auto& w : ranked_words(theme_answers)) focus.push_back(std::move(w));
    for (auto& w : ranked_words({v.narrative})) focus.push_back(std::move(w));

    json questions = json::array();
    std::set<std::string> emitted;
    for (const auto& f : focus) {
        for (std::size_t k = 0; k < templates.size(); ++k) {
            if (questions.size() >= static_cast<std::size_t>(count)) break;
            const auto& [tmpl, intention] = templates[(seed + k) % templates.size()];
            auto q = fill(tmpl, f);
            const auto key = text::normalize_ws(q);
            if (std::find(selected.begin(), selected.end(), key) != selected.end()) continue;
            if (!emitted.insert(key).second) continue;
            questions.push_back({{"question", q}, {"intention", intention}});
        }
    }
    return {{"meta", {{"rationale", "Questions start from the theme and follow the words the user leaned on."}}},
            {"questions", questions}};
}

json generate_keywords(const StateView& v, int count) {
    std::vector<std::string> sources{v.narrative};
    for (const auto& t : v.log) {
        for (const auto& qa : t.qas) sources.push_back(qa.answer);
    }
    sources.push_back(v.response);
    const auto in_answer = text::content_words(v.response);
    const auto question_key = text::normalize_ws(v.question);
    json keywords = json::array();
    for (const auto& w : ranked_words(sources)) {
        if (keywords.size() >= static_cast<std::size_t>(count)) break;
        if (std::find(in_answer.begin(), in_answer.end(), w) != in_answer.end()) continue;
        if (w == question_key) continue;
        keywords.push_back(w);
    }
    return {{"meta", {{"rationale", "Frequent words from the user's own writing that the answer has not used yet."}}},
            {"keywords", keywords}};
}

json generate_comment(const StateView& v) {
    const bool ko = korean(v);
    std::string category;
    std::string comment;
    std::string rationale;
    if (text::normalize_ws(v.response).empty()) {
        category = "tip";
        comment = ko ? "한 가지 구체적인 장면을 떠올리며 짧게 시작해 보세요."
                     : "Try starting with one concrete moment and describe it in a sentence or two.";
        rationale = "The user has not started answering, so a tip on how to begin helps most.";
    } else {
        static const std::array<const char*, 3> kCats = {"encouragement", "subquestion", "insight"};
        const auto r = std::max<long long>(v.revision, 1);
        category = kCats[static_cast<std::size_t>((r - 1) % 3)];
        if (category == "encouragement") {
            comment = ko ? "솔직하게 적어 주셨어요. 지금의 생각을 조금 더 이어가 보세요."
                         : "You are putting real thought into this. Keep following that line.";
            rationale = "The answer is underway; affirming it sustains momentum.";
        } else if (category == "subquestion") {
            comment = ko ? "그때 어떤 감정이 가장 크게 느껴졌나요?"
                         : "Which feeling was strongest when that happened?";
            rationale = "A narrower sub-question can help the answer go one level deeper.";
        } else {
            comment = ko ? "지금 적은 내용이 처음 이야기와 어떻게 이어지는지 살펴보면 새로운 점이 보일 수 있어요."
                         : "Notice how what you wrote connects back to your opening story.";
            rationale = "Linking the answer to the narrative surfaces a pattern worth noticing.";
        }
    }
    return {{"meta", {{"rationale", rationale}}}, {"category", category}, {"comment", comment}};
}

std::string first_fragment(std::string_view s, std::size_t limit) {
    const auto sentences = text::split_sentences(s);
    const std::string head = sentences.empty() ? text::trim(s) : sentences.front().text;
    return text::trim(text::take_code_points(head, limit));
}

json generate_summary(const StateView& v) {
    const bool ko = korean(v);
    std::size_t user_chars = text::code_point_count(v.narrative);
    struct Para {
        std::string theme;
        std::string fragment;
    };
    std::vector<Para> paras;
    for (const auto& t : v.log) {
        std::string fragment;
        for (const auto& qa : t.qas) {
            user_chars += text::code_point_count(qa.answer);
            if (fragment.empty() && !text::normalize_ws(qa.answer).empty()) {
                fragment = first_fragment(qa.answer, 160);
            }
        }
        if (!fragment.empty()) paras.push_back({t.name, fragment});
    }
    std::string summary;
    auto append = [&](const std::string& p) {
        if (!summary.empty()) summary += "\n\n";
        summary += p;
    };
    if (paras.empty()) {
        const auto fragment = first_fragment(v.narrative, 160);
        append(ko ? "처음에 이렇게 적으셨습니다: \"" + fragment + "\"" : "You began by writing: \"" + fragment + "\"");
    } else {
        for (const auto& p : paras) {
            append(ko ? "‘" + p.theme + "’에 대해 이렇게 적으셨습니다: \"" + p.fragment + "\""
                      : "On \"" + p.theme + "\", you wrote: \"" + p.fragment + "\"");
        }
        if (text::code_point_count(summary) > user_chars + 600) {
            summary.clear();
            for (const auto& p : paras) append("\"" + p.fragment + "\"");
        }
    }
    return {{"meta", {{"rationale", "Each paragraph stays with the user's own words for one theme."}}},
            {"summary", summary}};
}

}  // namespace

std::string mock_generate(SchemaId schema, std::string_view state_xml, std::uint64_t seed, int count) {
    const auto v = read_state(state_xml);
    switch (schema) {
        case SchemaId::themes: return fence(generate_themes(v, seed, count > 0 ? count : 3));
        case SchemaId::questions: return fence(generate_questions(v, seed, count > 0 ? count : 3));
        case SchemaId::keywords: return fence(generate_keywords(v, count > 0 ? count : 2));
        case SchemaId::comment: return fence(generate_comment(v));
        case SchemaId::summary: return fence(generate_summary(v));
    }
    return {};
}

std::string apply_fault(Fault fault, SchemaId schema, const std::string& raw) {
    if (fault == Fault::malformed) return raw.substr(0, raw.size() / 2);
    if (fault == Fault::timeout) throw Error(ErrorCode::ProviderTimeout, "mock provider timed out");
    auto payload = extract_structured(raw).value_or(json::object());
    switch (fault) {
        case Fault::missing_field:
            payload.erase(std::string(to_string(schema)));
            payload.erase("themes");
            payload.erase("questions");
            payload.erase("keywords");
            payload.erase("category");
            payload.erase("summary");
            break;
        case Fault::empty_rationale:
            payload["meta"]["rationale"] = "";
            break;
        case Fault::paraphrase_quote:
            if (payload.contains("themes")) {
                for (auto& t : payload["themes"]) {
                    auto cps = text::decode_utf8(t["quote"].get<std::string>());
                    // Substitute one non-space character in the middle.
                    for (std::size_t i = cps.size() / 2; i < cps.size(); ++i) {
                        if (!text::is_unicode_whitespace(cps[i])) {
                            cps[i] = (cps[i] == U'x' || cps[i] == U'X') ? U'q' : U'x';
                            break;
                        }
                    }
                    t["quote"] = text::encode_utf8(cps);
                }
            }
            break;
        case Fault::fabricate_quote:
            if (payload.contains("themes")) {
                for (auto& t : payload["themes"]) t["quote"] = "A passage the user never wrote about zebras.";
            }
            break;
        case Fault::duplicate_theme:
            if (payload.contains("themes") && payload["themes"].size() >= 2) {
                payload["themes"][1]["main_theme"] = payload["themes"][0]["main_theme"];
            }
            break;
        case Fault::drop_question_mark:
            if (payload.contains("questions")) {
                for (auto& q : payload["questions"]) {
                    auto s = q["question"].get<std::string>();
                    std::erase(s, '?');
                    q["question"] = s;
                }
            }
            break;
        case Fault::oversize_summary:
            if (payload.contains("summary")) {
                std::string big = payload["summary"].get<std::string>();
                big += "\n\n" + std::string(5000, '.');
                payload["summary"] = big;
            }
            break;
        default:
            break;
    }
    return fence(payload);
}

std::string MockProvider::complete(const CompletionRequest& request, std::string_view /*corrective_note*/,
                                   std::stop_token stop) {
    ++calls_;
    std::optional<Fault> fault;
    std::function<void(const CompletionRequest&)> hook;
    {
        std::lock_guard lock(mu_);
        if (!faults_.empty()) {
            fault = faults_.front();
            faults_.pop_front();
        }
        hook = on_call_;
    }
    if (hook) hook(request);
    if (stop.stop_requested()) throw Error(ErrorCode::Cancelled, "request cancelled");
    auto raw = mock_generate(request.output_schema, request.state_xml, seed_, request.expected_count);
    if (fault) raw = apply_fault(*fault, request.output_schema, raw);
    return raw;
}

void MockProvider::inject(Fault fault, int times) {
    std::lock_guard lock(mu_);
    for (int i = 0; i < times; ++i) faults_.push_back(fault);
}

void MockProvider::clear_faults() {
    std::lock_guard lock(mu_);
    faults_.clear();
}

void MockProvider::set_on_call(std::function<void(const CompletionRequest&)> hook) {
    std::lock_guard lock(mu_);
    on_call_ = std::move(hook);
}

}  // namespace mindtrail::llm
