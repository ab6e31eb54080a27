#include "mindtrail/model.hpp"

#include <algorithm>

#include "mindtrail/error.hpp"
#include "mindtrail/text.hpp"

namespace mindtrail {

namespace {

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(std::string_view s, const std::array<Enum, N>& values) {
    for (auto v : values) {
        if (to_string(v) == s) return v;
    }
    return std::nullopt;
}

constexpr std::array kOrigins{Origin::ai, Origin::user};
constexpr std::array kStatuses{ThemeStatus::active, ThemeStatus::inactive};
constexpr std::array kCategories{CommentCategory::tip, CommentCategory::encouragement,
                                 CommentCategory::subquestion, CommentCategory::insight,
                                 CommentCategory::other};
constexpr std::array kTriggers{Trigger::automatic, Trigger::user};
constexpr std::array kPages{Page::narrative, Page::exploration, Page::summary};
constexpr std::array kEventKinds{
    EventKind::page_enter,        EventKind::page_leave,         EventKind::theme_suggested,
    EventKind::theme_activated,   EventKind::theme_pinned,       EventKind::question_suggested,
    EventKind::question_selected, EventKind::answer_updated,     EventKind::keywords_revealed,
    EventKind::keywords_more,     EventKind::comment_requested,  EventKind::summary_requested,
    EventKind::survey_submitted};

Question& require_question(Session& session, std::string_view question_id) {
    auto* q = session.find_question(question_id);
    if (q == nullptr) {
        throw Error(ErrorCode::UnknownQuestion, "unknown question '" + std::string(question_id) + "'");
    }
    return *q;
}

}  // namespace

std::string_view to_string(Origin v) { return v == Origin::ai ? "ai" : "user"; }
std::string_view to_string(ThemeStatus v) { return v == ThemeStatus::active ? "active" : "inactive"; }

std::string_view to_string(CommentCategory v) {
    switch (v) {
        case CommentCategory::tip: return "tip";
        case CommentCategory::encouragement: return "encouragement";
        case CommentCategory::subquestion: return "subquestion";
        case CommentCategory::insight: return "insight";
        case CommentCategory::other: return "other";
    }
    return "other";
}

std::string_view to_string(Trigger v) { return v == Trigger::automatic ? "auto" : "user"; }

std::string_view to_string(Page v) {
    switch (v) {
        case Page::narrative: return "narrative";
        case Page::exploration: return "exploration";
        case Page::summary: return "summary";
    }
    return "narrative";
}

std::string_view to_string(EventKind v) {
    switch (v) {
        case EventKind::page_enter: return "page_enter";
        case EventKind::page_leave: return "page_leave";
        case EventKind::theme_suggested: return "theme_suggested";
        case EventKind::theme_activated: return "theme_activated";
        case EventKind::theme_pinned: return "theme_pinned";
        case EventKind::question_suggested: return "question_suggested";
        case EventKind::question_selected: return "question_selected";
        case EventKind::answer_updated: return "answer_updated";
        case EventKind::keywords_revealed: return "keywords_revealed";
        case EventKind::keywords_more: return "keywords_more";
        case EventKind::comment_requested: return "comment_requested";
        case EventKind::summary_requested: return "summary_requested";
        case EventKind::survey_submitted: return "survey_submitted";
    }
    return "page_enter";
}

std::optional<Origin> parse_origin(std::string_view s) { return lookup(s, kOrigins); }
std::optional<ThemeStatus> parse_theme_status(std::string_view s) { return lookup(s, kStatuses); }
std::optional<CommentCategory> parse_comment_category(std::string_view s) { return lookup(s, kCategories); }
std::optional<Trigger> parse_trigger(std::string_view s) { return lookup(s, kTriggers); }
std::optional<Page> parse_page(std::string_view s) { return lookup(s, kPages); }
std::optional<EventKind> parse_event_kind(std::string_view s) { return lookup(s, kEventKinds); }

const Theme* Session::find_theme(std::string_view theme_id) const {
    for (const auto& t : themes) {
        if (t.id == theme_id) return &t;
    }
    return nullptr;
}

Theme* Session::find_theme(std::string_view theme_id) {
    return const_cast<Theme*>(std::as_const(*this).find_theme(theme_id));
}

const Question* Session::find_question(std::string_view question_id) const {
    for (const auto& t : themes) {
        for (const auto& q : t.questions) {
            if (q.id == question_id) return &q;
        }
    }
    return nullptr;
}

Question* Session::find_question(std::string_view question_id) {
    return const_cast<Question*>(std::as_const(*this).find_question(question_id));
}

const Theme* Session::theme_of_question(std::string_view question_id) const {
    for (const auto& t : themes) {
        for (const auto& q : t.questions) {
            if (q.id == question_id) return &t;
        }
    }
    return nullptr;
}

std::size_t Session::question_total() const {
    std::size_t n = 0;
    for (const auto& t : themes) n += t.questions.size();
    return n;
}

std::string Session::grounding_corpus() const {
    std::string corpus = narrative;
    for (const auto& t : themes) {
        for (const auto& q : t.questions) {
            if (q.answer.text.empty()) continue;
            corpus += '\n';
            corpus += q.answer.text;
        }
    }
    return corpus;
}

Session create_session(std::string id, std::string_view narrative, std::string locale, Timestamp now) {
    if (text::normalize_ws(narrative).empty()) {
        throw Error(ErrorCode::EmptyNarrative, "narrative must contain a non-whitespace character");
    }
    if (!text::is_valid_utf8(narrative)) {
        throw Error(ErrorCode::InvalidRequest, "narrative is not valid UTF-8");
    }
    Session s;
    s.id = std::move(id);
    s.locale = std::move(locale);
    s.narrative = std::string(narrative);
    s.state_version = 1;
    s.created_at = now;
    return s;
}

bool theme_name_taken(const Session& session, std::string_view name) {
    const auto key = text::normalize_ws(name);
    for (const auto& t : session.themes) {
        if (text::normalize_ws(t.suggestion.main_theme) == key) return true;
    }
    for (const auto& p : session.pinned) {
        if (text::normalize_ws(p.main_theme) == key) return true;
    }
    return false;
}

const Theme& activate_theme(Session& session, ThemeSuggestion suggestion, Timestamp now) {
    const auto key = text::normalize_ws(suggestion.main_theme);
    if (key.empty()) throw Error(ErrorCode::InvalidRequest, "theme name must not be empty");
    for (const auto& t : session.themes) {
        if (text::normalize_ws(t.suggestion.main_theme) == key) {
            throw Error(ErrorCode::DuplicateTheme, "theme '" + suggestion.main_theme + "' already exists");
        }
    }
    if (suggestion.origin == Origin::user) {
        suggestion.expressions.clear();
        suggestion.quote.clear();
    }
    std::erase_if(session.pinned, [&](const ThemeSuggestion& p) {
        return text::normalize_ws(p.main_theme) == key;
    });
    Theme theme;
    theme.id = "t" + std::to_string(session.themes.size() + 1);
    theme.suggestion = std::move(suggestion);
    theme.status = ThemeStatus::active;
    theme.activated_at = now;
    session.themes.push_back(std::move(theme));
    ++session.state_version;
    return session.themes.back();
}

void pin_theme(Session& session, ThemeSuggestion suggestion) {
    if (text::normalize_ws(suggestion.main_theme).empty()) {
        throw Error(ErrorCode::InvalidRequest, "theme name must not be empty");
    }
    if (theme_name_taken(session, suggestion.main_theme)) {
        throw Error(ErrorCode::DuplicateTheme, "theme '" + suggestion.main_theme + "' already pinned or active");
    }
    session.pinned.push_back(std::move(suggestion));
    ++session.state_version;
}

void set_theme_status(Session& session, std::string_view theme_id, ThemeStatus status) {
    auto* t = session.find_theme(theme_id);
    if (t == nullptr) throw Error(ErrorCode::UnknownTheme, "unknown theme '" + std::string(theme_id) + "'");
    if (t->status == status) return;
    t->status = status;
    ++session.state_version;
}

const Question& select_question(Session& session, std::string_view theme_id,
                                const QuestionCandidate& candidate, Timestamp now) {
    auto* theme = session.find_theme(theme_id);
    if (theme == nullptr || theme->status != ThemeStatus::active) {
        throw Error(ErrorCode::UnknownTheme, "no active theme '" + std::string(theme_id) + "'");
    }
    if (text::normalize_ws(candidate.text).empty()) {
        throw Error(ErrorCode::InvalidRequest, "question text must not be empty");
    }
    for (const auto& prior : theme->questions) {
        if (text::same_name(prior.text, candidate.text)) {
            throw Error(ErrorCode::InvalidRequest, "question already selected in theme '" + theme->id + "'");
        }
    }
    Question q;
    q.id = "q" + std::to_string(session.question_total() + 1);
    q.text = candidate.text;
    q.intention = candidate.intention;
    q.selected_at = std::max(now, theme->activated_at);
    q.answer.updated_at = q.selected_at;
    theme->questions.push_back(std::move(q));
    ++session.state_version;
    return theme->questions.back();
}

const AnswerDraft& update_answer(Session& session, std::string_view question_id, std::string text,
                                 Timestamp now) {
    auto& q = require_question(session, question_id);
    if (!text::is_valid_utf8(text)) throw Error(ErrorCode::InvalidRequest, "answer is not valid UTF-8");
    q.answer.text = std::move(text);
    q.answer.revision += 1;
    q.answer.updated_at = now;
    ++session.state_version;
    return q.answer;
}

const KeywordBatch& append_keyword_batch(Session& session, std::string_view question_id,
                                         std::vector<std::string> keywords) {
    auto& q = require_question(session, question_id);
    if (keywords.empty()) throw Error(ErrorCode::InvalidRequest, "keyword batch must not be empty");
    for (const auto& k : keywords) {
        for (const auto& batch : q.keyword_batches) {
            for (const auto& prior : batch.keywords) {
                if (text::same_name(prior, k)) {
                    throw Error(ErrorCode::InvalidRequest, "keyword '" + k + "' already revealed");
                }
            }
        }
    }
    KeywordBatch batch;
    batch.batch_index = static_cast<std::int64_t>(q.keyword_batches.size());
    batch.keywords = std::move(keywords);
    q.keyword_batches.push_back(std::move(batch));
    q.keywords_visible = true;
    ++session.state_version;
    return q.keyword_batches.back();
}

void reveal_keywords(Session& session, std::string_view question_id) {
    auto& q = require_question(session, question_id);
    if (q.keywords_visible) return;
    q.keywords_visible = true;
    ++session.state_version;
}

const Comment& append_comment(Session& session, std::string_view question_id, Comment comment) {
    auto& q = require_question(session, question_id);
    if (comment.trigger == Trigger::automatic &&
        std::any_of(q.comments.begin(), q.comments.end(),
                    [](const Comment& c) { return c.trigger == Trigger::automatic; })) {
        throw Error(ErrorCode::InvalidRequest, "question already has its automatic comment");
    }
    if (comment.trigger == Trigger::user && q.comments.empty()) {
        throw Error(ErrorCode::InvalidRequest, "automatic comment must precede user comments");
    }
    if (!q.comments.empty()) comment.created_at = std::max(comment.created_at, q.comments.back().created_at);
    q.comments.push_back(std::move(comment));
    ++session.state_version;
    return q.comments.back();
}

const SummarySnapshot& append_summary(Session& session, std::string text, Timestamp now) {
    SummarySnapshot snap;
    snap.text = std::move(text);
    snap.state_version = session.state_version;
    snap.created_at = session.summaries.empty() ? now : std::max(now, session.summaries.back().created_at);
    session.summaries.push_back(std::move(snap));
    ++session.state_version;
    return session.summaries.back();
}

int score_pathways(const PathwaysResponse& items) {
    int total = 0;
    for (int v : items) {
        if (v < 1 || v > 8) {
            throw Error(ErrorCode::OutOfRangeItem, "item value " + std::to_string(v) + " outside [1, 8]");
        }
        total += v;
    }
    return total;
}

int score_pathways(const std::vector<int>& items) {
    if (items.size() != 4) {
        throw Error(ErrorCode::OutOfRangeItem, "expected 4 items, got " + std::to_string(items.size()));
    }
    return score_pathways(PathwaysResponse{items[0], items[1], items[2], items[3]});
}

std::optional<int> pathways_delta(const PathwaysPair& pair) {
    if (!pair.post) return std::nullopt;
    return score_pathways(*pair.post) - score_pathways(pair.pre);
}

int submit_survey(Session& session, bool post, const PathwaysResponse& items) {
    const int score = score_pathways(items);
    if (post) {
        if (!session.survey) {
            throw Error(ErrorCode::InvalidRequest, "post survey requires a pre survey");
        }
        session.survey->post = items;
    } else {
        PathwaysPair pair;
        pair.pre = items;
        if (session.survey) pair.post = session.survey->post;
        session.survey = pair;
    }
    ++session.state_version;
    return score;
}

}  // namespace mindtrail
