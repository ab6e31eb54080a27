#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mindtrail {

/// Milliseconds since the Unix epoch.
using Timestamp = std::int64_t;

enum class Origin { ai, user };
enum class ThemeStatus { active, inactive };
enum class CommentCategory { tip, encouragement, subquestion, insight, other };
enum class Trigger { automatic, user };
enum class Page { narrative, exploration, summary };

enum class EventKind {
    page_enter,
    page_leave,
    theme_suggested,
    theme_activated,
    theme_pinned,
    question_suggested,
    question_selected,
    answer_updated,
    keywords_revealed,
    keywords_more,
    comment_requested,
    summary_requested,
    survey_submitted,
};

std::string_view to_string(Origin v);
std::string_view to_string(ThemeStatus v);
std::string_view to_string(CommentCategory v);
std::string_view to_string(Trigger v);
std::string_view to_string(Page v);
std::string_view to_string(EventKind v);

// Parsers return nullopt on unknown names.
std::optional<Origin> parse_origin(std::string_view s);
std::optional<ThemeStatus> parse_theme_status(std::string_view s);
std::optional<CommentCategory> parse_comment_category(std::string_view s);
std::optional<Trigger> parse_trigger(std::string_view s);
std::optional<Page> parse_page(std::string_view s);
std::optional<EventKind> parse_event_kind(std::string_view s);

struct ThemeSuggestion {
    std::string main_theme;
    std::vector<std::string> expressions;
    std::string quote;
    Origin origin{Origin::ai};

    bool operator==(const ThemeSuggestion&) const = default;
};

struct AnswerDraft {
    std::string text;
    std::int64_t revision{0};
    Timestamp updated_at{0};

    bool operator==(const AnswerDraft&) const = default;
};

struct KeywordBatch {
    std::int64_t batch_index{0};
    std::vector<std::string> keywords;

    bool operator==(const KeywordBatch&) const = default;
};

struct Comment {
    std::string text;
    CommentCategory category{CommentCategory::other};
    std::string rationale;
    Trigger trigger{Trigger::user};
    Timestamp created_at{0};

    bool operator==(const Comment&) const = default;
};

struct Question {
    std::string id;
    std::string text;
    std::string intention;
    Timestamp selected_at{0};
    AnswerDraft answer;
    std::vector<KeywordBatch> keyword_batches;
    std::vector<Comment> comments;
    bool keywords_visible{false};

    bool operator==(const Question&) const = default;
};

struct Theme {
    std::string id;
    ThemeSuggestion suggestion;
    ThemeStatus status{ThemeStatus::active};
    std::vector<Question> questions;
    Timestamp activated_at{0};

    bool operator==(const Theme&) const = default;
};

struct SummarySnapshot {
    std::string text;
    std::int64_t state_version{0};
    Timestamp created_at{0};

    bool operator==(const SummarySnapshot&) const = default;
};

using PathwaysResponse = std::array<int, 4>;

struct PathwaysPair {
    PathwaysResponse pre{};
    std::optional<PathwaysResponse> post;

    bool operator==(const PathwaysPair&) const = default;
};

struct Session {
    std::string id;
    std::string locale;
    std::string narrative;
    std::vector<Theme> themes;
    std::vector<ThemeSuggestion> pinned;
    std::vector<SummarySnapshot> summaries;
    std::optional<PathwaysPair> survey;
    std::int64_t state_version{0};
    Timestamp created_at{0};

    bool operator==(const Session&) const = default;

    const Theme* find_theme(std::string_view theme_id) const;
    Theme* find_theme(std::string_view theme_id);
    const Question* find_question(std::string_view question_id) const;
    Question* find_question(std::string_view question_id);
    // Theme that owns the question, or nullptr.
    const Theme* theme_of_question(std::string_view question_id) const;
    std::size_t question_total() const;

    /// Narrative followed by every current answer, newline separated.
    std::string grounding_corpus() const;
};

struct EventRecord {
    Timestamp timestamp{0};
    EventKind kind{EventKind::page_enter};
    std::map<std::string, std::string> payload;

    bool operator==(const EventRecord&) const = default;
};

/// Socratic question candidate as produced by the question pipeline.
struct QuestionCandidate {
    std::string text;
    std::string intention;

    bool operator==(const QuestionCandidate&) const = default;
};

// Domain operations. Each mutating operation bumps state_version by one and
// stamps entities with `now`; callers keep `now` monotonic per session.

Session create_session(std::string id, std::string_view narrative, std::string locale, Timestamp now);
const Theme& activate_theme(Session& session, ThemeSuggestion suggestion, Timestamp now);
void pin_theme(Session& session, ThemeSuggestion suggestion);
void set_theme_status(Session& session, std::string_view theme_id, ThemeStatus status);
const Question& select_question(Session& session, std::string_view theme_id,
                                const QuestionCandidate& candidate, Timestamp now);
const AnswerDraft& update_answer(Session& session, std::string_view question_id, std::string text,
                                 Timestamp now);
const KeywordBatch& append_keyword_batch(Session& session, std::string_view question_id,
                                         std::vector<std::string> keywords);
void reveal_keywords(Session& session, std::string_view question_id);
const Comment& append_comment(Session& session, std::string_view question_id, Comment comment);
const SummarySnapshot& append_summary(Session& session, std::string text, Timestamp now);
int submit_survey(Session& session, bool post, const PathwaysResponse& items);

/// Sum of the four Pathways items; throws OutOfRangeItem outside [1, 8].
int score_pathways(const PathwaysResponse& items);
int score_pathways(const std::vector<int>& items);
/// Post minus pre score, or nullopt when no post response exists.
std::optional<int> pathways_delta(const PathwaysPair& pair);

/// True when `name` collides with an activated or pinned theme.
bool theme_name_taken(const Session& session, std::string_view name);

}  // namespace mindtrail
