#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stop_token>
#include <string>
#include <string_view>
#include <vector>

#include "mindtrail/llm.hpp"
#include "mindtrail/model.hpp"

namespace mindtrail::pipelines {

/// Which parts of the session a pipeline sees.
struct StateScope {
    bool include_previous_log{true};
    std::optional<std::string> theme_of_session;  // theme id
    std::optional<std::string> question;          // question id
    bool include_current_response{false};

    /// Throws InvalidRequest when the nesting rules are broken.
    void validate() const;
};

/// Canonical XML view of the session: stable tag order, escaped user text,
/// no timestamps. Throws UnknownTheme / UnknownQuestion.
std::string serialize_state_xml(const Session& session, const StateScope& scope);

/// Versioned per-locale instruction templates. Placeholders: {count},
/// {avoid}, {limit}, {schema}.
struct PromptPack {
    std::string version;
    std::string locale;
    std::string persona_preamble;
    std::map<llm::SchemaId, std::string> templates;

    /// Packs compiled into the library; unknown locales fall back to "en".
    static PromptPack builtin(std::string_view locale);
    /// Reads prompts/<pipeline>.<locale>.txt, persona.<locale>.txt and VERSION.
    static PromptPack load(const std::string& directory, std::string_view locale);

    std::string render(llm::SchemaId schema, const std::map<std::string, std::string>& vars) const;
    /// Returns the first broken invariant, if any.
    std::optional<std::string> check() const;
};

std::vector<std::string> builtin_locales();

struct Options {
    int theme_count{3};
    int question_count{3};
    int initial_keywords{2};
    int more_keywords{3};
    std::size_t summary_allowance{600};
    std::size_t near_miss_distance{2};
};

struct ThemeReport {
    std::vector<ThemeSuggestion> suggestions;
    int dropped_ungrounded{0};
    int dropped_duplicate{0};
    int dropped_no_expression{0};
    bool retried{false};
    int provider_attempts{0};
};

/// Characters the user wrote (narrative plus current answers), in code points.
std::size_t user_written_chars(const Session& session);
std::size_t summary_limit(const Session& session, std::size_t allowance);

/// Keyword shape rule: one to five words.
bool keyword_shape_ok(std::string_view keyword);
/// Maps full-width and Arabic question marks to '?' and trims.
std::string normalize_question_mark(std::string_view question);

class Pipelines {
public:
    explicit Pipelines(const llm::Gateway& gateway, Options options = {});

    std::vector<ThemeSuggestion> generate_themes(const Session& session, int n,
                                                 std::stop_token stop = {}) const;
    ThemeReport generate_themes_detailed(const Session& session, int n, std::stop_token stop = {}) const;

    std::vector<QuestionCandidate> generate_questions(const Session& session, std::string_view theme_id, int n,
                                                      const std::optional<std::string>& after_question = {},
                                                      std::stop_token stop = {}) const;

    /// Batch whose batch_index is the next free slot for the question.
    KeywordBatch generate_keywords(const Session& session, std::string_view question_id, int count,
                                   std::stop_token stop = {}) const;

    /// Comment without created_at; the caller stamps and appends it.
    Comment generate_comment(const Session& session, std::string_view question_id, Trigger trigger,
                             std::stop_token stop = {}) const;

    /// Snapshot anchored at session.state_version; created_at left at 0.
    SummarySnapshot generate_summary(const Session& session, std::stop_token stop = {}) const;

    const Options& options() const noexcept { return options_; }

private:
    llm::CompletionRequest request_for(const Session& session, llm::SchemaId schema, const StateScope& scope,
                                       std::map<std::string, std::string> vars, int expected_count) const;

    const llm::Gateway& gateway_;
    Options options_;
};

}  // namespace mindtrail::pipelines
