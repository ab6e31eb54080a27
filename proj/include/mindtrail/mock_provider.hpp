#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <string>
#include <string_view>

#include "mindtrail/llm.hpp"

namespace mindtrail::llm {

/// Deterministic stand-in for a language model. Output is a pure function
/// of (schema, state_xml, seed, count):
///   themes    - named after the longest unused sentences of the narrative and
///               answers; quote is the sentence itself.
///   questions - three templates instantiated with the theme, then with focus
///               words from the current response and the theme's answers.
///   keywords  - most frequent content words not already in the current answer.
///   comment   - tip for an empty answer, otherwise cycles encouragement,
///               subquestion, insight by answer revision.
///   summary   - one paragraph per theme with answers, each quoting an answer.
/// `count` 0 selects the schema default (3 themes, 3 questions, 2 keywords).
std::string mock_generate(SchemaId schema, std::string_view state_xml, std::uint64_t seed, int count = 0);

enum class Fault {
    malformed,         // truncated JSON
    missing_field,     // drops the schema's main field
    empty_rationale,   // meta.rationale = ""
    paraphrase_quote,  // one-character edit to every theme quote (near miss)
    fabricate_quote,   // replaces every theme quote with unrelated text
    duplicate_theme,   // renames the first theme after an existing one
    drop_question_mark,
    oversize_summary,
    timeout,
};

class MockProvider : public Provider {
public:
    explicit MockProvider(std::uint64_t seed) : seed_(seed) {}

    std::string complete(const CompletionRequest& request, std::string_view corrective_note,
                         std::stop_token stop) override;

    /// Queues `fault` for the next `times` calls.
    void inject(Fault fault, int times = 1);
    void clear_faults();
    /// Runs inside every call before the reply is produced.
    void set_on_call(std::function<void(const CompletionRequest&)> hook);

    int call_count() const noexcept { return calls_.load(); }
    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::uint64_t seed_;
    std::atomic<int> calls_{0};
    std::mutex mu_;
    std::deque<Fault> faults_;
    std::function<void(const CompletionRequest&)> on_call_;
};

/// Applies `fault` to a well-formed mock reply.
std::string apply_fault(Fault fault, SchemaId schema, const std::string& raw);

}  // namespace mindtrail::llm
