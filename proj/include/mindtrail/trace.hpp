#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "mindtrail/metrics.hpp"
#include "mindtrail/serialize.hpp"

namespace mindtrail::trace {

/// Script format (JSON):
///   {"name": "...", "seed": 7, "start_ms": 1700000000000,
///    "steps": [{"op": "create", "narrative": "...", "locale": "ko", "t": 0}, ...]}
/// `t` is seconds after start_ms; a step without `t` happens 1 s after the
/// previous one. Ops: create, page_enter, page_leave, suggest_themes,
/// activate {index | custom | pinned}, pin {index}, suggest_questions
/// {theme, n, after_question}, select {index}, answer {question, text},
/// keywords {question, mode}, comment {question}, summary, survey {phase, items}.
/// Themes are referenced by 1-based ordinal or "last"; questions by id
/// ("q3"), 1-based ordinal within the session, or "last".
struct ReplayResult {
    std::string name;
    std::string session_id;
    StoreRecord record;
    metrics::UsageRow row;
    metrics::PhaseTimeline timeline;
};

/// Throws ScriptError (message starts with "step N") for malformed or
/// dangling steps; domain errors keep their code and gain the step prefix.
ReplayResult replay(const nlohmann::json& script, std::optional<std::uint64_t> seed_override = std::nullopt);
ReplayResult replay_file(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override = std::nullopt);

/// Writes export.json, metrics.csv and timeline.json into `out_dir`.
void write_outputs(const ReplayResult& result, const std::filesystem::path& out_dir);

nlohmann::json timeline_json(const metrics::PhaseTimeline& timeline);

}  // namespace mindtrail::trace
