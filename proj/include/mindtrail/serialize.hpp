#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "mindtrail/model.hpp"

namespace mindtrail {

using json = nlohmann::json;

void to_json(json& j, const ThemeSuggestion& v);
void from_json(const json& j, ThemeSuggestion& v);
void to_json(json& j, const AnswerDraft& v);
void from_json(const json& j, AnswerDraft& v);
void to_json(json& j, const KeywordBatch& v);
void from_json(const json& j, KeywordBatch& v);
void to_json(json& j, const Comment& v);
void from_json(const json& j, Comment& v);
void to_json(json& j, const Question& v);
void from_json(const json& j, Question& v);
void to_json(json& j, const Theme& v);
void from_json(const json& j, Theme& v);
void to_json(json& j, const SummarySnapshot& v);
void from_json(const json& j, SummarySnapshot& v);
void to_json(json& j, const PathwaysPair& v);
void from_json(const json& j, PathwaysPair& v);
void to_json(json& j, const Session& v);
void from_json(const json& j, Session& v);
void to_json(json& j, const EventRecord& v);
void from_json(const json& j, EventRecord& v);
void to_json(json& j, const QuestionCandidate& v);
void from_json(const json& j, QuestionCandidate& v);

/// Sorted keys, no insignificant whitespace, UTF-8.
std::string canonical_dump(const json& j);
std::string canonical_session(const Session& s);

/// Parses a canonical (or any equivalent) session document; throws ParseError.
Session parse_session(std::string_view document);

std::string sha256_hex(std::string_view data);

/// Persisted unit per session: document, append-only events, document checksum.
struct StoreRecord {
    std::string document;
    std::vector<EventRecord> events;
    std::string checksum;
};

json export_json(const StoreRecord& record);
StoreRecord parse_export(std::string_view text);

}  // namespace mindtrail
