#include "mindtrail/llm.hpp"

#include <cstdlib>

#include "mindtrail/error.hpp"
#include "mindtrail/mock_provider.hpp"
#include "mindtrail/model.hpp"
#include "mindtrail/remote_provider.hpp"

namespace mindtrail::llm {

std::string_view to_string(SchemaId id) {
    switch (id) {
        case SchemaId::themes: return "themes";
        case SchemaId::questions: return "questions";
        case SchemaId::keywords: return "keywords";
        case SchemaId::comment: return "comment";
        case SchemaId::summary: return "summary";
    }
    return "themes";
}

std::optional<SchemaId> parse_schema_id(std::string_view s) {
    for (auto id : {SchemaId::themes, SchemaId::questions, SchemaId::keywords, SchemaId::comment,
                    SchemaId::summary}) {
        if (to_string(id) == s) return id;
    }
    return std::nullopt;
}

void ProviderConfig::validate() const {
    if (max_retries < 0) throw Error(ErrorCode::ConfigError, "llm.max_retries must be >= 0");
    if (timeout.count() <= 0) throw Error(ErrorCode::ConfigError, "llm.timeout_ms must be positive");
    if (temperature < 0.0 || temperature > 2.0) {
        throw Error(ErrorCode::ConfigError, "llm.temperature must lie in [0, 2]");
    }
    if (provider == Kind::remote) {
        if (model_name.empty()) throw Error(ErrorCode::ConfigError, "llm.model_name is required for remote");
        if (api_key_env.empty()) throw Error(ErrorCode::ConfigError, "llm.api_key_env is required for remote");
        const char* key = std::getenv(api_key_env.c_str());
        if (key == nullptr || *key == '\0') {
            throw Error(ErrorCode::ProviderAuth, "environment variable " + api_key_env + " is not set");
        }
    }
}

namespace {

std::optional<std::string> require_string(const json& obj, const char* key, bool non_empty) {
    if (!obj.contains(key)) return std::string("missing field '") + key + "'";
    if (!obj.at(key).is_string()) return std::string("field '") + key + "' must be a string";
    if (non_empty && obj.at(key).get_ref<const std::string&>().empty()) {
        return std::string("field '") + key + "' must not be empty";
    }
    return std::nullopt;
}

std::optional<std::string> require_array(const json& obj, const char* key, bool non_empty) {
    if (!obj.contains(key)) return std::string("missing field '") + key + "'";
    if (!obj.at(key).is_array()) return std::string("field '") + key + "' must be an array";
    if (non_empty && obj.at(key).empty()) return std::string("field '") + key + "' must not be empty";
    return std::nullopt;
}

}  // namespace

std::optional<std::string> validate_payload(SchemaId schema, const json& payload) {
    if (!payload.is_object()) return "reply must be a JSON object";
    if (!payload.contains("meta") || !payload.at("meta").is_object()) return "missing object 'meta'";
    if (auto e = require_string(payload.at("meta"), "rationale", true)) return "meta: " + *e;

    switch (schema) {
        case SchemaId::themes: {
            if (auto e = require_array(payload, "themes", false)) return e;
            std::size_t i = 0;
            for (const auto& t : payload.at("themes")) {
                const auto where = "themes[" + std::to_string(i++) + "]: ";
                if (!t.is_object()) return where + "must be an object";
                if (auto e = require_string(t, "main_theme", true)) return where + *e;
                if (auto e = require_string(t, "quote", false)) return where + *e;
                if (auto e = require_array(t, "expressions", false)) return where + *e;
                for (const auto& x : t.at("expressions")) {
                    if (!x.is_string()) return where + "expressions must hold strings";
                }
            }
            return std::nullopt;
        }
        case SchemaId::questions: {
            if (auto e = require_array(payload, "questions", true)) return e;
            std::size_t i = 0;
            for (const auto& q : payload.at("questions")) {
                const auto where = "questions[" + std::to_string(i++) + "]: ";
                if (!q.is_object()) return where + "must be an object";
                if (auto e = require_string(q, "question", true)) return where + *e;
                if (auto e = require_string(q, "intention", true)) return where + *e;
            }
            return std::nullopt;
        }
        case SchemaId::keywords: {
            if (auto e = require_array(payload, "keywords", true)) return e;
            for (const auto& k : payload.at("keywords")) {
                if (!k.is_string() || k.get_ref<const std::string&>().empty()) {
                    return std::string("keywords must be non-empty strings");
                }
            }
            return std::nullopt;
        }
        case SchemaId::comment: {
            if (auto e = require_string(payload, "category", true)) return e;
            if (!parse_comment_category(payload.at("category").get<std::string>())) {
                return "category must be one of tip, encouragement, subquestion, insight, other";
            }
            return require_string(payload, "comment", true);
        }
        case SchemaId::summary:
            return require_string(payload, "summary", true);
    }
    return std::nullopt;
}

std::string schema_description(SchemaId schema) {
    const std::string meta = R"("meta": {"rationale": string (your reasoning, non-empty)})";
    switch (schema) {
        case SchemaId::themes:
            return "{" + meta +
                   R"(, "themes": [{"main_theme": string, "expressions": [string, ...], "quote": string (verbatim excerpt of the user's writing)}]})";
        case SchemaId::questions:
            return "{" + meta + R"(, "questions": [{"question": string ending in '?', "intention": string}]})";
        case SchemaId::keywords:
            return "{" + meta + R"(, "keywords": [string (at most five words)]})";
        case SchemaId::comment:
            return "{" + meta +
                   R"(, "category": "tip" | "encouragement" | "subquestion" | "insight" | "other", "comment": string})";
        case SchemaId::summary:
            return "{" + meta + R"(, "summary": string (paragraphs separated by a blank line)})";
    }
    return {};
}

std::optional<json> extract_structured(std::string_view raw) {
    auto try_parse = [](std::string_view s) -> std::optional<json> {
        auto j = json::parse(s, nullptr, false);
        if (j.is_discarded() || !j.is_object()) return std::nullopt;
        return j;
    };
    const auto fence = raw.find("```");
    if (fence != std::string_view::npos) {
        auto body_start = raw.find('\n', fence);
        if (body_start == std::string_view::npos) return std::nullopt;
        ++body_start;
        const auto close = raw.find("```", body_start);
        if (close == std::string_view::npos) return std::nullopt;
        return try_parse(raw.substr(body_start, close - body_start));
    }
    const auto open = raw.find('{');
    const auto last = raw.rfind('}');
    if (open == std::string_view::npos || last == std::string_view::npos || last < open) return std::nullopt;
    return try_parse(raw.substr(open, last - open + 1));
}

std::string corrective_note(SchemaId schema, std::string_view first_error) {
    return "Your previous reply could not be used: " + std::string(first_error) +
           ". Reply again with exactly one fenced ```json block containing an object of the form " +
           schema_description(schema) + ".";
}

Gateway::Gateway(ProviderConfig config, std::shared_ptr<Provider> provider)
    : config_(std::move(config)), provider_(std::move(provider)) {
    config_.validate();
    if (!provider_) provider_ = make_provider(config_);
}

Gateway::Gateway(ProviderConfig config) : Gateway(std::move(config), nullptr) {}

StructuredOutput Gateway::complete_structured(const CompletionRequest& request, std::stop_token stop,
                                              std::string_view extra_note) const {
    std::string note(extra_note);
    std::string last_raw;
    std::string last_error;
    const int max_attempts = config_.max_retries + 1;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        if (stop.stop_requested()) throw Error(ErrorCode::Cancelled, "request cancelled");
        last_raw = provider_->complete(request, note, stop);
        auto parsed = extract_structured(last_raw);
        std::optional<std::string> error;
        if (!parsed) {
            error = "reply did not contain a parseable JSON object";
        } else {
            error = validate_payload(request.output_schema, *parsed);
        }
        if (!error) {
            StructuredOutput out;
            out.payload = std::move(*parsed);
            const auto& meta = out.payload.at("meta");
            out.meta.rationale = meta.at("rationale").get<std::string>();
            for (const auto& [k, v] : meta.items()) {
                if (k != "rationale") out.meta.extra[k] = v;
            }
            out.raw = std::move(last_raw);
            out.attempts = attempt;
            return out;
        }
        last_error = *error;
        note = corrective_note(request.output_schema, last_error);
        if (!extra_note.empty()) note = std::string(extra_note) + "\n" + note;
    }
    throw SchemaViolationError("no valid " + std::string(to_string(request.output_schema)) + " reply after " +
                                   std::to_string(max_attempts) + " attempts: " + last_error,
                               last_raw);
}

StructuredOutput complete_structured(const CompletionRequest& request, const ProviderConfig& config) {
    return Gateway(config).complete_structured(request);
}

std::shared_ptr<Provider> make_provider(const ProviderConfig& config) {
    config.validate();
    if (config.provider == ProviderConfig::Kind::mock) return std::make_shared<MockProvider>(config.seed);
    return std::make_shared<RemoteProvider>(config);
}

}  // namespace mindtrail::llm
