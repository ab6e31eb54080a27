#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <stop_token>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace mindtrail::llm {

using json = nlohmann::json;

enum class SchemaId { themes, questions, keywords, comment, summary };

std::string_view to_string(SchemaId id);
std::optional<SchemaId> parse_schema_id(std::string_view s);

struct CompletionRequest {
    std::string persona_preamble;
    std::string instruction;
    std::string state_xml;
    SchemaId output_schema{SchemaId::themes};
    std::string locale{"en"};
    int max_output_tokens{1024};
    double temperature{0.7};
    // How many items the caller wants; 0 means the schema default.
    int expected_count{0};
};

struct ProviderConfig {
    enum class Kind { mock, remote };

    Kind provider{Kind::mock};
    std::string model_name;
    std::string api_key_env;
    std::string base_url{"https://api.openai.com"};
    std::chrono::milliseconds timeout{30000};
    int max_retries{2};
    std::uint64_t seed{7};
    double temperature{0.7};

    /// Throws ConfigError for structurally invalid configs and ProviderAuth
    /// when a remote key variable is unset or empty.
    void validate() const;
};

struct Meta {
    std::string rationale;
    json extra = json::object();
};

struct StructuredOutput {
    json payload;
    Meta meta;
    std::string raw;
    int attempts{0};
};

/// A completion backend. Implementations must be safe for concurrent calls.
class Provider {
public:
    virtual ~Provider() = default;
    virtual std::string complete(const CompletionRequest& request, std::string_view corrective_note,
                                 std::stop_token stop) = 0;
};

// Schema handling.
std::optional<std::string> validate_payload(SchemaId schema, const json& payload);
std::string schema_description(SchemaId schema);
/// Locates the fenced (or bare) JSON object in a model reply.
std::optional<json> extract_structured(std::string_view raw);
std::string corrective_note(SchemaId schema, std::string_view first_error);

/// Provider-agnostic structured completion with bounded repair retries.
class Gateway {
public:
    Gateway(ProviderConfig config, std::shared_ptr<Provider> provider);
    /// Builds the provider described by `config`.
    explicit Gateway(ProviderConfig config);

    /// Calls the provider until the reply parses and validates against the
    /// request schema, at most max_retries + 1 times. Throws
    /// SchemaViolationError carrying the last raw reply when attempts run out.
    StructuredOutput complete_structured(const CompletionRequest& request, std::stop_token stop = {},
                                         std::string_view extra_note = {}) const;

    const ProviderConfig& config() const noexcept { return config_; }
    Provider& provider() const noexcept { return *provider_; }

private:
    ProviderConfig config_;
    std::shared_ptr<Provider> provider_;
};

StructuredOutput complete_structured(const CompletionRequest& request, const ProviderConfig& config);

std::shared_ptr<Provider> make_provider(const ProviderConfig& config);

}  // namespace mindtrail::llm
