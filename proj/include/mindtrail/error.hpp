#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mindtrail {

// Closed error vocabulary shared by the library, the HTTP API and the CLI.
enum class ErrorCode {
    EmptyNarrative,
    DuplicateTheme,
    UnknownSession,
    UnknownTheme,
    UnknownQuestion,
    UnknownEventKind,
    OutOfRangeItem,
    StaleVersion,
    InvalidRequest,
    ProviderTimeout,
    ProviderAuth,
    ProviderError,
    Cancelled,
    SchemaViolation,
    NoValidSuggestions,
    MalformedStateXml,
    InsufficientRows,
    StorageCorrupt,
    ConfigError,
    ScriptError,
    ParseError,
    PortInUse,
    Unauthorized,
    NotFound,
};

std::string_view error_code_name(ErrorCode code);
int http_status_for(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Raised by the gateway once every attempt produced an invalid payload.
class SchemaViolationError : public Error {
public:
    SchemaViolationError(const std::string& message, std::string last_raw)
        : Error(ErrorCode::SchemaViolation, message), last_raw_(std::move(last_raw)) {}

    const std::string& last_raw() const noexcept { return last_raw_; }

private:
    std::string last_raw_;
};

}  // namespace mindtrail
