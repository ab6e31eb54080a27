#include "mindtrail/error.hpp"

namespace mindtrail {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::EmptyNarrative: return "EmptyNarrative";
        case ErrorCode::DuplicateTheme: return "DuplicateTheme";
        case ErrorCode::UnknownSession: return "UnknownSession";
        case ErrorCode::UnknownTheme: return "UnknownTheme";
        case ErrorCode::UnknownQuestion: return "UnknownQuestion";
        case ErrorCode::UnknownEventKind: return "UnknownEventKind";
        case ErrorCode::OutOfRangeItem: return "OutOfRangeItem";
        case ErrorCode::StaleVersion: return "StaleVersion";
        case ErrorCode::InvalidRequest: return "InvalidRequest";
        case ErrorCode::ProviderTimeout: return "ProviderTimeout";
        case ErrorCode::ProviderAuth: return "ProviderAuth";
        case ErrorCode::ProviderError: return "ProviderError";
        case ErrorCode::Cancelled: return "Cancelled";
        case ErrorCode::SchemaViolation: return "SchemaViolation";
        case ErrorCode::NoValidSuggestions: return "NoValidSuggestions";
        case ErrorCode::MalformedStateXml: return "MalformedStateXml";
        case ErrorCode::InsufficientRows: return "InsufficientRows";
        case ErrorCode::StorageCorrupt: return "StorageCorrupt";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::ScriptError: return "ScriptError";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::PortInUse: return "PortInUse";
        case ErrorCode::Unauthorized: return "Unauthorized";
        case ErrorCode::NotFound: return "NotFound";
    }
    return "Unknown";
}

int http_status_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::UnknownSession:
        case ErrorCode::UnknownTheme:
        case ErrorCode::UnknownQuestion:
        case ErrorCode::NotFound:
            return 404;
        case ErrorCode::DuplicateTheme:
        case ErrorCode::StaleVersion:
            return 409;
        case ErrorCode::EmptyNarrative:
        case ErrorCode::OutOfRangeItem:
        case ErrorCode::UnknownEventKind:
        case ErrorCode::InvalidRequest:
            return 422;
        case ErrorCode::ProviderTimeout:
        case ErrorCode::ProviderAuth:
        case ErrorCode::ProviderError:
        case ErrorCode::NoValidSuggestions:
            return 502;
        case ErrorCode::ParseError:
            return 400;
        case ErrorCode::Unauthorized:
            return 401;
        case ErrorCode::Cancelled:
            return 499;
        default:
            return 500;
    }
}

}  // namespace mindtrail
