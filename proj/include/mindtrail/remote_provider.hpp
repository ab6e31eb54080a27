#pragma once

#include "mindtrail/llm.hpp"

namespace mindtrail::llm {

/// Chat-completion HTTP provider (OpenAI-compatible request/response shape).
/// The key is read from the environment per call and never echoed.
class RemoteProvider : public Provider {
public:
    explicit RemoteProvider(ProviderConfig config);

    std::string complete(const CompletionRequest& request, std::string_view corrective_note,
                         std::stop_token stop) override;

    /// Request body sent to the chat-completion endpoint.
    json build_body(const CompletionRequest& request, std::string_view corrective_note) const;

private:
    ProviderConfig config_;
    std::string origin_;  // scheme://host[:port]
    std::string path_;    // endpoint path
};

}  // namespace mindtrail::llm
