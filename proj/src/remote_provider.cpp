#include "mindtrail/remote_provider.hpp"

#include <cstdlib>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "mindtrail/error.hpp"

namespace mindtrail::llm {

RemoteProvider::RemoteProvider(ProviderConfig config) : config_(std::move(config)) {
    const auto scheme_end = config_.base_url.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(ErrorCode::ConfigError, "llm.base_url must include a scheme");
    }
    const auto path_start = config_.base_url.find('/', scheme_end + 3);
    origin_ = config_.base_url.substr(0, path_start);
    std::string prefix = path_start == std::string::npos ? "" : config_.base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    path_ = prefix + "/v1/chat/completions";
}

json RemoteProvider::build_body(const CompletionRequest& request, std::string_view corrective_note) const {
    std::string user = request.instruction + "\n\n" + request.state_xml;
    if (!corrective_note.empty()) user += "\n\n" + std::string(corrective_note);
    return {{"model", config_.model_name},
            {"temperature", request.temperature},
            {"max_tokens", request.max_output_tokens},
            {"messages",
             json::array({{{"role", "system"}, {"content", request.persona_preamble}},
                          {{"role", "user"}, {"content", user}}})}};
}

std::string RemoteProvider::complete(const CompletionRequest& request, std::string_view corrective_note,
                                     std::stop_token stop) {
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
        throw Error(ErrorCode::ProviderAuth, "environment variable " + config_.api_key_env + " is not set");
    }
    httplib::Client client(origin_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    client.set_bearer_token_auth(key);

    std::stop_callback on_stop(stop, [&client] { client.stop(); });
    const auto body = build_body(request, corrective_note).dump();
    auto res = client.Post(path_, body, "application/json");
    if (stop.stop_requested()) throw Error(ErrorCode::Cancelled, "request cancelled");
    if (!res) {
        const auto err = res.error();
        if (err == httplib::Error::Read || err == httplib::Error::Write ||
            err == httplib::Error::ConnectionTimeout) {
            throw Error(ErrorCode::ProviderTimeout, "provider did not answer within the timeout");
        }
        throw Error(ErrorCode::ProviderError, "provider request failed: " + httplib::to_string(err));
    }
    if (res->status == 401 || res->status == 403) {
        throw Error(ErrorCode::ProviderAuth, "provider rejected the API key (HTTP " + std::to_string(res->status) + ")");
    }
    if (res->status == 408 || res->status == 504) {
        throw Error(ErrorCode::ProviderTimeout, "provider timed out (HTTP " + std::to_string(res->status) + ")");
    }
    if (res->status != 200) {
        throw Error(ErrorCode::ProviderError, "provider returned HTTP " + std::to_string(res->status));
    }
    const auto reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty()) {
        throw Error(ErrorCode::ProviderError, "provider reply has no choices");
    }
    const auto& message = reply["choices"][0].value("message", json::object());
    if (!message.contains("content") || !message["content"].is_string()) {
        throw Error(ErrorCode::ProviderError, "provider reply has no message content");
    }
    return message["content"].get<std::string>();
}

}  // namespace mindtrail::llm
