#pragma once

#include <string>

#include "evn/gateway/backend.hpp"

namespace evn::gateway {

struct HttpBackendConfig {
    /// Full chat-completions URL, e.g. https://host/v1/chat/completions.
    std::string endpoint;
    std::string model;
    /// Environment variable holding the bearer token; unset means no auth header.
    std::string api_key_env = "EVN_API_KEY";
    int timeout_seconds = 120;
    int max_attempts = 3;
    int backoff_ms = 500;
};

void to_json(nlohmann::json& j, const HttpBackendConfig& v);
void from_json(const nlohmann::json& j, HttpBackendConfig& v);

/// Minimal chat-completion client: POSTs {model, messages, temperature,
/// max_tokens[, seed]} and reads choices[0].message.content. Connection
/// failures, 429 and 5xx are retried up to `max_attempts` with exponential
/// backoff before surfacing as Error{TransportError}.
class HttpBackend final : public ModelBackend {
public:
    explicit HttpBackend(HttpBackendConfig config);

    [[nodiscard]] std::string identifier() const override;
    CompletionResponse complete(const CompletionRequest& request) override;

    /// Request body sent for `request` (exposed for inspection and tests).
    [[nodiscard]] nlohmann::json request_body(const CompletionRequest& request) const;

private:
    HttpBackendConfig config_;
    std::string base_;
    std::string path_;
};

}  // namespace evn::gateway
