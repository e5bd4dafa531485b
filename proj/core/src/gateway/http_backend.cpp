#include "evn/gateway/http_backend.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "evn/core/error.hpp"
#include "evn/gateway/json_extract.hpp"

namespace evn::gateway {

using nlohmann::json;

void to_json(json& j, const HttpBackendConfig& v) {
    j = json{{"endpoint", v.endpoint},           {"model", v.model},
             {"api_key_env", v.api_key_env},     {"timeout_seconds", v.timeout_seconds},
             {"max_attempts", v.max_attempts},   {"backoff_ms", v.backoff_ms}};
}

void from_json(const json& j, HttpBackendConfig& v) {
    HttpBackendConfig d;
    v.endpoint = j.value("endpoint", d.endpoint);
    v.model = j.value("model", d.model);
    v.api_key_env = j.value("api_key_env", d.api_key_env);
    v.timeout_seconds = j.value("timeout_seconds", d.timeout_seconds);
    v.max_attempts = j.value("max_attempts", d.max_attempts);
    v.backoff_ms = j.value("backoff_ms", d.backoff_ms);
}

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    const auto scheme = config_.endpoint.find("://");
    if (scheme == std::string::npos)
        throw Error(ErrorCode::InvalidArgument, "endpoint must be an absolute URL: " + config_.endpoint);
    const auto slash = config_.endpoint.find('/', scheme + 3);
    base_ = config_.endpoint.substr(0, slash);
    path_ = slash == std::string::npos ? "/" : config_.endpoint.substr(slash);
    if (config_.max_attempts < 1) config_.max_attempts = 1;
}

std::string HttpBackend::identifier() const { return "http:" + config_.model; }

json HttpBackend::request_body(const CompletionRequest& request) const {
    json body = {{"model", config_.model},
                 {"messages", request.messages},
                 {"temperature", request.sampling.temperature},
                 {"max_tokens", request.sampling.max_output_tokens}};
    if (request.sampling.seed) body["seed"] = *request.sampling.seed;
    return body;
}

CompletionResponse HttpBackend::complete(const CompletionRequest& request) {
    httplib::Client client(base_);
    client.set_connection_timeout(std::chrono::seconds(config_.timeout_seconds));
    client.set_read_timeout(std::chrono::seconds(config_.timeout_seconds));
    client.set_write_timeout(std::chrono::seconds(config_.timeout_seconds));

    httplib::Headers headers;
    if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key)
        headers.emplace("Authorization", std::string("Bearer ") + key);

    const auto body = safe_dump(request_body(request));
    std::string last_error;
    for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(config_.backoff_ms << (attempt - 1)));

        auto res = client.Post(path_, headers, body, "application/json");
        if (!res) {
            last_error = "connection failed: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw Error(ErrorCode::TransportError, "HTTP " + std::to_string(res->status) + " from " + config_.endpoint,
                        {{"status", res->status}, {"body", res->body.substr(0, 2000)}});

        const auto doc = json::parse(res->body, nullptr, false);
        if (doc.is_discarded() || !doc.contains("choices") || doc["choices"].empty())
            throw Error(ErrorCode::TransportError, "malformed chat-completion response",
                        {{"body", res->body.substr(0, 2000)}});
        CompletionResponse out;
        const auto& message = doc["choices"][0].value("message", json::object());
        out.text = message.value("content", std::string{});
        if (const auto usage = doc.find("usage"); usage != doc.end() && usage->is_object()) {
            out.tokens.input = usage->value("prompt_tokens", std::int64_t{0});
            out.tokens.output = usage->value("completion_tokens", std::int64_t{0});
        } else {
            out.tokens = {estimate_tokens(request.messages), estimate_tokens(out.text)};
        }
        return out;
    }
    throw Error(ErrorCode::TransportError,
                "backend unreachable after " + std::to_string(config_.max_attempts) + " attempts: " + last_error,
                {{"endpoint", config_.endpoint}, {"attempts", config_.max_attempts}});
}

}  // namespace evn::gateway
