#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evn/gateway/prompts.hpp"
#include "evn/gateway/sampling.hpp"

namespace evn::gateway {

/// Everything a backend may need for one model call. `step` names sub-steps
/// that share a template (e.g. "reframe", "regenerate", "repair");
/// `attempt` counts repair turns within one logical step.
struct CompletionRequest {
    TemplateId template_id = TemplateId::ElicitTurn0;
    std::string step;
    int attempt = 0;
    Bindings bindings;
    Messages messages;
    SamplingConfig sampling;
};

struct TokenCounts {
    std::int64_t input = 0;
    std::int64_t output = 0;

    bool operator==(const TokenCounts&) const = default;
};

struct CompletionResponse {
    std::string text;
    TokenCounts tokens;
    bool from_cache = false;
};

/// Chat-completion style model. Implementations must be callable from
/// concurrent sessions. Failures surface as Error{TransportError}.
class ModelBackend {
public:
    virtual ~ModelBackend() = default;
    [[nodiscard]] virtual std::string identifier() const = 0;
    virtual CompletionResponse complete(const CompletionRequest& request) = 0;
};

using BackendPtr = std::shared_ptr<ModelBackend>;

struct CompletionRecord {
    std::string request_hash;
    TemplateId template_id = TemplateId::ElicitTurn0;
    std::string step;
    int attempt = 0;
    std::string backend;
    Bindings bindings;
    Messages rendered_messages;
    SamplingConfig sampling;
    std::string response_text;
    TokenCounts token_counts;
    std::string timestamp;
    bool from_cache = false;
};

void to_json(nlohmann::json& j, const Message& v);
void from_json(const nlohmann::json& j, Message& v);
void to_json(nlohmann::json& j, const CompletionRecord& v);
void from_json(const nlohmann::json& j, CompletionRecord& v);

std::string sha256_hex(std::string_view data);

/// Digest of the canonical (key-sorted) JSON form of the bindings; the key
/// mock scripts use to target one specific request.
std::string binding_digest(const Bindings& bindings);

/// Stable digest of template id, step, attempt, bindings, rendered messages
/// and sampling.
std::string request_hash(const CompletionRequest& request);

/// Rough whitespace-token count used when a backend reports no usage.
std::int64_t estimate_tokens(std::string_view text);
std::int64_t estimate_tokens(const Messages& messages);

/// Thread-safe ordered list of completion records, optionally mirrored to a
/// JSON-lines file.
class AuditLog {
public:
    AuditLog() = default;
    explicit AuditLog(std::string jsonl_path);

    void append(const CompletionRecord& record);
    [[nodiscard]] std::vector<CompletionRecord> records() const;
    [[nodiscard]] std::size_t size() const;
    /// Records appended at positions >= `from`.
    [[nodiscard]] std::vector<CompletionRecord> records_since(std::size_t from) const;
    [[nodiscard]] const std::optional<std::string>& path() const { return path_; }

private:
    mutable std::mutex mu_;
    std::vector<CompletionRecord> records_;
    std::optional<std::string> path_;
};

/// Template ids of the records in call order.
std::vector<TemplateId> template_sequence(const std::vector<CompletionRecord>& records);

}  // namespace evn::gateway
