#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evn/core/error.hpp"
#include "evn/gateway/backend.hpp"
#include "evn/gateway/schemas.hpp"

namespace evn::gateway {

/// One logical model step. `messages` is the full conversation to send;
/// build it with render() or extend an earlier Exchange's conversation.
struct Call {
    TemplateId template_id = TemplateId::ElicitTurn0;
    std::string step;
    Bindings bindings;
    Messages messages;
    SamplingConfig sampling;
};

/// Builds a Call from a template's first turn, sampled at the template's
/// default temperature.
Call make_call(TemplateId id, Bindings bindings, std::string step = {});

/// Extends a finished conversation with a follow-up user turn.
Call follow_up(const Messages& conversation, TemplateId id, Message turn, Bindings bindings, std::string step,
               SamplingConfig sampling);

struct Exchange {
    std::string text;
    nlohmann::json document;  // null for text completions
    Messages conversation;    // request messages plus the accepted reply
    int attempts = 0;
};

/// Extra checks layered over a schema (or over plain text).
using DocumentCheck = std::function<std::vector<std::string>(const nlohmann::json&)>;
using TextCheck = std::function<std::vector<std::string>(const std::string&)>;

struct StructuredOptions {
    DocumentCheck extra;
    /// Raised instead of SchemaExhausted when the final attempt satisfied the
    /// schema but not `extra`.
    ErrorCode extra_failure = ErrorCode::SchemaExhausted;
    int max_repairs = 2;
};

/// Every model call goes through here: sampling floors are applied, the
/// backend is invoked, and a CompletionRecord is appended to the audit log.
class Gateway {
public:
    explicit Gateway(BackendPtr backend, std::shared_ptr<AuditLog> audit = std::make_shared<AuditLog>());

    /// Single call, no validation.
    std::string invoke(const Call& call, int attempt = 0);

    /// Text completion with up to `max_repairs` repair turns echoing the
    /// violations reported by `check`. Throws Error{failure} after that.
    Exchange complete_checked(const Call& call, const TextCheck& check, int max_repairs, ErrorCode failure);

    /// Extract, schema-check, repair (at most 1 + max_repairs calls). Throws
    /// Error{SchemaExhausted} carrying every attempt.
    Exchange complete_structured(const Call& call, SchemaId schema, const StructuredOptions& options = {});

    [[nodiscard]] const BackendPtr& backend() const { return backend_; }
    [[nodiscard]] const std::shared_ptr<AuditLog>& audit() const { return audit_; }

private:
    BackendPtr backend_;
    std::shared_ptr<AuditLog> audit_;
};

/// Convenience form: render, complete and validate in one call.
nlohmann::json complete_structured(const BackendPtr& backend, TemplateId id, const Bindings& bindings, SchemaId schema,
                                   const SamplingConfig& sampling);

/// "- a\n- b" list used in repair turns.
std::string bullet_list(const std::vector<std::string>& items);

}  // namespace evn::gateway
