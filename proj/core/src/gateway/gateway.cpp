#include "evn/gateway/gateway.hpp"

#include <chrono>
#include <ctime>

#include "evn/gateway/json_extract.hpp"

namespace evn::gateway {

using nlohmann::json;

namespace {

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json attempt_entry(int attempt, const std::string& text, const std::vector<std::string>& violations) {
    return {{"attempt", attempt}, {"response_text", text}, {"violations", violations}};
}

Call repair_call(const Call& base, const Messages& conversation, const std::string& fragment,
                 const std::vector<std::string>& violations) {
    Call next = base;
    next.messages = conversation;
    next.messages.push_back({Role::User, substitute(prompt_fragment(fragment), {{"violations", bullet_list(violations)}})});
    return next;
}

}  // namespace

std::string bullet_list(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& item : items) {
        if (!out.empty()) out += '\n';
        out += "- " + item;
    }
    return out;
}

Call make_call(TemplateId id, Bindings bindings, std::string step) {
    Call call;
    call.template_id = id;
    call.step = std::move(step);
    call.messages = render(id, bindings);
    call.bindings = std::move(bindings);
    call.sampling = default_sampling(default_step(id));
    return call;
}

Call follow_up(const Messages& conversation, TemplateId id, Message turn, Bindings bindings, std::string step,
               SamplingConfig sampling) {
    Call call;
    call.template_id = id;
    call.step = std::move(step);
    call.bindings = std::move(bindings);
    call.messages = conversation;
    call.messages.push_back(std::move(turn));
    call.sampling = sampling;
    return call;
}

Gateway::Gateway(BackendPtr backend, std::shared_ptr<AuditLog> audit)
    : backend_(std::move(backend)), audit_(audit ? std::move(audit) : std::make_shared<AuditLog>()) {}

std::string Gateway::invoke(const Call& call, int attempt) {
    CompletionRequest request{call.template_id, call.step, attempt, call.bindings, call.messages,
                              enforce_floor(call.template_id, call.sampling)};
    if (auto bad = check_sampling(request.sampling); !bad.empty())
        throw Error(ErrorCode::InvalidArgument, "invalid sampling: " + bad.front(), {{"violations", bad}});

    CompletionResponse response;
    try {
        response = backend_->complete(request);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::TransportError) throw;
        json details = e.details();
        if (audit_->path()) details["audit_log"] = *audit_->path();
        throw Error(ErrorCode::TransportError, e.what(), details);
    } catch (const std::exception& e) {
        json details = {{"template_id", to_string(call.template_id)}};
        if (audit_->path()) details["audit_log"] = *audit_->path();
        throw Error(ErrorCode::TransportError, e.what(), details);
    }

    CompletionRecord record;
    record.request_hash = request_hash(request);
    record.template_id = request.template_id;
    record.step = request.step;
    record.attempt = attempt;
    record.backend = backend_->identifier();
    record.bindings = request.bindings;
    record.rendered_messages = request.messages;
    record.sampling = request.sampling;
    record.response_text = response.text;
    record.token_counts = response.tokens;
    record.timestamp = utc_now();
    record.from_cache = response.from_cache;
    audit_->append(record);
    return response.text;
}

Exchange Gateway::complete_checked(const Call& call, const TextCheck& check, int max_repairs, ErrorCode failure) {
    json attempts = json::array();
    Call current = call;
    for (int attempt = 0;; ++attempt) {
        auto text = invoke(current, attempt);
        auto conversation = current.messages;
        conversation.push_back({Role::Assistant, text});
        const auto violations = check ? check(text) : std::vector<std::string>{};
        attempts.push_back(attempt_entry(attempt, text, violations));
        if (violations.empty()) return {std::move(text), nullptr, std::move(conversation), attempt + 1};
        if (attempt >= max_repairs)
            throw Error(failure, std::string(to_string(call.template_id)) + " output rejected: " + violations.front(),
                        {{"template_id", to_string(call.template_id)}, {"violations", violations},
                         {"attempts", attempts}});
        current = repair_call(call, conversation, "repair.sections", violations);
    }
}

Exchange Gateway::complete_structured(const Call& call, SchemaId schema, const StructuredOptions& options) {
    json attempts = json::array();
    Call current = call;
    for (int attempt = 0;; ++attempt) {
        auto text = invoke(current, attempt);
        auto conversation = current.messages;
        conversation.push_back({Role::Assistant, text});

        std::vector<std::string> violations;
        bool schema_ok = false;
        auto doc = extract_json(text);
        if (!doc) {
            violations.emplace_back("no JSON object found in the reply");
        } else {
            violations = check_schema(schema, *doc);
            schema_ok = violations.empty();
            if (schema_ok && options.extra) violations = options.extra(*doc);
        }
        attempts.push_back(attempt_entry(attempt, text, violations));
        if (violations.empty()) return {std::move(text), std::move(*doc), std::move(conversation), attempt + 1};

        if (attempt >= options.max_repairs) {
            const auto code = schema_ok ? options.extra_failure : ErrorCode::SchemaExhausted;
            throw Error(code,
                        std::string(to_string(call.template_id)) + " output failed " + to_string(schema) +
                            " after " + std::to_string(attempt + 1) + " attempts: " + violations.front(),
                        {{"template_id", to_string(call.template_id)},
                         {"schema", to_string(schema)},
                         {"violations", violations},
                         {"attempts", attempts}});
        }
        current = repair_call(call, conversation, "repair.json", violations);
    }
}

json complete_structured(const BackendPtr& backend, TemplateId id, const Bindings& bindings, SchemaId schema,
                         const SamplingConfig& sampling) {
    Gateway gateway(backend);
    auto call = make_call(id, bindings);
    call.sampling = sampling;
    return gateway.complete_structured(call, schema).document;
}

}  // namespace evn::gateway
