#include "evn/gateway/mock_backend.hpp"

#include <fstream>

#include "evn/core/error.hpp"

namespace evn::gateway {

using nlohmann::json;

MockScript MockScript::from_json(const json& doc) {
    if (!doc.is_object()) throw Error(ErrorCode::FormatError, "mock script must be a JSON object");
    MockScript script;
    for (const auto& [key, value] : doc.items()) {
        if (key.starts_with('_')) {
            if (key == "_identifier" && value.is_string()) script.identifier = value.get<std::string>();
            continue;
        }
        template_id_from_string(key);  // rejects unknown ids
        if (!value.is_object()) throw Error(ErrorCode::FormatError, "mock entry for " + key + " must be an object");
        auto& selectors = script.responses[key];
        for (const auto& [selector, list] : value.items()) {
            if (!list.is_array() || list.empty())
                throw Error(ErrorCode::FormatError,
                            "mock responses for " + key + "/" + selector + " must be a non-empty array");
            auto& out = selectors[selector];
            for (const auto& r : list) out.push_back(r.is_string() ? r.get<std::string>() : r.dump());
        }
    }
    return script;
}

MockScript MockScript::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open mock script " + path, {{"path", path}});
    auto doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw Error(ErrorCode::FormatError, "mock script is not valid JSON: " + path);
    return from_json(doc);
}

MockBackend::MockBackend(std::shared_ptr<const MockScript> script) : script_(std::move(script)) {}

MockBackend::MockBackend(MockScript script) : script_(std::make_shared<const MockScript>(std::move(script))) {}

std::string MockBackend::identifier() const { return script_->identifier; }

std::shared_ptr<MockBackend> MockBackend::fresh() const { return std::make_shared<MockBackend>(script_); }

void MockBackend::set_call_hook(std::function<void(const CompletionRequest&)> hook) {
    std::lock_guard lock(mu_);
    hook_ = std::move(hook);
}

CompletionResponse MockBackend::complete(const CompletionRequest& request) {
    std::function<void(const CompletionRequest&)> hook;
    {
        std::lock_guard lock(mu_);
        hook = hook_;
    }
    if (hook) hook(request);
    ++calls_;

    const std::string tid = to_string(request.template_id);
    const auto t = script_->responses.find(tid);
    if (t == script_->responses.end())
        throw Error(ErrorCode::TransportError, "mock script has no responses for " + tid, {{"template_id", tid}});

    const auto& selectors = t->second;
    const std::vector<std::string>* list = nullptr;
    std::string selector;
    for (const auto& candidate :
         {binding_digest(request.bindings), request.step.empty() ? std::string{} : "@" + request.step,
          std::string("*")}) {
        if (candidate.empty()) continue;
        if (const auto it = selectors.find(candidate); it != selectors.end()) {
            list = &it->second;
            selector = candidate;
            break;
        }
    }
    if (!list)
        throw Error(ErrorCode::TransportError, "mock script has no matching selector for " + tid,
                    {{"template_id", tid}, {"step", request.step}});

    std::size_t index = 0;
    {
        std::lock_guard lock(mu_);
        index = cursors_[tid + "|" + selector]++;
    }
    CompletionResponse out;
    out.text = (*list)[std::min(index, list->size() - 1)];
    out.tokens = {estimate_tokens(request.messages), estimate_tokens(out.text)};
    return out;
}

}  // namespace evn::gateway
