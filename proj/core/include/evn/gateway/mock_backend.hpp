#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evn/gateway/backend.hpp"

namespace evn::gateway {

/// Scripted responses keyed by template id and selector.
///
/// File format: a JSON object mapping template ids to selector maps. A
/// selector is a binding digest (see binding_digest), "@<step>" for a named
/// sub-step such as "@reframe", or "*". Each selector holds an ordered
/// response list consumed one per call; the last entry repeats once the list
/// is exhausted. Entries may be strings or inline JSON values (serialized
/// compactly). Top-level keys starting with '_' are metadata
/// ("_identifier" names the backend).
///
///   {"judge": {"*": [{"novelty": {"score": 4, "reason": "r"}, ...}]},
///    "assumption_break": {"*": ["..."], "@reframe": ["..."]}}
struct MockScript {
    std::string identifier = "mock";
    std::map<std::string, std::map<std::string, std::vector<std::string>>> responses;

    static MockScript from_json(const nlohmann::json& doc);
    static MockScript load(const std::string& path);
};

class MockBackend final : public ModelBackend {
public:
    explicit MockBackend(std::shared_ptr<const MockScript> script);
    explicit MockBackend(MockScript script);

    [[nodiscard]] std::string identifier() const override;
    CompletionResponse complete(const CompletionRequest& request) override;

    /// A new backend over the same script with all cursors rewound.
    [[nodiscard]] std::shared_ptr<MockBackend> fresh() const;

    /// Invoked before each call (tests use it to inject latency or faults).
    void set_call_hook(std::function<void(const CompletionRequest&)> hook);
    [[nodiscard]] std::size_t calls() const { return calls_.load(); }

private:
    std::shared_ptr<const MockScript> script_;
    std::mutex mu_;
    std::map<std::string, std::size_t> cursors_;
    std::function<void(const CompletionRequest&)> hook_;
    std::atomic<std::size_t> calls_{0};
};

}  // namespace evn::gateway
