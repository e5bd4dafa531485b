#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "evn/evalkit/bench.hpp"
#include "evn/gateway/mock_backend.hpp"

namespace evn::testing {

inline std::string fixture(const std::string& name) { return std::string(EVN_FIXTURE_DIR) + "/" + name; }

inline nlohmann::json fixture_json(const std::string& name) {
    std::ifstream in(fixture(name));
    return nlohmann::json::parse(in);
}

inline std::shared_ptr<const gateway::MockScript> shipped_script() {
    static const auto script = std::make_shared<const gateway::MockScript>(gateway::MockScript::load(fixture("mock_script.json")));
    return script;
}

inline std::shared_ptr<gateway::MockBackend> shipped_mock() { return std::make_shared<gateway::MockBackend>(shipped_script()); }

/// The shipped script with some template entries replaced.
inline std::shared_ptr<gateway::MockBackend> mock_with(const nlohmann::json& overrides) {
    auto doc = fixture_json("mock_script.json");
    for (const auto& [k, v] : overrides.items()) doc[k] = v;
    return std::make_shared<gateway::MockBackend>(gateway::MockScript::from_json(doc));
}

/// Replies from a fixed list (last one repeats) and records every request.
class ListBackend final : public gateway::ModelBackend {
public:
    explicit ListBackend(std::vector<std::string> replies, std::string id = "list")
        : replies_(std::move(replies)), id_(std::move(id)) {}
    [[nodiscard]] std::string identifier() const override { return id_; }
    gateway::CompletionResponse complete(const gateway::CompletionRequest& request) override {
        std::lock_guard lock(mu_);
        requests_.push_back(request);
        const auto i = std::min(requests_.size() - 1, replies_.size() - 1);
        return {replies_[i], {1, 1}, false};
    }
    [[nodiscard]] std::vector<gateway::CompletionRequest> requests() const {
        std::lock_guard lock(mu_);
        return requests_;
    }

private:
    std::vector<std::string> replies_;
    std::string id_;
    mutable std::mutex mu_;
    std::vector<gateway::CompletionRequest> requests_;
};

/// Synthetic declared-complete corpus: 4 domains x (10 related + 3 unrelated).
inline nlohmann::json complete_bench_doc() {
    nlohmann::json items = nlohmann::json::array();
    for (auto d : evalkit::kAllDomains) {
        for (auto [a, n] : {std::pair{evalkit::Ambiguity::Related, evalkit::kRelatedPerDomain},
                            {evalkit::Ambiguity::Unrelated, evalkit::kUnrelatedPerDomain}}) {
            for (int i = 0; i < n; ++i) {
                const std::string id = std::string(evalkit::to_string(d)) + "-" + evalkit::to_string(a) + "-" +
                                       std::to_string(i);
                items.push_back({{"item_id", id},
                                 {"domain", evalkit::to_string(d)},
                                 {"ambiguity", evalkit::to_string(a)},
                                 {"paragraph1", "first paragraph of " + id},
                                 {"paragraph2", "second paragraph of " + id}});
            }
        }
    }
    return {{"complete", true}, {"items", items}};
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Unique scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("evn-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const { return path_; }
    [[nodiscard]] std::string str() const { return path_.string(); }

private:
    std::filesystem::path path_;
};

}  // namespace evn::testing
