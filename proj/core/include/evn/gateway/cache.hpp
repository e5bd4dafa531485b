#pragma once

#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "evn/gateway/backend.hpp"

namespace evn::gateway {

/// request_hash -> CompletionRecord, optionally persisted as JSON lines.
/// Each line carries a checksum of the response; lines that fail to parse or
/// verify are dropped at load time and count as misses.
class CompletionCache {
public:
    CompletionCache() = default;
    explicit CompletionCache(std::string jsonl_path);

    [[nodiscard]] std::optional<CompletionRecord> lookup(const std::string& request_hash) const;
    void store(const CompletionRecord& record);

    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] std::size_t corrupt_entries() const { return corrupt_; }

private:
    mutable std::mutex mu_;
    std::map<std::string, CompletionRecord> entries_;
    std::optional<std::string> path_;
    std::size_t corrupt_ = 0;
};

/// Read-through wrapper: identical request hashes are served from the cache
/// without calling the inner backend. Concurrent identical requests share a
/// single inner call.
class CachedBackend final : public ModelBackend {
public:
    CachedBackend(BackendPtr inner, std::shared_ptr<CompletionCache> cache);

    [[nodiscard]] std::string identifier() const override;
    CompletionResponse complete(const CompletionRequest& request) override;

private:
    BackendPtr inner_;
    std::shared_ptr<CompletionCache> cache_;
    std::mutex mu_;
    std::map<std::string, std::shared_future<CompletionResponse>> in_flight_;
};

BackendPtr cached(BackendPtr inner, std::shared_ptr<CompletionCache> cache);

}  // namespace evn::gateway
