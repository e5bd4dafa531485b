#include "evn/gateway/cache.hpp"

#include <fstream>

#include "evn/core/error.hpp"
#include "evn/gateway/json_extract.hpp"

namespace evn::gateway {

using nlohmann::json;

CompletionCache::CompletionCache(std::string jsonl_path) : path_(std::move(jsonl_path)) {
    std::ifstream in(*path_);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto doc = json::parse(line, nullptr, false);
        try {
            if (doc.is_discarded()) throw std::runtime_error("unparsable");
            auto record = doc.at("record").get<CompletionRecord>();
            if (doc.at("request_hash").get<std::string>() != record.request_hash ||
                doc.at("checksum").get<std::string>() != sha256_hex(record.response_text))
                throw std::runtime_error("checksum mismatch");
            record.from_cache = true;
            entries_[record.request_hash] = std::move(record);
        } catch (const std::exception&) {
            ++corrupt_;
        }
    }
}

std::optional<CompletionRecord> CompletionCache::lookup(const std::string& request_hash) const {
    std::lock_guard lock(mu_);
    const auto it = entries_.find(request_hash);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void CompletionCache::store(const CompletionRecord& record) {
    std::lock_guard lock(mu_);
    auto& slot = entries_[record.request_hash];
    slot = record;
    slot.from_cache = true;
    if (path_) {
        std::ofstream out(*path_, std::ios::app);
        if (!out) throw Error(ErrorCode::Io, "cannot write cache file " + *path_);
        out << safe_dump(json{{"request_hash", record.request_hash},
                              {"checksum", sha256_hex(record.response_text)},
                              {"record", record}})
            << '\n';
    }
}

std::size_t CompletionCache::size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

CachedBackend::CachedBackend(BackendPtr inner, std::shared_ptr<CompletionCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

std::string CachedBackend::identifier() const { return inner_->identifier(); }

CompletionResponse CachedBackend::complete(const CompletionRequest& request) {
    const auto hash = request_hash(request);
    std::promise<CompletionResponse> promise;
    {
        std::unique_lock lock(mu_);
        if (auto hit = cache_->lookup(hash)) return {hit->response_text, hit->token_counts, true};
        if (const auto it = in_flight_.find(hash); it != in_flight_.end()) {
            auto shared = it->second;
            lock.unlock();
            auto response = shared.get();
            response.from_cache = true;
            return response;
        }
        in_flight_.emplace(hash, promise.get_future().share());
    }

    try {
        auto response = inner_->complete(request);
        CompletionRecord record;
        record.request_hash = hash;
        record.template_id = request.template_id;
        record.step = request.step;
        record.attempt = request.attempt;
        record.backend = inner_->identifier();
        record.bindings = request.bindings;
        record.rendered_messages = request.messages;
        record.sampling = request.sampling;
        record.response_text = response.text;
        record.token_counts = response.tokens;
        cache_->store(record);
        promise.set_value(response);
        std::lock_guard lock(mu_);
        in_flight_.erase(hash);
        return response;
    } catch (...) {
        promise.set_exception(std::current_exception());
        std::lock_guard lock(mu_);
        in_flight_.erase(hash);
        throw;
    }
}

BackendPtr cached(BackendPtr inner, std::shared_ptr<CompletionCache> cache) {
    return std::make_shared<CachedBackend>(std::move(inner), std::move(cache));
}

}  // namespace evn::gateway
