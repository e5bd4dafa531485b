#include "evn/gateway/backend.hpp"

#include <cctype>
#include <fstream>

#include <openssl/evp.h>

#include "evn/core/error.hpp"
#include "evn/gateway/json_extract.hpp"

namespace evn::gateway {

using nlohmann::json;

void to_json(json& j, const Message& v) { j = json{{"role", to_string(v.role)}, {"content", v.content}}; }

void from_json(const json& j, Message& v) {
    const auto role = j.at("role").get<std::string>();
    if (role == "system") {
        v.role = Role::System;
    } else if (role == "assistant") {
        v.role = Role::Assistant;
    } else {
        v.role = Role::User;
    }
    j.at("content").get_to(v.content);
}

void to_json(json& j, const CompletionRecord& v) {
    j = json{{"request_hash", v.request_hash},
             {"template_id", to_string(v.template_id)},
             {"step", v.step},
             {"attempt", v.attempt},
             {"backend", v.backend},
             {"bindings", v.bindings},
             {"rendered_messages", v.rendered_messages},
             {"sampling", v.sampling},
             {"response_text", v.response_text},
             {"token_counts", {{"input", v.token_counts.input}, {"output", v.token_counts.output}}},
             {"timestamp", v.timestamp},
             {"from_cache", v.from_cache}};
}

void from_json(const json& j, CompletionRecord& v) {
    j.at("request_hash").get_to(v.request_hash);
    v.template_id = template_id_from_string(j.at("template_id").get<std::string>());
    v.step = j.value("step", std::string{});
    v.attempt = j.value("attempt", 0);
    v.backend = j.value("backend", std::string{});
    v.bindings = j.value("bindings", Bindings{});
    j.at("rendered_messages").get_to(v.rendered_messages);
    j.at("sampling").get_to(v.sampling);
    j.at("response_text").get_to(v.response_text);
    const auto& tc = j.at("token_counts");
    v.token_counts = {tc.at("input").get<std::int64_t>(), tc.at("output").get<std::int64_t>()};
    v.timestamp = j.value("timestamp", std::string{});
    v.from_cache = j.value("from_cache", false);
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error(ErrorCode::Io, "sha256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

std::string binding_digest(const Bindings& bindings) { return sha256_hex(json(bindings).dump()); }

std::string request_hash(const CompletionRequest& r) {
    const json canonical = {{"template_id", to_string(r.template_id)},
                            {"step", r.step},
                            {"attempt", r.attempt},
                            {"bindings", r.bindings},
                            {"messages", r.messages},
                            {"sampling", r.sampling}};
    return sha256_hex(canonical.dump());
}

std::int64_t estimate_tokens(std::string_view text) {
    std::int64_t n = 0;
    bool in_word = false;
    for (unsigned char c : text) {
        const bool space = std::isspace(c);
        if (!space && !in_word) ++n;
        in_word = !space;
    }
    return n;
}

std::int64_t estimate_tokens(const Messages& messages) {
    std::int64_t n = 0;
    for (const auto& m : messages) n += estimate_tokens(m.content);
    return n;
}

AuditLog::AuditLog(std::string jsonl_path) : path_(std::move(jsonl_path)) {}

void AuditLog::append(const CompletionRecord& record) {
    std::lock_guard lock(mu_);
    records_.push_back(record);
    if (path_) {
        std::ofstream out(*path_, std::ios::app);
        if (!out) throw Error(ErrorCode::Io, "cannot open audit log " + *path_);
        out << safe_dump(json(record)) << '\n';
    }
}

std::vector<CompletionRecord> AuditLog::records() const {
    std::lock_guard lock(mu_);
    return records_;
}

std::size_t AuditLog::size() const {
    std::lock_guard lock(mu_);
    return records_.size();
}

std::vector<CompletionRecord> AuditLog::records_since(std::size_t from) const {
    std::lock_guard lock(mu_);
    if (from >= records_.size()) return {};
    return {records_.begin() + static_cast<std::ptrdiff_t>(from), records_.end()};
}

std::vector<TemplateId> template_sequence(const std::vector<CompletionRecord>& records) {
    std::vector<TemplateId> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.template_id);
    return out;
}

}  // namespace evn::gateway
