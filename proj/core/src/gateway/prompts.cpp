#include "evn/gateway/prompts.hpp"

#include <algorithm>
#include <cctype>
#include <mutex>

#include "evn/core/error.hpp"

namespace evn::gateway {

namespace detail {
const char* prompt_asset_version();
const std::map<std::string, std::string>& prompt_assets();
}  // namespace detail

namespace {

std::string asset(const std::string& key) {
    const auto& assets = detail::prompt_assets();
    const auto it = assets.find(key);
    if (it == assets.end()) return {};
    std::string text = it->second;
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    return text;
}

bool ident_start(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }

/// Length of the identifier placeholder starting at text[pos] == '{', or 0.
std::size_t placeholder_length(std::string_view text, std::size_t pos) {
    std::size_t i = pos + 1;
    if (i >= text.size() || !ident_start(text[i])) return 0;
    while (i < text.size() && ident_char(text[i])) ++i;
    if (i >= text.size() || text[i] != '}') return 0;
    return i - pos + 1;
}

}  // namespace

const char* to_string(TemplateId id) {
    switch (id) {
        case TemplateId::ElicitTurn0: return "elicit_turn0";
        case TemplateId::ElicitTurnN: return "elicit_turnN";
        case TemplateId::ProfileFormalize: return "profile_formalize";
        case TemplateId::AnchorExtract: return "anchor_extract";
        case TemplateId::DirectionGenerate: return "direction_generate";
        case TemplateId::AssumptionBreak: return "assumption_break";
        case TemplateId::TraceBuild: return "trace_build";
        case TemplateId::NecessityCheck: return "necessity_check";
        case TemplateId::ProposalAssemble: return "proposal_assemble";
        case TemplateId::BaselineTurn1: return "baseline_turn1";
        case TemplateId::BaselineTurn2: return "baseline_turn2";
        case TemplateId::Judge: return "judge";
    }
    return "unknown";
}

TemplateId template_id_from_string(std::string_view name) {
    for (auto id : kAllTemplates)
        if (name == to_string(id)) return id;
    throw Error(ErrorCode::UnknownTemplate, "unknown template: " + std::string(name),
                {{"template_id", std::string(name)}});
}

const char* to_string(Role role) {
    switch (role) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "user";
}

std::string prompt_version() { return detail::prompt_asset_version(); }

const PromptTemplate& get_template(TemplateId id) {
    static const std::map<TemplateId, PromptTemplate> catalog = [] {
        std::map<TemplateId, PromptTemplate> out;
        for (auto t : kAllTemplates) {
            const std::string stem = to_string(t);
            out.emplace(t, PromptTemplate{t, asset(stem + ".system"), asset(stem + ".user"), asset(stem + ".followup")});
        }
        return out;
    }();
    const auto it = catalog.find(id);
    if (it == catalog.end()) throw Error(ErrorCode::UnknownTemplate, "unknown template id");
    return it->second;
}

const std::string& prompt_fragment(const std::string& name) {
    static std::mutex mu;
    static std::map<std::string, std::string> cache;
    std::lock_guard lock(mu);
    if (const auto it = cache.find(name); it != cache.end()) return it->second;
    if (!detail::prompt_assets().contains(name))
        throw Error(ErrorCode::UnknownTemplate, "unknown prompt fragment: " + name);
    return cache.emplace(name, asset(name)).first->second;
}

std::vector<std::string> placeholders(std::string_view text) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '{') continue;
        if (const auto len = placeholder_length(text, i); len > 0) {
            std::string name(text.substr(i + 1, len - 2));
            if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(std::move(name));
            i += len - 1;
        }
    }
    return names;
}

std::string substitute(std::string_view text, const Bindings& bindings) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        const auto len = text[i] == '{' ? placeholder_length(text, i) : 0;
        if (len == 0) {
            out.push_back(text[i]);
            continue;
        }
        const std::string name(text.substr(i + 1, len - 2));
        const auto it = bindings.find(name);
        if (it == bindings.end())
            throw Error(ErrorCode::MissingBinding, "missing binding: " + name, {{"binding", name}});
        out += it->second;
        i += len - 1;
    }
    return out;
}

Messages render(TemplateId id, const Bindings& bindings) {
    const auto& t = get_template(id);
    // Resolve in order of appearance so the first missing name is reported.
    for (const auto& name : placeholders(t.system_text + "\n" + t.user_text))
        if (!bindings.contains(name))
            throw Error(ErrorCode::MissingBinding, "missing binding: " + name,
                        {{"binding", name}, {"template_id", to_string(id)}});
    Messages out;
    if (!t.system_text.empty()) out.push_back({Role::System, substitute(t.system_text, bindings)});
    out.push_back({Role::User, substitute(t.user_text, bindings)});
    return out;
}

Message render_followup(TemplateId id, const Bindings& bindings) {
    const auto& t = get_template(id);
    if (t.followup_text.empty())
        throw Error(ErrorCode::UnknownTemplate, std::string("template ") + to_string(id) + " has no follow-up turn");
    return {Role::User, substitute(t.followup_text, bindings)};
}

}  // namespace evn::gateway
