#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace evn::gateway {

enum class TemplateId {
    ElicitTurn0,
    ElicitTurnN,
    ProfileFormalize,
    AnchorExtract,
    DirectionGenerate,
    AssumptionBreak,
    TraceBuild,
    NecessityCheck,
    ProposalAssemble,
    BaselineTurn1,
    BaselineTurn2,
    Judge,
};

inline constexpr std::array kAllTemplates = {
    TemplateId::ElicitTurn0,       TemplateId::ElicitTurnN,     TemplateId::ProfileFormalize,
    TemplateId::AnchorExtract,     TemplateId::DirectionGenerate, TemplateId::AssumptionBreak,
    TemplateId::TraceBuild,        TemplateId::NecessityCheck,  TemplateId::ProposalAssemble,
    TemplateId::BaselineTurn1,     TemplateId::BaselineTurn2,   TemplateId::Judge,
};

const char* to_string(TemplateId id);
/// Throws Error{UnknownTemplate}.
TemplateId template_id_from_string(std::string_view name);

enum class Role { System, User, Assistant };
const char* to_string(Role role);

struct Message {
    Role role = Role::User;
    std::string content;

    bool operator==(const Message&) const = default;
};

using Messages = std::vector<Message>;
using Bindings = std::map<std::string, std::string>;

struct PromptTemplate {
    TemplateId id;
    std::string system_text;
    std::string user_text;
    /// Extra user turn appended to an existing conversation (reframing,
    /// direction regeneration); empty when the template has none.
    std::string followup_text;
};

/// Version tag of the embedded prompt assets.
std::string prompt_version();

const PromptTemplate& get_template(TemplateId id);

/// Named auxiliary text fragments shipped with the prompts
/// (e.g. "assumption_break.scored_contract").
const std::string& prompt_fragment(const std::string& name);

/// `{name}` placeholders in order of first appearance. Only identifiers
/// ([a-z_][a-z0-9_]*) count, so literal JSON braces are left alone.
std::vector<std::string> placeholders(std::string_view text);

/// Substitutes every placeholder verbatim. Throws Error{MissingBinding} naming
/// the first unbound placeholder. Unused bindings are ignored.
std::string substitute(std::string_view text, const Bindings& bindings);

/// System message (when the template has one) followed by the user message.
Messages render(TemplateId id, const Bindings& bindings);

/// The template's follow-up turn as a single user message.
Message render_followup(TemplateId id, const Bindings& bindings);

}  // namespace evn::gateway
