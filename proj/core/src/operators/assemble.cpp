#include <algorithm>
#include <cctype>
#include <sstream>

#include "evn/core/error.hpp"
#include "evn/core/serialization.hpp"
#include "evn/operators/operators.hpp"

namespace evn::operators {

using gateway::TemplateId;
using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string header_key(std::string_view header) {
    auto s = trim(header);
    std::size_t i = 0;
    while (i < s.size() && s[i] == '#') ++i;
    std::string out;
    for (char c : trim(std::string_view(s).substr(i))) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
}

bool is_bullet(std::string_view line, std::size_t& body) {
    if (line.starts_with("- ") || line.starts_with("* ") || line.starts_with("+ ")) {
        body = 2;
        return true;
    }
    std::size_t i = 0;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i > 0 && i + 1 < line.size() && (line[i] == '.' || line[i] == ')') && line[i + 1] == ' ') {
        body = i + 2;
        return true;
    }
    return false;
}

Provenance provenance_for(const AblationFlags& flags) {
    if (flags.contains(AblationFlag::DisableE)) return Provenance::AblationWithoutE;
    if (flags.contains(AblationFlag::DisableV)) return Provenance::AblationWithoutV;
    if (flags.contains(AblationFlag::DisableN)) return Provenance::AblationWithoutN;
    return Provenance::EvnPipeline;
}

}  // namespace

MethodDescription describe_method(const DerivationTrace& trace) {
    MethodDescription m{trim(trace.method), {}};
    std::istringstream lines(m.text);
    std::string line;
    while (std::getline(lines, line)) {
        const auto t = trim(line);
        std::size_t body = 0;
        if (is_bullet(t, body)) {
            if (auto item = trim(std::string_view(t).substr(body)); !item.empty()) m.components.push_back(std::move(item));
        }
    }
    if (m.components.empty()) {
        std::string current;
        for (std::size_t i = 0; i < m.text.size(); ++i) {
            current.push_back(m.text[i]);
            const bool end = m.text[i] == '.' || m.text[i] == ';';
            if (end && (i + 1 == m.text.size() || std::isspace(static_cast<unsigned char>(m.text[i + 1])))) {
                if (auto s = trim(current); !s.empty()) m.components.push_back(std::move(s));
                current.clear();
            }
        }
        if (auto s = trim(current); !s.empty()) m.components.push_back(std::move(s));
    }
    return m;
}

void check_necessity(SessionState& session, Gateway& gw) {
    if (session.phase.kind != PhaseKind::TraceBuilt)
        throw Error(ErrorCode::IllegalTransition, "check_necessity requires phase trace_built",
                    {{"phase", to_string(session.phase.kind)}});
    const auto& trace = *session.artifacts.trace;
    const auto method = describe_method(trace);
    auto call = gateway::make_call(TemplateId::NecessityCheck, {{"trace_json", json(trace).dump(2)},
                                                                {"method", method.text},
                                                                {"components", gateway::bullet_list(method.components)}});
    auto reply = gw.complete_structured(call, gateway::SchemaId::NecessityReport);
    session = advance(session, event::ReportProduced{reply.document.get<NecessityReport>()});
}

const std::vector<std::string>& required_proposal_sections() {
    static const std::vector<std::string> v = {"## Problem", "## Broken Assumption", "## Insight", "## Claim",
                                               "## Predictions", "## Constraints", "## Method"};
    return v;
}

const std::vector<std::string>& required_baseline_sections() {
    static const std::vector<std::string> v = {"# LLM Ablation Proposal",
                                               "## Problem",
                                               "## Broken Assumption",
                                               "## Core Insight",
                                               "## Hypothesis and Predictions",
                                               "## Method (High-level)",
                                               "## Experimental Plan",
                                               "## Ablation Matrix",
                                               "## Baselines and Comparisons",
                                               "## Datasets / Tasks",
                                               "## Metrics and Evaluation",
                                               "## Implementation Notes",
                                               "## Risks, Failure Modes, and Diagnostics",
                                               "## Expected Outcomes",
                                               "## Minimal Repro Checklist"};
    return v;
}

std::vector<std::string> missing_sections(const std::string& markdown, const std::vector<std::string>& required) {
    std::vector<std::string> present;
    for (const auto& h : Proposal{markdown, {}}.section_headers()) present.push_back(header_key(h));
    std::vector<std::string> out;
    for (const auto& r : required)
        if (std::find(present.begin(), present.end(), header_key(r)) == present.end())
            out.push_back("missing section header: " + r);
    return out;
}

std::string necessity_context(const NecessityReport& report) {
    return "\nNecessity review report (mandatory context):\n" + json(report).dump(2) +
           "\nVerdict: verdict_closed = " + (report.verdict_closed ? "true" : "false") +
           "\nCritical improvement: " + report.critical_improvement + "\n";
}

void assemble(SessionState& session, Gateway& gw) {
    const bool skip_n = session.ablation_flags.contains(AblationFlag::DisableN);
    const auto want = skip_n ? PhaseKind::TraceBuilt : PhaseKind::NecessityChecked;
    if (session.phase.kind != want)
        throw Error(ErrorCode::IllegalTransition, std::string("assemble requires phase ") + to_string(want),
                    {{"phase", to_string(session.phase.kind)}});

    const auto& art = session.artifacts;
    gateway::Bindings b{{"profile_json", json(*art.profile).dump(2)},
                        {"triplet_json", art.triplet ? json(*art.triplet).dump(2) : std::string("null")},
                        {"trace_json", json(*art.trace).dump(2)},
                        {"necessity_context", art.necessity ? necessity_context(*art.necessity) : std::string{}}};
    const auto check = [](const std::string& text) { return missing_sections(text, required_proposal_sections()); };
    auto reply = gw.complete_checked(gateway::make_call(TemplateId::ProposalAssemble, std::move(b)), check, 1,
                                     ErrorCode::MissingSections);
    session = advance(session, event::ProposalProduced{Proposal{reply.text, provenance_for(session.ablation_flags)}});
}

Proposal run_baseline(const std::string& topic, const std::string& para1, const std::string& para2, Gateway& gw) {
    for (const auto& [name, value] : {std::pair{"topic", &topic}, {"para1", &para1}, {"para2", &para2}})
        if (trim(*value).empty())
            throw Error(ErrorCode::InvalidArgument, std::string("baseline ") + name + " is empty", {{"field", name}});

    auto first = gw.complete_checked(gateway::make_call(TemplateId::BaselineTurn1, {{"topic", topic}, {"para1", para1}}),
                                     {}, 0, ErrorCode::TransportError);
    gateway::Bindings b2{{"para2", para2}};
    auto second_turn = gateway::render(TemplateId::BaselineTurn2, b2);
    auto call = gateway::follow_up(first.conversation, TemplateId::BaselineTurn2, second_turn.back(), b2, {},
                                   gateway::default_sampling(gateway::Step::Baseline));
    const auto check = [](const std::string& text) { return missing_sections(text, required_baseline_sections()); };
    auto reply = gw.complete_checked(call, check, 1, ErrorCode::MissingSections);
    return Proposal{reply.text, Provenance::PromptBaseline};
}

}  // namespace evn::operators
