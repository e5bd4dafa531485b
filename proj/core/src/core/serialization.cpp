#include "evn/core/serialization.hpp"

#include <array>
#include <utility>

#include "evn/core/error.hpp"

namespace evn {

using nlohmann::json;

namespace {

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
    j[key] = v ? json(*v) : json(nullptr);
}

template <typename T>
void get_optional(const json& j, const char* key, std::optional<T>& v) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        v.reset();
    } else {
        v = it->get<T>();
    }
}

constexpr std::array kPhaseKinds = {
    PhaseKind::Eliciting,  PhaseKind::ProfileReady, PhaseKind::AnchorsReady,     PhaseKind::DirectionsReady,
    PhaseKind::AssumptionsScored, PhaseKind::Reframed, PhaseKind::TraceBuilt, PhaseKind::NecessityChecked,
    PhaseKind::Assembled,  PhaseKind::Failed};

constexpr std::array kProvenances = {Provenance::EvnPipeline, Provenance::PromptBaseline,
                                     Provenance::AblationWithoutE, Provenance::AblationWithoutV,
                                     Provenance::AblationWithoutN};

constexpr std::array kFlags = {AblationFlag::DisableE, AblationFlag::DisableV, AblationFlag::DisableN};

template <typename Enum, std::size_t N>
Enum enum_from_string(const std::array<Enum, N>& values, const std::string& s, const char* what) {
    for (auto v : values)
        if (s == to_string(v)) return v;
    throw Error(ErrorCode::FormatError, std::string("unknown ") + what + ": " + s);
}

}  // namespace

PhaseKind phase_kind_from_string(const std::string& s) { return enum_from_string(kPhaseKinds, s, "phase"); }
Provenance provenance_from_string(const std::string& s) { return enum_from_string(kProvenances, s, "provenance"); }
AblationFlag ablation_flag_from_string(const std::string& s) { return enum_from_string(kFlags, s, "ablation flag"); }

void to_json(json& j, const TacitInput& v) {
    j = json{{"text", v.text}};
    put_optional(j, "domain_hint", v.domain_hint);
    put_optional(j, "source_id", v.source_id);
}
void from_json(const json& j, TacitInput& v) {
    j.at("text").get_to(v.text);
    get_optional(j, "domain_hint", v.domain_hint);
    get_optional(j, "source_id", v.source_id);
}

void to_json(json& j, const DialogueTurn& v) {
    j = json{{"role", to_string(v.role)}, {"text", v.text}, {"turn_index", v.turn_index}};
}
void from_json(const json& j, DialogueTurn& v) {
    const auto role = j.at("role").get<std::string>();
    if (role == "system_question") {
        v.role = TurnRole::SystemQuestion;
    } else if (role == "user_answer") {
        v.role = TurnRole::UserAnswer;
    } else {
        throw Error(ErrorCode::FormatError, "unknown turn role: " + role);
    }
    j.at("text").get_to(v.text);
    j.at("turn_index").get_to(v.turn_index);
}

void to_json(json& j, const ResearchConstraints& v) {
    j = json{{"compute", v.compute}, {"timeline", v.timeline}, {"other", v.other}};
}
void from_json(const json& j, ResearchConstraints& v) {
    j.at("compute").get_to(v.compute);
    j.at("timeline").get_to(v.timeline);
    j.at("other").get_to(v.other);
}

void to_json(json& j, const ResearcherProfile& v) {
    j = json{{"friction_points", v.friction_points},
             {"motivation", v.motivation},
             {"constraints", v.constraints},
             {"research_taste", v.research_taste},
             {"refined_topic", v.refined_topic}};
}
void from_json(const json& j, ResearcherProfile& v) {
    j.at("friction_points").get_to(v.friction_points);
    j.at("motivation").get_to(v.motivation);
    j.at("constraints").get_to(v.constraints);
    j.at("research_taste").get_to(v.research_taste);
    j.at("refined_topic").get_to(v.refined_topic);
}

void to_json(json& j, const AnchorSet& v) { j = json{{"anchors", v.anchors}}; }
void from_json(const json& j, AnchorSet& v) { j.at("anchors").get_to(v.anchors); }

void to_json(json& j, const CandidateDirection& v) {
    j = json{{"id", v.id}, {"statement", v.statement}, {"selected", v.selected}};
}
void from_json(const json& j, CandidateDirection& v) {
    j.at("id").get_to(v.id);
    j.at("statement").get_to(v.statement);
    v.selected = j.value("selected", false);
}

void to_json(json& j, const HiddenAssumption& v) {
    j = json{{"text", v.text}, {"feasibility", v.feasibility}, {"novelty", v.novelty}};
}
void from_json(const json& j, HiddenAssumption& v) {
    j.at("text").get_to(v.text);
    j.at("feasibility").get_to(v.feasibility);
    j.at("novelty").get_to(v.novelty);
}

void to_json(json& j, const BreakingTriplet& v) {
    j = json{{"broken_assumption", v.broken_assumption},
             {"rationale", v.rationale},
             {"reframed_direction", v.reframed_direction}};
}
void from_json(const json& j, BreakingTriplet& v) {
    j.at("broken_assumption").get_to(v.broken_assumption);
    j.at("rationale").get_to(v.rationale);
    j.at("reframed_direction").get_to(v.reframed_direction);
}

void to_json(json& j, const DerivationTrace& v) {
    j = json{{"problem", v.problem},         {"broken_assumption", v.broken_assumption},
             {"insight", v.insight},         {"claim", v.claim},
             {"predictions", v.predictions}, {"constraints", v.constraints},
             {"method", v.method}};
    put_optional(j, "validation", v.validation);
    put_optional(j, "impact", v.impact);
}
void from_json(const json& j, DerivationTrace& v) {
    j.at("problem").get_to(v.problem);
    j.at("broken_assumption").get_to(v.broken_assumption);
    j.at("insight").get_to(v.insight);
    j.at("claim").get_to(v.claim);
    j.at("predictions").get_to(v.predictions);
    j.at("constraints").get_to(v.constraints);
    j.at("method").get_to(v.method);
    get_optional(j, "validation", v.validation);
    get_optional(j, "impact", v.impact);
}

void to_json(json& j, const CheckResult& v) {
    j = json{{"passed", v.passed}, {"findings", v.findings}};
    put_optional(j, "simpler_alternative", v.simpler_alternative);
}
void from_json(const json& j, CheckResult& v) {
    j.at("passed").get_to(v.passed);
    j.at("findings").get_to(v.findings);
    get_optional(j, "simpler_alternative", v.simpler_alternative);
}

void to_json(json& j, const NecessityReport& v) {
    j = json{{"necessity", v.necessity},
             {"sufficiency", v.sufficiency},
             {"counterexample", v.counterexample},
             {"anti_inversion", v.anti_inversion},
             {"uniqueness", v.uniqueness},
             {"verdict_closed", v.verdict_closed},
             {"critical_improvement", v.critical_improvement}};
}
void from_json(const json& j, NecessityReport& v) {
    j.at("necessity").get_to(v.necessity);
    j.at("sufficiency").get_to(v.sufficiency);
    j.at("counterexample").get_to(v.counterexample);
    j.at("anti_inversion").get_to(v.anti_inversion);
    j.at("uniqueness").get_to(v.uniqueness);
    j.at("verdict_closed").get_to(v.verdict_closed);
    j.at("critical_improvement").get_to(v.critical_improvement);
}

void to_json(json& j, const Proposal& v) {
    j = json{{"markdown", v.markdown}, {"section_headers", v.section_headers()}, {"provenance", to_string(v.provenance)}};
}
void from_json(const json& j, Proposal& v) {
    j.at("markdown").get_to(v.markdown);
    v.provenance = provenance_from_string(j.at("provenance").get<std::string>());
}

void to_json(json& j, const OperatorConfig& v) {
    j = json{{"elicitation_turns", v.elicitation_turns},
             {"assumption_count_range", {{"min", v.assumption_count_range.min}, {"max", v.assumption_count_range.max}}},
             {"k_break", v.k_break},
             {"anchor_range", {{"min", v.anchor_range.min}, {"max", v.anchor_range.max}}},
             {"direction_count", v.direction_count},
             {"single_shot_assumptions", v.single_shot_assumptions}};
}
void from_json(const json& j, OperatorConfig& v) {
    // Partial documents act as overrides on the defaults.
    OperatorConfig d;
    v.elicitation_turns = j.value("elicitation_turns", d.elicitation_turns);
    if (const auto it = j.find("assumption_count_range"); it != j.end()) {
        v.assumption_count_range = {it->value("min", d.assumption_count_range.min),
                                    it->value("max", d.assumption_count_range.max)};
    } else {
        v.assumption_count_range = d.assumption_count_range;
    }
    v.k_break = j.value("k_break", d.k_break);
    if (const auto it = j.find("anchor_range"); it != j.end()) {
        v.anchor_range = {it->value("min", d.anchor_range.min), it->value("max", d.anchor_range.max)};
    } else {
        v.anchor_range = d.anchor_range;
    }
    v.direction_count = j.value("direction_count", d.direction_count);
    v.single_shot_assumptions = j.value("single_shot_assumptions", d.single_shot_assumptions);
}

void to_json(json& j, const Phase& v) {
    j = json{{"kind", to_string(v.kind)}};
    if (v.kind == PhaseKind::Eliciting) j["turns_completed"] = v.turns_completed;
    if (v.kind == PhaseKind::Failed) j["reason"] = v.reason;
}
void from_json(const json& j, Phase& v) {
    v.kind = phase_kind_from_string(j.at("kind").get<std::string>());
    v.turns_completed = v.kind == PhaseKind::Eliciting ? j.at("turns_completed").get<int>() : 0;
    v.reason = v.kind == PhaseKind::Failed ? j.at("reason").get<std::string>() : std::string{};
}

void to_json(json& j, const SessionArtifacts& v) {
    j = json::object();
    put_optional(j, "profile", v.profile);
    put_optional(j, "anchors", v.anchors);
    put_optional(j, "directions", v.directions);
    put_optional(j, "assumptions", v.assumptions);
    put_optional(j, "triplet", v.triplet);
    put_optional(j, "trace", v.trace);
    put_optional(j, "necessity", v.necessity);
    put_optional(j, "proposal", v.proposal);
}
void from_json(const json& j, SessionArtifacts& v) {
    get_optional(j, "profile", v.profile);
    get_optional(j, "anchors", v.anchors);
    get_optional(j, "directions", v.directions);
    get_optional(j, "assumptions", v.assumptions);
    get_optional(j, "triplet", v.triplet);
    get_optional(j, "trace", v.trace);
    get_optional(j, "necessity", v.necessity);
    get_optional(j, "proposal", v.proposal);
}

void to_json(json& j, const SessionState& v) {
    json flags = json::array();
    for (auto f : v.ablation_flags) flags.push_back(to_string(f));
    j = json{{"session_id", v.session_id},
             {"input", v.input},
             {"phase", v.phase},
             {"transcript", v.transcript},
             {"artifacts", v.artifacts},
             {"config_snapshot", v.config_snapshot},
             {"ablation_flags", std::move(flags)},
             {"skip_log", v.skip_log}};
}
void from_json(const json& j, SessionState& v) {
    j.at("session_id").get_to(v.session_id);
    j.at("input").get_to(v.input);
    j.at("phase").get_to(v.phase);
    j.at("transcript").get_to(v.transcript);
    j.at("artifacts").get_to(v.artifacts);
    j.at("config_snapshot").get_to(v.config_snapshot);
    v.ablation_flags.clear();
    for (const auto& f : j.at("ablation_flags")) v.ablation_flags.insert(ablation_flag_from_string(f.get<std::string>()));
    v.skip_log = j.value("skip_log", std::vector<std::string>{});
}

}  // namespace evn
