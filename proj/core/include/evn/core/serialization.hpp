#pragma once

// Canonical JSON form of the domain types. Field names follow the struct
// members; enums serialize as lower_snake strings. This is the session
// persistence and wire format.

#include <nlohmann/json.hpp>

#include "evn/core/types.hpp"

namespace evn {

void to_json(nlohmann::json& j, const TacitInput& v);
void from_json(const nlohmann::json& j, TacitInput& v);
void to_json(nlohmann::json& j, const DialogueTurn& v);
void from_json(const nlohmann::json& j, DialogueTurn& v);
void to_json(nlohmann::json& j, const ResearchConstraints& v);
void from_json(const nlohmann::json& j, ResearchConstraints& v);
void to_json(nlohmann::json& j, const ResearcherProfile& v);
void from_json(const nlohmann::json& j, ResearcherProfile& v);
void to_json(nlohmann::json& j, const AnchorSet& v);
void from_json(const nlohmann::json& j, AnchorSet& v);
void to_json(nlohmann::json& j, const CandidateDirection& v);
void from_json(const nlohmann::json& j, CandidateDirection& v);
void to_json(nlohmann::json& j, const HiddenAssumption& v);
void from_json(const nlohmann::json& j, HiddenAssumption& v);
void to_json(nlohmann::json& j, const BreakingTriplet& v);
void from_json(const nlohmann::json& j, BreakingTriplet& v);
void to_json(nlohmann::json& j, const DerivationTrace& v);
void from_json(const nlohmann::json& j, DerivationTrace& v);
void to_json(nlohmann::json& j, const CheckResult& v);
void from_json(const nlohmann::json& j, CheckResult& v);
void to_json(nlohmann::json& j, const NecessityReport& v);
void from_json(const nlohmann::json& j, NecessityReport& v);
void to_json(nlohmann::json& j, const Proposal& v);
void from_json(const nlohmann::json& j, Proposal& v);
void to_json(nlohmann::json& j, const OperatorConfig& v);
void from_json(const nlohmann::json& j, OperatorConfig& v);
void to_json(nlohmann::json& j, const Phase& v);
void from_json(const nlohmann::json& j, Phase& v);
void to_json(nlohmann::json& j, const SessionArtifacts& v);
void from_json(const nlohmann::json& j, SessionArtifacts& v);
void to_json(nlohmann::json& j, const SessionState& v);
void from_json(const nlohmann::json& j, SessionState& v);

PhaseKind phase_kind_from_string(const std::string& s);
Provenance provenance_from_string(const std::string& s);
AblationFlag ablation_flag_from_string(const std::string& s);

}  // namespace evn
