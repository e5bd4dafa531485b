#include "evn/core/types.hpp"

#include <sstream>

#include "evn/core/error.hpp"

namespace evn {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<std::string> Proposal::section_headers() const {
    std::vector<std::string> headers;
    std::istringstream in(markdown);
    std::string line;
    bool in_fence = false;
    while (std::getline(in, line)) {
        const auto t = trim(line);
        if (t.starts_with("```") || t.starts_with("~~~")) {
            in_fence = !in_fence;
            continue;
        }
        if (in_fence || !t.starts_with('#')) continue;
        const auto hashes = t.find_first_not_of('#');
        if (hashes == std::string_view::npos || hashes > 6) continue;
        if (t[hashes] != ' ' && t[hashes] != '\t') continue;
        headers.emplace_back(t);
    }
    return headers;
}

std::vector<std::string> check_operator_config(const OperatorConfig& c) {
    std::vector<std::string> out;
    if (c.elicitation_turns < 1) out.emplace_back("elicitation_turns must be >= 1");
    if (c.assumption_count_range.min < 1 || c.assumption_count_range.min > c.assumption_count_range.max)
        out.emplace_back("assumption_count_range must satisfy 1 <= min <= max");
    if (c.anchor_range.min < 1 || c.anchor_range.min > c.anchor_range.max)
        out.emplace_back("anchor_range must satisfy 1 <= min <= max");
    if (c.k_break < 1) out.emplace_back("k_break must be >= 1");
    if (c.direction_count < 1) out.emplace_back("direction_count must be >= 1");
    return out;
}

SessionState new_session(std::string session_id, TacitInput input, OperatorConfig config, AblationFlags flags) {
    if (trim(input.text).empty()) throw Error(ErrorCode::InvalidArgument, "input text is empty");
    if (auto problems = check_operator_config(config); !problems.empty())
        throw Error(ErrorCode::InvalidArgument, "invalid operator config: " + problems.front(),
                    {{"violations", problems}});
    SessionState s;
    s.session_id = std::move(session_id);
    s.input = std::move(input);
    s.phase = Phase::eliciting(0);
    s.config_snapshot = config;
    s.ablation_flags = std::move(flags);
    return s;
}

const char* to_string(PhaseKind kind) {
    switch (kind) {
        case PhaseKind::Eliciting: return "eliciting";
        case PhaseKind::ProfileReady: return "profile_ready";
        case PhaseKind::AnchorsReady: return "anchors_ready";
        case PhaseKind::DirectionsReady: return "directions_ready";
        case PhaseKind::AssumptionsScored: return "assumptions_scored";
        case PhaseKind::Reframed: return "reframed";
        case PhaseKind::TraceBuilt: return "trace_built";
        case PhaseKind::NecessityChecked: return "necessity_checked";
        case PhaseKind::Assembled: return "assembled";
        case PhaseKind::Failed: return "failed";
    }
    return "unknown";
}

const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::EvnPipeline: return "evn_pipeline";
        case Provenance::PromptBaseline: return "prompt_baseline";
        case Provenance::AblationWithoutE: return "ablation_wo_E";
        case Provenance::AblationWithoutV: return "ablation_wo_V";
        case Provenance::AblationWithoutN: return "ablation_wo_N";
    }
    return "unknown";
}

const char* to_string(AblationFlag flag) {
    switch (flag) {
        case AblationFlag::DisableE: return "disable_E";
        case AblationFlag::DisableV: return "disable_V";
        case AblationFlag::DisableN: return "disable_N";
    }
    return "unknown";
}

const char* to_string(TurnRole role) {
    return role == TurnRole::SystemQuestion ? "system_question" : "user_answer";
}

int populated_slot_count(const SessionArtifacts& a) {
    return int(a.profile.has_value()) + int(a.anchors.has_value()) + int(a.directions.has_value()) +
           int(a.assumptions.has_value()) + int(a.triplet.has_value()) + int(a.trace.has_value()) +
           int(a.necessity.has_value()) + int(a.proposal.has_value());
}

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::IllegalTransition: return "IllegalTransition";
        case ErrorCode::MissingArtifact: return "MissingArtifact";
        case ErrorCode::InvalidArtifact: return "InvalidArtifact";
        case ErrorCode::EmptyAssumptionSet: return "EmptyAssumptionSet";
        case ErrorCode::EmptyAnchorSet: return "EmptyAnchorSet";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::MissingBinding: return "MissingBinding";
        case ErrorCode::UnknownTemplate: return "UnknownTemplate";
        case ErrorCode::TransportError: return "TransportError";
        case ErrorCode::SchemaExhausted: return "SchemaExhausted";
        case ErrorCode::CacheMiss: return "CacheMiss";
        case ErrorCode::ElicitationAborted: return "ElicitationAborted";
        case ErrorCode::NoSurvivingDirection: return "NoSurvivingDirection";
        case ErrorCode::AssumptionCountOutOfRange: return "AssumptionCountOutOfRange";
        case ErrorCode::TraceInvalid: return "TraceInvalid";
        case ErrorCode::MissingSections: return "MissingSections";
        case ErrorCode::FormatError: return "FormatError";
        case ErrorCode::CorpusShapeError: return "CorpusShapeError";
        case ErrorCode::EmptyGroup: return "EmptyGroup";
        case ErrorCode::RaggedRuns: return "RaggedRuns";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::RatingOutOfRange: return "RatingOutOfRange";
        case ErrorCode::UndefinedPair: return "UndefinedPair";
        case ErrorCode::NotFound: return "NotFound";
        case ErrorCode::Conflict: return "Conflict";
        case ErrorCode::StorageFull: return "StorageFull";
        case ErrorCode::CorruptRecord: return "CorruptRecord";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace evn
