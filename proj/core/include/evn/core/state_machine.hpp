#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "evn/core/types.hpp"

namespace evn {

namespace event {

/// Records a pending system question. Legal only while eliciting and no
/// question is already pending.
struct QuestionAsked {
    std::string text;
};
struct UserAnswered {
    std::string text;
};
struct ProfileFormalized {
    std::optional<ResearcherProfile> profile;
};
struct AnchorsExtracted {
    std::optional<AnchorSet> anchors;
};
struct DirectionsGenerated {
    std::optional<std::vector<CandidateDirection>> directions;
};
struct AssumptionsScored {
    std::optional<std::vector<HiddenAssumption>> assumptions;
};
struct TripletProduced {
    std::optional<BreakingTriplet> triplet;
};
struct TraceProduced {
    std::optional<DerivationTrace> trace;
};
struct ReportProduced {
    std::optional<NecessityReport> report;
};
struct ProposalProduced {
    std::optional<Proposal> proposal;
};
/// Interactive override of the default d* pick; legal in DirectionsReady.
struct DirectionSelected {
    std::string direction_id;
};
struct OperatorFailed {
    std::string reason;
};

}  // namespace event

using PipelineEvent =
    std::variant<event::QuestionAsked, event::UserAnswered, event::ProfileFormalized, event::AnchorsExtracted,
                 event::DirectionsGenerated, event::AssumptionsScored, event::TripletProduced,
                 event::TraceProduced, event::ReportProduced, event::ProposalProduced,
                 event::DirectionSelected, event::OperatorFailed>;

const char* event_name(const PipelineEvent& event);

/// Pure transition function. Returns the successor state or throws
/// Error{IllegalTransition | MissingArtifact | InvalidArtifact}; `state` is
/// never modified.
///
/// Legal table (flags shown where they alter the path):
///   Eliciting(n)      QuestionAsked                  -> Eliciting(n)   (no pending question)
///   Eliciting(n)      UserAnswered   n < budget      -> Eliciting(n+1) (question pending)
///   Eliciting(budget) ProfileFormalized              -> ProfileReady
///   Eliciting(0)      ProfileFormalized  disable_E   -> ProfileReady   (skip "E")
///   ProfileReady      AnchorsExtracted               -> AnchorsReady
///   AnchorsReady      DirectionsGenerated            -> DirectionsReady
///   DirectionsReady   DirectionSelected              -> DirectionsReady
///   DirectionsReady   AssumptionsScored  !disable_V  -> AssumptionsScored
///   AssumptionsScored TripletProduced                -> Reframed
///   Reframed          TraceProduced                  -> TraceBuilt
///   DirectionsReady   TraceProduced      disable_V   -> TraceBuilt     (skip "V")
///   TraceBuilt        ReportProduced     !disable_N  -> NecessityChecked
///   NecessityChecked  ProposalProduced               -> Assembled
///   TraceBuilt        ProposalProduced   disable_N   -> Assembled      (skip "N")
///   any non-terminal  OperatorFailed                 -> Failed(reason)
SessionState advance(const SessionState& state, const PipelineEvent& event);

/// True when `advance(state, event)` would not throw IllegalTransition. Payload
/// checks (MissingArtifact / InvalidArtifact) are not considered.
bool is_legal(const SessionState& state, const PipelineEvent& event);

bool is_terminal(PhaseKind kind);

/// The pending system question, if the transcript ends with one.
std::optional<std::string> pending_question(const SessionState& state);

/// The direction currently marked selected (d*).
const CandidateDirection* selected_direction(const SessionState& state);

}  // namespace evn
