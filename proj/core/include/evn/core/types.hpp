#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace evn {

/// Raw, pre-question inspiration supplied by the researcher.
struct TacitInput {
    std::string text;
    std::optional<std::string> domain_hint;
    std::optional<std::string> source_id;

    bool operator==(const TacitInput&) const = default;
};

enum class TurnRole { SystemQuestion, UserAnswer };

struct DialogueTurn {
    TurnRole role = TurnRole::SystemQuestion;
    std::string text;
    std::int64_t turn_index = 0;

    bool operator==(const DialogueTurn&) const = default;
};

struct ResearchConstraints {
    std::string compute;
    std::string timeline;
    std::string other;

    bool operator==(const ResearchConstraints&) const = default;
};

/// Five-dimensional researcher profile: friction points, motivation,
/// constraints, research taste and refined topic.
struct ResearcherProfile {
    std::vector<std::string> friction_points;
    std::string motivation;
    ResearchConstraints constraints;
    std::string research_taste;
    std::string refined_topic;

    bool operator==(const ResearcherProfile&) const = default;
};

struct AnchorSet {
    std::vector<std::string> anchors;

    bool operator==(const AnchorSet&) const = default;
};

struct CandidateDirection {
    std::string id;
    std::string statement;
    bool selected = false;

    bool operator==(const CandidateDirection&) const = default;
};

struct HiddenAssumption {
    std::string text;
    double feasibility = 0.0;
    double novelty = 0.0;

    [[nodiscard]] double product() const { return feasibility * novelty; }
    bool operator==(const HiddenAssumption&) const = default;
};

struct BreakingTriplet {
    HiddenAssumption broken_assumption;
    std::string rationale;
    std::string reframed_direction;

    bool operator==(const BreakingTriplet&) const = default;
};

/// Problem -> Broken Assumption -> Insight -> Claim -> Predictions ->
/// Constraints -> Method, plus two optional closing stages.
struct DerivationTrace {
    std::string problem;
    std::string broken_assumption;
    std::string insight;
    std::string claim;
    std::vector<std::string> predictions;
    std::string constraints;
    std::string method;
    std::optional<std::string> validation;
    std::optional<std::string> impact;

    bool operator==(const DerivationTrace&) const = default;
};

struct CheckResult {
    bool passed = false;
    std::string findings;
    std::optional<std::string> simpler_alternative;

    bool operator==(const CheckResult&) const = default;
};

struct NecessityReport {
    CheckResult necessity;
    CheckResult sufficiency;
    CheckResult counterexample;
    CheckResult anti_inversion;
    CheckResult uniqueness;
    bool verdict_closed = false;
    std::string critical_improvement;

    bool operator==(const NecessityReport&) const = default;
};

enum class Provenance { EvnPipeline, PromptBaseline, AblationWithoutE, AblationWithoutV, AblationWithoutN };

struct Proposal {
    std::string markdown;
    Provenance provenance = Provenance::EvnPipeline;

    /// Trimmed markdown header lines ("# Title", "## Problem", ...) in order.
    [[nodiscard]] std::vector<std::string> section_headers() const;
    bool operator==(const Proposal&) const = default;
};

enum class AblationFlag { DisableE, DisableV, DisableN };
using AblationFlags = std::set<AblationFlag>;

struct Range {
    int min = 0;
    int max = 0;

    bool operator==(const Range&) const = default;
};

/// Operator knobs snapshotted into each session.
struct OperatorConfig {
    int elicitation_turns = 2;
    Range assumption_count_range{3, 5};
    int k_break = 1;
    Range anchor_range{2, 6};
    int direction_count = 3;
    /// Accept the single-shot assumption schema (model picks the assumption)
    /// instead of scoring every assumption and selecting locally.
    bool single_shot_assumptions = false;

    bool operator==(const OperatorConfig&) const = default;
};

/// Returns violated invariants, empty when valid.
std::vector<std::string> check_operator_config(const OperatorConfig& config);

enum class PhaseKind {
    Eliciting,
    ProfileReady,
    AnchorsReady,
    DirectionsReady,
    AssumptionsScored,
    Reframed,
    TraceBuilt,
    NecessityChecked,
    Assembled,
    Failed,
};

struct Phase {
    PhaseKind kind = PhaseKind::Eliciting;
    int turns_completed = 0;  // meaningful for Eliciting
    std::string reason;       // meaningful for Failed

    static Phase eliciting(int turns) { return {PhaseKind::Eliciting, turns, {}}; }
    static Phase of(PhaseKind kind) { return {kind, 0, {}}; }
    static Phase failed(std::string why) { return {PhaseKind::Failed, 0, std::move(why)}; }

    bool operator==(const Phase&) const = default;
};

struct SessionArtifacts {
    std::optional<ResearcherProfile> profile;
    std::optional<AnchorSet> anchors;
    std::optional<std::vector<CandidateDirection>> directions;
    std::optional<std::vector<HiddenAssumption>> assumptions;
    std::optional<BreakingTriplet> triplet;
    std::optional<DerivationTrace> trace;
    std::optional<NecessityReport> necessity;
    std::optional<Proposal> proposal;

    bool operator==(const SessionArtifacts&) const = default;
};

struct SessionState {
    std::string session_id;
    TacitInput input;
    Phase phase;
    std::vector<DialogueTurn> transcript;
    SessionArtifacts artifacts;
    OperatorConfig config_snapshot;
    AblationFlags ablation_flags;
    /// One entry per operator skipped because of an ablation flag ("E", "V", "N").
    std::vector<std::string> skip_log;

    bool operator==(const SessionState&) const = default;
};

SessionState new_session(std::string session_id, TacitInput input, OperatorConfig config,
                         AblationFlags flags = {});

const char* to_string(PhaseKind kind);
const char* to_string(Provenance provenance);
const char* to_string(AblationFlag flag);
const char* to_string(TurnRole role);

/// Number of populated artifact slots, used for monotonicity checks.
int populated_slot_count(const SessionArtifacts& artifacts);

}  // namespace evn
