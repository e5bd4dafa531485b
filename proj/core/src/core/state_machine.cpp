#include "evn/core/state_machine.hpp"

#include <algorithm>
#include <set>

#include "evn/core/error.hpp"
#include "evn/core/serialization.hpp"
#include "evn/core/validation.hpp"

namespace evn {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool has(const SessionState& s, AblationFlag f) { return s.ablation_flags.contains(f); }

bool question_pending(const SessionState& s) {
    return !s.transcript.empty() && s.transcript.back().role == TurnRole::SystemQuestion;
}

[[noreturn]] void illegal(const SessionState& s, const PipelineEvent& e) {
    throw Error(ErrorCode::IllegalTransition,
                std::string("event ") + event_name(e) + " is not valid in phase " + to_string(s.phase.kind),
                {{"phase", to_string(s.phase.kind)}, {"event", event_name(e)}});
}

template <typename T>
const T& require(const std::optional<T>& payload, const PipelineEvent& e) {
    if (!payload) throw Error(ErrorCode::MissingArtifact, std::string(event_name(e)) + " carries no payload",
                              {{"event", event_name(e)}});
    return *payload;
}

void reject_if(const std::vector<std::string>& violations, const PipelineEvent& e) {
    if (violations.empty()) return;
    throw Error(ErrorCode::InvalidArtifact, std::string(event_name(e)) + " payload invalid: " + violations.front(),
                {{"event", event_name(e)}, {"violations", violations}});
}

struct Legality {
    const SessionState& s;

    bool operator()(const event::QuestionAsked&) const {
        return s.phase.kind == PhaseKind::Eliciting && !has(s, AblationFlag::DisableE) && !question_pending(s) &&
               s.phase.turns_completed < s.config_snapshot.elicitation_turns;
    }
    bool operator()(const event::UserAnswered&) const {
        return s.phase.kind == PhaseKind::Eliciting && !has(s, AblationFlag::DisableE) && question_pending(s) &&
               s.phase.turns_completed < s.config_snapshot.elicitation_turns;
    }
    bool operator()(const event::ProfileFormalized&) const {
        if (s.phase.kind != PhaseKind::Eliciting) return false;
        if (has(s, AblationFlag::DisableE)) return s.phase.turns_completed == 0;
        return s.phase.turns_completed == s.config_snapshot.elicitation_turns && !question_pending(s);
    }
    bool operator()(const event::AnchorsExtracted&) const { return s.phase.kind == PhaseKind::ProfileReady; }
    bool operator()(const event::DirectionsGenerated&) const { return s.phase.kind == PhaseKind::AnchorsReady; }
    bool operator()(const event::DirectionSelected&) const { return s.phase.kind == PhaseKind::DirectionsReady; }
    bool operator()(const event::AssumptionsScored&) const {
        return s.phase.kind == PhaseKind::DirectionsReady && !has(s, AblationFlag::DisableV);
    }
    bool operator()(const event::TripletProduced&) const { return s.phase.kind == PhaseKind::AssumptionsScored; }
    bool operator()(const event::TraceProduced&) const {
        if (has(s, AblationFlag::DisableV)) return s.phase.kind == PhaseKind::DirectionsReady;
        return s.phase.kind == PhaseKind::Reframed;
    }
    bool operator()(const event::ReportProduced&) const {
        return s.phase.kind == PhaseKind::TraceBuilt && !has(s, AblationFlag::DisableN);
    }
    bool operator()(const event::ProposalProduced&) const {
        if (has(s, AblationFlag::DisableN)) return s.phase.kind == PhaseKind::TraceBuilt;
        return s.phase.kind == PhaseKind::NecessityChecked;
    }
    bool operator()(const event::OperatorFailed&) const { return !is_terminal(s.phase.kind); }
};

}  // namespace

const char* event_name(const PipelineEvent& event) {
    return std::visit(overloaded{
                          [](const event::QuestionAsked&) { return "QuestionAsked"; },
                          [](const event::UserAnswered&) { return "UserAnswered"; },
                          [](const event::ProfileFormalized&) { return "ProfileFormalized"; },
                          [](const event::AnchorsExtracted&) { return "AnchorsExtracted"; },
                          [](const event::DirectionsGenerated&) { return "DirectionsGenerated"; },
                          [](const event::AssumptionsScored&) { return "AssumptionsScored"; },
                          [](const event::TripletProduced&) { return "TripletProduced"; },
                          [](const event::TraceProduced&) { return "TraceProduced"; },
                          [](const event::ReportProduced&) { return "ReportProduced"; },
                          [](const event::ProposalProduced&) { return "ProposalProduced"; },
                          [](const event::DirectionSelected&) { return "DirectionSelected"; },
                          [](const event::OperatorFailed&) { return "OperatorFailed"; },
                      },
                      event);
}

bool is_terminal(PhaseKind kind) { return kind == PhaseKind::Assembled || kind == PhaseKind::Failed; }

bool is_legal(const SessionState& state, const PipelineEvent& event) {
    return std::visit(Legality{state}, event);
}

std::optional<std::string> pending_question(const SessionState& state) {
    if (state.phase.kind != PhaseKind::Eliciting || !question_pending(state)) return std::nullopt;
    return state.transcript.back().text;
}

const CandidateDirection* selected_direction(const SessionState& state) {
    if (!state.artifacts.directions) return nullptr;
    for (const auto& d : *state.artifacts.directions)
        if (d.selected) return &d;
    return nullptr;
}

SessionState advance(const SessionState& state, const PipelineEvent& event) {
    if (!is_legal(state, event)) illegal(state, event);

    SessionState next = state;
    auto& art = next.artifacts;
    const auto turn_index = static_cast<std::int64_t>(next.transcript.size());

    std::visit(
        overloaded{
            [&](const event::QuestionAsked& e) {
                if (e.text.empty()) throw Error(ErrorCode::MissingArtifact, "QuestionAsked carries no text");
                next.transcript.push_back({TurnRole::SystemQuestion, e.text, turn_index});
            },
            [&](const event::UserAnswered& e) {
                next.transcript.push_back({TurnRole::UserAnswer, e.text, turn_index});
                next.phase = Phase::eliciting(state.phase.turns_completed + 1);
            },
            [&](const event::ProfileFormalized& e) {
                const auto& profile = require(e.profile, event);
                if (auto v = validate_profile(nlohmann::json(profile)); !is_valid(v))
                    reject_if(std::get<ValidationFailure>(v).violations, event);
                art.profile = profile;
                if (has(state, AblationFlag::DisableE)) next.skip_log.emplace_back("E");
                next.phase = Phase::of(PhaseKind::ProfileReady);
            },
            [&](const event::AnchorsExtracted& e) {
                const auto& anchors = require(e.anchors, event);
                reject_if(validate_anchor_set(anchors), event);
                art.anchors = anchors;
                next.phase = Phase::of(PhaseKind::AnchorsReady);
            },
            [&](const event::DirectionsGenerated& e) {
                const auto& dirs = require(e.directions, event);
                std::vector<std::string> problems;
                if (dirs.empty()) problems.emplace_back("direction list is empty");
                std::set<std::string> ids;
                for (const auto& d : dirs) {
                    if (d.statement.empty()) problems.push_back("direction " + d.id + " has an empty statement");
                    if (!ids.insert(d.id).second) problems.push_back("duplicate direction id " + d.id);
                }
                if (std::count_if(dirs.begin(), dirs.end(), [](const auto& d) { return d.selected; }) > 1)
                    problems.emplace_back("more than one direction marked selected");
                reject_if(problems, event);
                art.directions = dirs;
                next.phase = Phase::of(PhaseKind::DirectionsReady);
            },
            [&](const event::DirectionSelected& e) {
                auto& dirs = *art.directions;
                const auto it = std::find_if(dirs.begin(), dirs.end(),
                                             [&](const auto& d) { return d.id == e.direction_id; });
                if (it == dirs.end()) reject_if({"unknown direction id " + e.direction_id}, event);
                for (auto& d : dirs) d.selected = d.id == e.direction_id;
            },
            [&](const event::AssumptionsScored& e) {
                const auto& list = require(e.assumptions, event);
                std::vector<std::string> problems;
                if (list.empty()) problems.emplace_back("assumption list is empty");
                for (const auto& a : list)
                    for (auto& p : validate_assumption(a)) problems.push_back(std::move(p));
                reject_if(problems, event);
                art.assumptions = list;
                next.phase = Phase::of(PhaseKind::AssumptionsScored);
            },
            [&](const event::TripletProduced& e) {
                const auto& t = require(e.triplet, event);
                std::vector<std::string> problems;
                if (t.rationale.empty()) problems.emplace_back("rationale empty");
                if (t.reframed_direction.empty()) problems.emplace_back("reframed_direction empty");
                const auto& list = *art.assumptions;
                if (std::find(list.begin(), list.end(), t.broken_assumption) == list.end())
                    problems.emplace_back("broken_assumption is not one of the scored assumptions");
                reject_if(problems, event);
                art.triplet = t;
                next.phase = Phase::of(PhaseKind::Reframed);
            },
            [&](const event::TraceProduced& e) {
                const auto& t = require(e.trace, event);
                std::optional<std::string> expected;
                if (art.triplet) expected = art.triplet->broken_assumption.text;
                reject_if(validate_trace(t, expected), event);
                art.trace = t;
                if (has(state, AblationFlag::DisableV)) next.skip_log.emplace_back("V");
                next.phase = Phase::of(PhaseKind::TraceBuilt);
            },
            [&](const event::ReportProduced& e) {
                const auto& r = require(e.report, event);
                reject_if(validate_necessity_report(r), event);
                art.necessity = r;
                next.phase = Phase::of(PhaseKind::NecessityChecked);
            },
            [&](const event::ProposalProduced& e) {
                const auto& p = require(e.proposal, event);
                if (p.markdown.empty()) reject_if({"proposal markdown empty"}, event);
                art.proposal = p;
                if (has(state, AblationFlag::DisableN)) next.skip_log.emplace_back("N");
                next.phase = Phase::of(PhaseKind::Assembled);
            },
            [&](const event::OperatorFailed& e) { next.phase = Phase::failed(e.reason); },
        },
        event);
    return next;
}

}  // namespace evn
