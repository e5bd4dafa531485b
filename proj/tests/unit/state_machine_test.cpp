#include <random>

#include <gtest/gtest.h>

#include "evn/core/error.hpp"
#include "evn/core/state_machine.hpp"

namespace evn {
namespace {

ResearcherProfile profile() {
    return {{"late fusion loses cross-modal signal"}, "earlier warning", {"1 GPU", "3 months", ""}, "mechanistic",
            "multimodal prognosis"};
}

HiddenAssumption assumption(std::string text, double f, double n) { return {std::move(text), f, n}; }

DerivationTrace trace_for(const std::string& broken) {
    return {"problem", broken, "insight", "claim", {"p1", "p2"}, "constraints", "- step one\n- step two", {}, {}};
}

NecessityReport report() {
    CheckResult ok{true, "fine", {}};
    return {ok, ok, {false, "fails on cohort B", {}}, ok, ok, false, "add a control cohort"};
}

SessionState fresh(AblationFlags flags = {}) {
    return new_session("s1", {"idea", "oncology", {}}, OperatorConfig{}, std::move(flags));
}

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an Error";
    return ErrorCode::Io;
}

SessionState elicited(SessionState s) {
    for (int i = 0; i < s.config_snapshot.elicitation_turns; ++i) {
        s = advance(s, event::QuestionAsked{"q" + std::to_string(i)});
        s = advance(s, event::UserAnswered{"a" + std::to_string(i)});
    }
    return advance(s, event::ProfileFormalized{profile()});
}

SessionState through_directions(SessionState s) {
    s = advance(s, event::AnchorsExtracted{AnchorSet{{"fusion", "prognosis"}}});
    return advance(s, event::DirectionsGenerated{std::vector<CandidateDirection>{{"d1", "fusion for prognosis", true}}});
}

TEST(StateMachine, FullPathReachesAssembledWithEmptySkipLog) {
    auto s = through_directions(elicited(fresh()));
    const auto a = assumption("fixed depth", 0.5, 0.5);
    s = advance(s, event::AssumptionsScored{std::vector<HiddenAssumption>{a}});
    EXPECT_EQ(s.phase.kind, PhaseKind::AssumptionsScored);
    s = advance(s, event::TripletProduced{BreakingTriplet{a, "why", "reframed"}});
    s = advance(s, event::TraceProduced{trace_for("fixed depth")});
    s = advance(s, event::ReportProduced{report()});
    s = advance(s, event::ProposalProduced{Proposal{"# T", Provenance::EvnPipeline}});
    EXPECT_EQ(s.phase.kind, PhaseKind::Assembled);
    EXPECT_TRUE(s.skip_log.empty());
    EXPECT_EQ(s.transcript.size(), 4u);
}

TEST(StateMachine, AnswerBeforeQuestionIsIllegal) {
    const auto s = fresh();
    EXPECT_EQ(code_of([&] { (void)advance(s, event::UserAnswered{"x"}); }), ErrorCode::IllegalTransition);
}

TEST(StateMachine, ProfileBeforeBudgetIsIllegal) {
    auto s = advance(fresh(), event::QuestionAsked{"q"});
    s = advance(s, event::UserAnswered{"a"});
    EXPECT_EQ(code_of([&] { (void)advance(s, event::ProfileFormalized{profile()}); }), ErrorCode::IllegalTransition);
}

TEST(StateMachine, SecondQuestionWhilePendingIsIllegal) {
    const auto s = advance(fresh(), event::QuestionAsked{"q"});
    EXPECT_EQ(code_of([&] { (void)advance(s, event::QuestionAsked{"q2"}); }), ErrorCode::IllegalTransition);
    ASSERT_TRUE(pending_question(s));
    EXPECT_EQ(*pending_question(s), "q");
}

TEST(StateMachine, MissingPayloadIsMissingArtifact) {
    const auto s = elicited(fresh());
    EXPECT_EQ(code_of([&] { (void)advance(s, event::AnchorsExtracted{}); }), ErrorCode::MissingArtifact);
}

TEST(StateMachine, InvalidPayloadIsInvalidArtifact) {
    const auto s = elicited(fresh());
    EXPECT_EQ(code_of([&] { (void)advance(s, event::AnchorsExtracted{AnchorSet{}}); }), ErrorCode::InvalidArtifact);
}

TEST(StateMachine, TraceMustNameBrokenAssumption) {
    auto s = through_directions(elicited(fresh()));
    const auto a = assumption("fixed depth", 0.5, 0.5);
    s = advance(s, event::AssumptionsScored{std::vector<HiddenAssumption>{a}});
    s = advance(s, event::TripletProduced{BreakingTriplet{a, "why", "reframed"}});
    EXPECT_EQ(code_of([&] { (void)advance(s, event::TraceProduced{trace_for("something else")}); }),
              ErrorCode::InvalidArtifact);
}

TEST(StateMachine, DisableESkipsDialogue) {
    auto s = fresh({AblationFlag::DisableE});
    EXPECT_FALSE(is_legal(s, event::QuestionAsked{"q"}));
    s = advance(s, event::ProfileFormalized{profile()});
    EXPECT_EQ(s.phase.kind, PhaseKind::ProfileReady);
    EXPECT_EQ(s.skip_log, std::vector<std::string>{"E"});
}

TEST(StateMachine, DisableVGoesStraightToTrace) {
    auto s = through_directions(elicited(fresh({AblationFlag::DisableV})));
    EXPECT_FALSE(is_legal(s, event::AssumptionsScored{}));
    s = advance(s, event::TraceProduced{trace_for("none")});
    EXPECT_EQ(s.phase.kind, PhaseKind::TraceBuilt);
    EXPECT_FALSE(s.artifacts.triplet);
    EXPECT_EQ(s.skip_log, std::vector<std::string>{"V"});
}

TEST(StateMachine, DisableNAssemblesWithoutReport) {
    auto s = through_directions(elicited(fresh({AblationFlag::DisableN})));
    const auto a = assumption("fixed depth", 0.5, 0.5);
    s = advance(s, event::AssumptionsScored{std::vector<HiddenAssumption>{a}});
    s = advance(s, event::TripletProduced{BreakingTriplet{a, "why", "reframed"}});
    s = advance(s, event::TraceProduced{trace_for("fixed depth")});
    EXPECT_FALSE(is_legal(s, event::ReportProduced{report()}));
    s = advance(s, event::ProposalProduced{Proposal{"# T", Provenance::AblationWithoutN}});
    EXPECT_EQ(s.phase.kind, PhaseKind::Assembled);
    EXPECT_FALSE(s.artifacts.necessity);
    EXPECT_EQ(s.skip_log, std::vector<std::string>{"N"});
}

TEST(StateMachine, DirectionSelectionMovesTheMark) {
    auto s = elicited(fresh());
    s = advance(s, event::AnchorsExtracted{AnchorSet{{"fusion"}}});
    s = advance(s, event::DirectionsGenerated{
                       std::vector<CandidateDirection>{{"d1", "fusion a", true}, {"d2", "fusion b", false}}});
    s = advance(s, event::DirectionSelected{"d2"});
    ASSERT_NE(selected_direction(s), nullptr);
    EXPECT_EQ(selected_direction(s)->id, "d2");
    EXPECT_EQ(code_of([&] { (void)advance(s, event::DirectionSelected{"d9"}); }), ErrorCode::InvalidArtifact);
}

TEST(StateMachine, TerminalStatesRejectEverything) {
    const auto failed = advance(fresh(), event::OperatorFailed{"boom"});
    EXPECT_EQ(failed.phase, Phase::failed("boom"));
    EXPECT_FALSE(is_legal(failed, event::OperatorFailed{"again"}));
    EXPECT_FALSE(is_legal(failed, event::QuestionAsked{"q"}));
}

TEST(StateMachine, AdvanceDoesNotModifyInput) {
    const auto s = fresh();
    const auto copy = s;
    (void)advance(s, event::QuestionAsked{"q"});
    EXPECT_EQ(s, copy);
}

// Random event streams: whatever is accepted keeps the invariants.
std::vector<PipelineEvent> candidate_events(const SessionState& s) {
    const auto a = assumption("fixed depth", 0.5, 0.5);
    std::string broken = s.artifacts.triplet ? s.artifacts.triplet->broken_assumption.text : "fixed depth";
    return {event::QuestionAsked{"q"},
            event::UserAnswered{"a"},
            event::ProfileFormalized{profile()},
            event::AnchorsExtracted{AnchorSet{{"fusion"}}},
            event::DirectionsGenerated{std::vector<CandidateDirection>{{"d1", "fusion", true}}},
            event::DirectionSelected{"d1"},
            event::AssumptionsScored{std::vector<HiddenAssumption>{a}},
            event::TripletProduced{BreakingTriplet{a, "why", "reframed"}},
            event::TraceProduced{trace_for(broken)},
            event::ReportProduced{report()},
            event::ProposalProduced{Proposal{"# T", Provenance::EvnPipeline}},
            event::OperatorFailed{"x"}};
}

TEST(StateMachineProperty, RandomWalksKeepInvariants) {
    std::mt19937 rng(7);
    const std::vector<AblationFlags> flag_sets = {
        {}, {AblationFlag::DisableE}, {AblationFlag::DisableV}, {AblationFlag::DisableN}};
    for (int walk = 0; walk < 500; ++walk) {
        auto s = fresh(flag_sets[walk % flag_sets.size()]);
        for (int step = 0; step < 40; ++step) {
            const auto events = candidate_events(s);
            const auto& e = events[rng() % events.size()];
            // Failing is allowed but rare so most walks get deep.
            if (std::holds_alternative<event::OperatorFailed>(e) && rng() % 10 != 0) continue;
            const bool legal = is_legal(s, e);
            SessionState next;
            try {
                next = evn::advance(s, e);
            } catch (const Error& err) {
                ASSERT_FALSE(legal && err.code() == ErrorCode::IllegalTransition);
                continue;
            }
            ASSERT_TRUE(legal);
            ASSERT_FALSE(is_terminal(s.phase.kind));
            if (next.phase.kind != PhaseKind::Failed)
                ASSERT_GE(populated_slot_count(next.artifacts), populated_slot_count(s.artifacts));
            ASSERT_GE(next.transcript.size(), s.transcript.size());
            ASSERT_LE(next.phase.turns_completed, next.config_snapshot.elicitation_turns);
            ASSERT_LE(next.skip_log.size(), 1u);
            s = std::move(next);
        }
    }
}

}  // namespace
}  // namespace evn
