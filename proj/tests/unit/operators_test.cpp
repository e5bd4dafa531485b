#include <algorithm>

#include <gtest/gtest.h>

#include "evn/core/error.hpp"
#include "evn/core/selection.hpp"
#include "evn/core/serialization.hpp"
#include "evn/core/validation.hpp"
#include "evn/operators/operators.hpp"
#include "test_support.hpp"

namespace evn::operators {
namespace {

using gateway::TemplateId;
using nlohmann::json;
using testing::fixture_json;
using testing::mock_with;
using testing::shipped_mock;

const std::string kAStar = "Fusion must happen at a single fixed depth of the network.";

SessionState session(AblationFlags flags = {}, OperatorConfig cfg = {}) {
    return new_session("op-test", {"Fusion feels too uniform.", "prognosis prediction", {}}, cfg, std::move(flags));
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

json script_entry(const std::string& tid) { return fixture_json("mock_script.json")[tid]["*"][0]; }

std::vector<std::string> template_steps(const std::vector<gateway::CompletionRecord>& records) {
    std::vector<std::string> out;
    for (const auto& r : records) out.push_back(std::string(to_string(r.template_id)) + (r.step.empty() ? "" : ":" + r.step));
    return out;
}

SessionState run_full(AblationFlags flags, Gateway& gw) {
    auto s = session(std::move(flags));
    run_pipeline(s, gw, scripted_answerer({"a1", "a2"}));
    return s;
}

TEST(Elicit, TwoExchangesThenProfile) {
    Gateway gw(shipped_mock());
    auto s = session();
    elicit(s, gw, scripted_answerer({"first answer", "second answer"}));
    EXPECT_EQ(s.phase.kind, PhaseKind::ProfileReady);
    ASSERT_EQ(s.transcript.size(), 4u);
    EXPECT_EQ(s.transcript[1].text, "first answer");
    EXPECT_EQ(s.transcript[3].text, "second answer");
    EXPECT_TRUE(is_valid(validate_profile(json(*s.artifacts.profile))));
    EXPECT_EQ(template_steps(gw.audit()->records()),
              (std::vector<std::string>{"elicit_turn0", "elicit_turnN", "profile_formalize"}));
    // The Turn-N prompt sees the previous answer.
    EXPECT_EQ(gw.audit()->records()[1].bindings.at("prev_answer"), "first answer");
}

TEST(Elicit, CancelKeepsTranscript) {
    Gateway gw(shipped_mock());
    auto s = session();
    const Answerer cancel = [](const std::string&, int turn) -> std::optional<std::string> {
        return turn == 1 ? std::optional<std::string>{} : std::optional<std::string>{"x"};
    };
    EXPECT_EQ(code_of([&] { elicit(s, gw, cancel); }), ErrorCode::ElicitationAborted);
    EXPECT_EQ(s.phase, Phase::failed("user cancel"));
    EXPECT_EQ(s.transcript.size(), 1u);
}

TEST(Elicit, DisabledMakesNoCalls) {
    auto mock = shipped_mock();
    Gateway gw(mock);
    auto s = session({AblationFlag::DisableE});
    elicit(s, gw, scripted_answerer({}));
    EXPECT_EQ(mock->calls(), 0u);
    EXPECT_EQ(*s.artifacts.profile, stub_profile(s.input));
    EXPECT_EQ(s.artifacts.profile->refined_topic, "prognosis prediction: Fusion feels too uniform.");
    EXPECT_EQ(s.artifacts.profile->friction_points, std::vector<std::string>{"Fusion feels too uniform."});
}

TEST(Elicit, BatchAnswererPolicy) {
    const auto a = batch_answerer("para two");
    EXPECT_EQ(a("q", 1), "para two");
    EXPECT_EQ(a("q", 2), std::string(kFillerAnswer));
    EXPECT_EQ(format_transcript({{TurnRole::SystemQuestion, "q", 0}, {TurnRole::UserAnswer, "a", 1}}), "Q1: q\nA1: a");
}

SessionState profiled(Gateway& gw, AblationFlags flags = {}) {
    auto s = session(std::move(flags));
    elicit(s, gw, scripted_answerer({"a1", "a2"}));
    return s;
}

TEST(Directions, TwoOfThreeSurviveFirstSelected) {
    Gateway gw(shipped_mock());
    auto s = profiled(gw);
    anchor_and_candidates(s, gw);
    ASSERT_EQ(s.phase.kind, PhaseKind::DirectionsReady);
    const auto& dirs = *s.artifacts.directions;
    ASSERT_EQ(dirs.size(), 2u);
    EXPECT_EQ(dirs[0].id, "d1");
    EXPECT_EQ(dirs[1].id, "d3");
    EXPECT_TRUE(dirs[0].selected);
    EXPECT_FALSE(dirs[1].selected);
    for (const auto& d : dirs) EXPECT_TRUE(covers_all_anchors(d, *s.artifacts.anchors));
}

TEST(Directions, NoCoverageTwiceFails) {
    auto mock = mock_with({{"direction_generate",
                            {{"*", {json{{"directions", {"alpha", "beta", "gamma"}}}}}}}});
    Gateway gw(mock);
    auto s = profiled(gw);
    EXPECT_EQ(code_of([&] { anchor_and_candidates(s, gw); }), ErrorCode::NoSurvivingDirection);
    const auto steps = template_steps(gw.audit()->records());
    EXPECT_EQ(std::count(steps.begin(), steps.end(), "direction_generate"), 1);
    EXPECT_EQ(std::count(steps.begin(), steps.end(), "direction_generate:regenerate"), 1);
    EXPECT_EQ(s.phase.kind, PhaseKind::AnchorsReady);
}

TEST(Directions, RegenerationCanRecover) {
    auto good = script_entry("direction_generate");
    auto mock = mock_with({{"direction_generate",
                            {{"*", {json{{"directions", {"alpha", "beta", "gamma"}}}}}, {"@regenerate", {good}}}}});
    Gateway gw(mock);
    auto s = profiled(gw);
    anchor_and_candidates(s, gw);
    EXPECT_EQ(s.artifacts.directions->size(), 2u);
}

TEST(Directions, AbstractsSlot) {
    Gateway gw(shipped_mock());
    auto s = profiled(gw);
    auto with = s;
    anchor_and_candidates(s, gw);
    const auto plain = gw.audit()->records()[3];
    ASSERT_EQ(plain.template_id, TemplateId::AnchorExtract);
    EXPECT_EQ(plain.bindings.at("abstracts"), "");
    for (const auto& m : plain.rendered_messages) EXPECT_EQ(m.content.find("Related literature"), std::string::npos);

    Gateway gw2(shipped_mock());
    anchor_and_candidates(with, gw2, "Abstract one.");
    const auto rec = gw2.audit()->records()[0];
    EXPECT_NE(rec.rendered_messages.back().content.find("Abstract one."), std::string::npos);
}

TEST(Directions, AnchorCountOutOfRangeIsRepaired) {
    auto mock = mock_with({{"anchor_extract", {{"*", {json{{"anchors", {"multimodal fusion"}}}, script_entry("anchor_extract")}}}}});
    Gateway gw(mock);
    auto s = profiled(gw);
    anchor_and_candidates(s, gw);
    EXPECT_EQ(s.artifacts.anchors->anchors.size(), 2u);
}

SessionState directed(Gateway& gw, AblationFlags flags = {}) {
    auto s = profiled(gw, std::move(flags));
    anchor_and_candidates(s, gw);
    return s;
}

TEST(Violate, TieResolvedByNovelty) {
    Gateway gw(shipped_mock());
    auto s = directed(gw);
    violate_and_reframe(s, gw);
    ASSERT_EQ(s.phase.kind, PhaseKind::TraceBuilt);
    const auto& list = *s.artifacts.assumptions;
    ASSERT_EQ(list.size(), 4u);
    // Oracle: products 0.18/0.25/0.10/0.25, the 0.25 pair split by novelty.
    EXPECT_DOUBLE_EQ(list[1].product(), 0.25);
    EXPECT_DOUBLE_EQ(list[3].product(), 0.25);
    EXPECT_EQ(s.artifacts.triplet->broken_assumption, list[3]);
    EXPECT_EQ(s.artifacts.triplet->broken_assumption.text, kAStar);
    EXPECT_EQ(normalize_whitespace(s.artifacts.trace->broken_assumption), normalize_whitespace(kAStar));
    const auto records = gw.audit()->records();
    const auto reframe = std::find_if(records.begin(), records.end(), [](const auto& r) { return r.step == "reframe"; });
    ASSERT_NE(reframe, records.end());
    EXPECT_EQ(reframe->bindings.at("selected_assumption"), kAStar);
    EXPECT_DOUBLE_EQ(reframe->sampling.temperature, 0.65);
}

TEST(Violate, TooFewAssumptionsTwice) {
    json two = {{"hidden_assumptions",
                 {{{"text", "a"}, {"feasibility", 0.5}, {"novelty", 0.5}}, {{"text", "b"}, {"feasibility", 0.5}, {"novelty", 0.5}}}}};
    auto script = fixture_json("mock_script.json")["assumption_break"];
    script["*"] = {two};
    Gateway gw(mock_with({{"assumption_break", script}}));
    auto s = directed(gw);
    EXPECT_EQ(code_of([&] { violate_and_reframe(s, gw); }), ErrorCode::AssumptionCountOutOfRange);
    EXPECT_EQ(s.phase.kind, PhaseKind::DirectionsReady);
}

TEST(Violate, TraceRepairedOnce) {
    auto good = script_entry("trace_build");
    auto bad = good;
    bad.erase("constraints");
    Gateway gw(mock_with({{"trace_build", {{"*", {bad, good}}}}}));
    auto s = directed(gw);
    violate_and_reframe(s, gw);
    EXPECT_EQ(s.phase.kind, PhaseKind::TraceBuilt);
    const auto steps = template_steps(gw.audit()->records());
    EXPECT_EQ(std::count(steps.begin(), steps.end(), "trace_build"), 2);
}

TEST(Violate, TraceNamingWrongAssumptionIsTraceInvalid) {
    auto bad = script_entry("trace_build");
    bad["broken_assumption"] = "Something unrelated.";
    Gateway gw(mock_with({{"trace_build", {{"*", {bad}}}}}));
    auto s = directed(gw);
    EXPECT_EQ(code_of([&] { violate_and_reframe(s, gw); }), ErrorCode::TraceInvalid);
    // Partial progress survives for a later resume.
    EXPECT_EQ(s.phase.kind, PhaseKind::Reframed);
    Gateway fixed(shipped_mock());
    violate_and_reframe(s, fixed);
    EXPECT_EQ(s.phase.kind, PhaseKind::TraceBuilt);
    EXPECT_EQ(template_steps(fixed.audit()->records()), std::vector<std::string>{"trace_build"});
}

TEST(Violate, SingleShotMode) {
    OperatorConfig cfg;
    cfg.single_shot_assumptions = true;
    json single = {{"hidden_assumptions", {"x", "y", kAStar}},
                   {"broken_assumption", kAStar},
                   {"breaking_rationale", "r"},
                   {"feasibility_score", 0.4},
                   {"novelty_score", 0.9}};
    auto script = fixture_json("mock_script.json")["assumption_break"];
    script["*"] = {single};
    Gateway gw(mock_with({{"assumption_break", script}}));
    auto s = new_session("single", {"Fusion feels too uniform.", "prognosis prediction", {}}, cfg, {});
    run_pipeline(s, gw, scripted_answerer({}));
    EXPECT_EQ(s.artifacts.triplet->broken_assumption.text, kAStar);
    EXPECT_DOUBLE_EQ(s.artifacts.triplet->broken_assumption.novelty, 0.9);
}

TEST(Violate, DisabledBuildsTraceLocally) {
    Gateway gw(shipped_mock());
    auto s = directed(gw, {AblationFlag::DisableV});
    const auto before = gw.audit()->size();
    violate_and_reframe(s, gw);
    EXPECT_EQ(gw.audit()->size(), before);
    EXPECT_EQ(s.phase.kind, PhaseKind::TraceBuilt);
    EXPECT_FALSE(s.artifacts.triplet);
    EXPECT_FALSE(s.artifacts.assumptions);
    EXPECT_TRUE(validate_trace(*s.artifacts.trace).empty());
}

TEST(Necessity, StoredWithOpenVerdict) {
    Gateway gw(shipped_mock());
    auto s = directed(gw);
    violate_and_reframe(s, gw);
    check_necessity(s, gw);
    ASSERT_EQ(s.phase.kind, PhaseKind::NecessityChecked);
    EXPECT_FALSE(s.artifacts.necessity->verdict_closed);
    EXPECT_FALSE(s.artifacts.necessity->critical_improvement.empty());
    const auto rec = gw.audit()->records().back();
    EXPECT_EQ(rec.template_id, TemplateId::NecessityCheck);
    EXPECT_FALSE(rec.bindings.at("components").empty());
}

TEST(Necessity, MissingCheckExhausts) {
    auto bad = script_entry("necessity_check");
    bad.erase("anti_inversion");
    Gateway gw(mock_with({{"necessity_check", {{"*", {bad}}}}}));
    auto s = directed(gw);
    violate_and_reframe(s, gw);
    EXPECT_EQ(code_of([&] { check_necessity(s, gw); }), ErrorCode::SchemaExhausted);
    const auto steps = template_steps(gw.audit()->records());
    EXPECT_EQ(std::count(steps.begin(), steps.end(), "necessity_check"), 3);
}

TEST(Necessity, DescribeMethod) {
    DerivationTrace t;
    t.method = "- route by agreement\n- fuse at chosen depth\n";
    EXPECT_EQ(describe_method(t).components, (std::vector<std::string>{"route by agreement", "fuse at chosen depth"}));
    t.method = "Score agreement. Route the case; then fuse.";
    EXPECT_EQ(describe_method(t).components,
              (std::vector<std::string>{"Score agreement.", "Route the case;", "then fuse."}));
}

TEST(Assemble, FullProposalHasSevenHeaders) {
    Gateway gw(shipped_mock());
    const auto s = run_full({}, gw);
    ASSERT_EQ(s.phase.kind, PhaseKind::Assembled);
    EXPECT_TRUE(missing_sections(s.artifacts.proposal->markdown, required_proposal_sections()).empty());
    EXPECT_EQ(s.artifacts.proposal->provenance, Provenance::EvnPipeline);
}

TEST(Assemble, ForcedContextIsVerbatim) {
    Gateway gw(shipped_mock());
    const auto s = run_full({}, gw);
    const auto rec = gw.audit()->records().back();
    ASSERT_EQ(rec.template_id, TemplateId::ProposalAssemble);
    std::string all;
    for (const auto& m : rec.rendered_messages) all += m.content;
    EXPECT_NE(all.find(s.artifacts.necessity->critical_improvement), std::string::npos);
    EXPECT_NE(all.find("verdict_closed = false"), std::string::npos);
}

TEST(Assemble, WithoutNecessityNoSlotFilled) {
    Gateway gw(shipped_mock());
    const auto s = run_full({AblationFlag::DisableN}, gw);
    EXPECT_EQ(s.phase.kind, PhaseKind::Assembled);
    EXPECT_EQ(s.artifacts.proposal->provenance, Provenance::AblationWithoutN);
    const auto rec = gw.audit()->records().back();
    EXPECT_EQ(rec.bindings.at("necessity_context"), "");
    EXPECT_EQ(s.skip_log, std::vector<std::string>{"N"});
}

TEST(Assemble, MissingPredictionsTwice) {
    auto md = script_entry("proposal_assemble").get<std::string>();
    const auto pos = md.find("## Predictions");
    ASSERT_NE(pos, std::string::npos);
    md.replace(pos, 14, "## Forecasts");
    Gateway gw(mock_with({{"proposal_assemble", {{"*", {md}}}}}));
    auto s = session();
    EXPECT_EQ(code_of([&] { run_pipeline(s, gw, scripted_answerer({})); }), ErrorCode::MissingSections);
    EXPECT_EQ(s.phase.kind, PhaseKind::Failed);
    EXPECT_EQ(s.phase.reason.rfind("MissingSections: ", 0), 0u);
    const auto steps = template_steps(gw.audit()->records());
    EXPECT_EQ(std::count(steps.begin(), steps.end(), "proposal_assemble"), 2);
}

TEST(Assemble, MissingSectionsMatching) {
    const auto missing = missing_sections("# T\n### problem\n## Claim\n", {"## Problem", "## Claim", "## Method"});
    EXPECT_EQ(missing, std::vector<std::string>{"missing section header: ## Method"});
}

TEST(Baseline, TwoTurnsSameConversation) {
    auto mock = shipped_mock();
    Gateway gw(mock);
    const auto p = run_baseline("Prognosis prediction", "para one", "para two", gw);
    EXPECT_EQ(p.provenance, Provenance::PromptBaseline);
    EXPECT_NE(p.markdown.find("## Ablation Matrix"), std::string::npos);
    EXPECT_EQ(p.markdown, script_entry("baseline_turn2").get<std::string>());
    const auto records = gw.audit()->records();
    ASSERT_EQ(records.size(), 2u);
    const auto& second = records[1].rendered_messages;
    EXPECT_EQ(second.size(), records[0].rendered_messages.size() + 2);
    EXPECT_EQ(second[second.size() - 2].content, records[0].response_text);
    EXPECT_NE(second.back().content.find("para two"), std::string::npos);
    EXPECT_DOUBLE_EQ(records[1].sampling.temperature, 0.4);
}

TEST(Baseline, EmptyParagraphRejected) {
    Gateway gw(shipped_mock());
    EXPECT_EQ(code_of([&] { (void)run_baseline("t", "p1", "  ", gw); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(gw.audit()->size(), 0u);
}

TEST(Baseline, IdenticalTurnsReturnTurnTwo) {
    const auto t1 = script_entry("baseline_turn1");
    Gateway gw(mock_with({{"baseline_turn2", {{"*", {t1}}}}}));
    EXPECT_EQ(run_baseline("t", "p1", "p2", gw).markdown, t1.get<std::string>());
}

TEST(Pipeline, OperatorOrdering) {
    Gateway gw(shipped_mock());
    (void)run_full({}, gw);
    EXPECT_EQ(template_steps(gw.audit()->records()),
              (std::vector<std::string>{"elicit_turn0", "elicit_turnN", "profile_formalize", "anchor_extract",
                                        "direction_generate", "assumption_break", "assumption_break:reframe",
                                        "trace_build", "necessity_check", "proposal_assemble"}));
}

TEST(Pipeline, ThreeTurnBudget) {
    OperatorConfig cfg;
    cfg.elicitation_turns = 3;
    Gateway gw(shipped_mock());
    auto s = session({}, cfg);
    run_pipeline(s, gw, scripted_answerer({}));
    const auto steps = template_steps(gw.audit()->records());
    EXPECT_EQ(std::count(steps.begin(), steps.end(), "elicit_turnN"), 2);
    EXPECT_EQ(s.transcript.size(), 6u);
}

std::vector<std::string> without(std::vector<std::string> steps, const std::vector<std::string>& prefixes) {
    std::erase_if(steps, [&](const std::string& s) {
        return std::any_of(prefixes.begin(), prefixes.end(), [&](const auto& p) { return s.rfind(p, 0) == 0; });
    });
    return steps;
}

TEST(Pipeline, AblationExactness) {
    Gateway full_gw(shipped_mock());
    (void)run_full({}, full_gw);
    const auto full = template_steps(full_gw.audit()->records());
    const std::vector<std::pair<AblationFlag, std::vector<std::string>>> cases = {
        {AblationFlag::DisableE, {"elicit_turn0", "elicit_turnN", "profile_formalize"}},
        {AblationFlag::DisableV, {"assumption_break", "trace_build"}},
        {AblationFlag::DisableN, {"necessity_check"}}};
    for (const auto& [flag, removed] : cases) {
        Gateway gw(shipped_mock());
        const auto s = run_full({flag}, gw);
        EXPECT_EQ(s.phase.kind, PhaseKind::Assembled);
        const auto steps = template_steps(gw.audit()->records());
        EXPECT_EQ(without(steps, removed), steps) << to_string(flag);
        EXPECT_EQ(steps, without(full, removed)) << to_string(flag);
        EXPECT_EQ(s.skip_log.size(), 1u);
    }
}

TEST(Pipeline, DeterministicUnderMock) {
    Gateway a(shipped_mock());
    Gateway b(shipped_mock());
    const auto sa = run_full({}, a);
    const auto sb = run_full({}, b);
    EXPECT_EQ(sa, sb);
    const auto ra = a.audit()->records();
    const auto rb = b.audit()->records();
    ASSERT_EQ(ra.size(), rb.size());
    for (std::size_t i = 0; i < ra.size(); ++i) {
        EXPECT_EQ(ra[i].request_hash, rb[i].request_hash);
        EXPECT_EQ(ra[i].response_text, rb[i].response_text);
    }
}

TEST(Pipeline, AdvanceOneRefusesPendingQuestionAndTerminal) {
    Gateway gw(shipped_mock());
    auto s = session();
    advance_one(s, gw);
    EXPECT_TRUE(pending_question(s));
    EXPECT_EQ(code_of([&] { advance_one(s, gw); }), ErrorCode::IllegalTransition);
    record_answer(s, "a1");
    while (!is_terminal(s.phase.kind)) {
        if (pending_question(s)) record_answer(s, "more");
        advance_one(s, gw);
    }
    EXPECT_EQ(s.phase.kind, PhaseKind::Assembled);
    EXPECT_EQ(code_of([&] { advance_one(s, gw); }), ErrorCode::IllegalTransition);
}

}  // namespace
}  // namespace evn::operators
