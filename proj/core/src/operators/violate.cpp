#include <algorithm>

#include "evn/core/error.hpp"
#include "evn/core/selection.hpp"
#include "evn/core/serialization.hpp"
#include "evn/core/validation.hpp"
#include "evn/operators/operators.hpp"

namespace evn::operators {

using gateway::SchemaId;
using gateway::TemplateId;
using nlohmann::json;

namespace {

gateway::Bindings scoring_bindings(const SessionState& s) {
    const auto* d = selected_direction(s);
    const auto contract = s.config_snapshot.single_shot_assumptions ? "assumption_break.single_contract"
                                                                     : "assumption_break.scored_contract";
    return {{"direction", d->statement},
            {"profile_json", json(*s.artifacts.profile).dump(2)},
            {"output_contract", gateway::prompt_fragment(contract)}};
}

gateway::Call scoring_call(const SessionState& s) {
    return gateway::make_call(TemplateId::AssumptionBreak, scoring_bindings(s));
}

/// Single-shot documents carry one pick; it keeps the model's scores and the
/// other listed assumptions score 0 so the local argmax returns the pick.
std::vector<HiddenAssumption> single_shot_assumptions(const json& doc) {
    const auto pick = doc.at("broken_assumption").get<std::string>();
    std::vector<HiddenAssumption> out;
    bool found = false;
    for (const auto& t : doc.at("hidden_assumptions")) {
        HiddenAssumption a{t.get<std::string>(), 0.0, 0.0};
        if (!found && normalize_whitespace(a.text) == normalize_whitespace(pick)) {
            a.feasibility = doc.at("feasibility_score").get<double>();
            a.novelty = doc.at("novelty_score").get<double>();
            found = true;
        }
        out.push_back(std::move(a));
    }
    if (!found)
        out.push_back({pick, doc.at("feasibility_score").get<double>(), doc.at("novelty_score").get<double>()});
    return out;
}

gateway::Exchange score_assumptions(SessionState& session, Gateway& gw) {
    const auto& cfg = session.config_snapshot;
    gateway::StructuredOptions opts;
    opts.extra_failure = ErrorCode::AssumptionCountOutOfRange;
    opts.extra = [&cfg](const json& doc) -> std::vector<std::string> {
        const auto n = static_cast<int>(doc.at("hidden_assumptions").size());
        if (n < cfg.assumption_count_range.min || n > cfg.assumption_count_range.max)
            return {"listed " + std::to_string(n) + " assumptions; " + std::to_string(cfg.assumption_count_range.min) +
                    " to " + std::to_string(cfg.assumption_count_range.max) + " are required"};
        return {};
    };
    const auto schema = cfg.single_shot_assumptions ? SchemaId::AssumptionSingle : SchemaId::AssumptionSet;
    auto reply = gw.complete_structured(scoring_call(session), schema, opts);

    std::vector<HiddenAssumption> list;
    if (cfg.single_shot_assumptions) {
        list = single_shot_assumptions(reply.document);
    } else {
        for (const auto& a : reply.document.at("hidden_assumptions"))
            list.push_back({a.at("text").get<std::string>(), a.at("feasibility").get<double>(),
                            a.at("novelty").get<double>()});
    }
    session = advance(session, event::AssumptionsScored{std::move(list)});
    return reply;
}

void reframe(SessionState& session, Gateway& gw, const gateway::Messages& scoring_conversation) {
    const auto& list = *session.artifacts.assumptions;
    const auto winners = select_assumptions(list, session.config_snapshot.k_break);
    const auto& chosen = winners.front();

    auto bindings = scoring_bindings(session);
    bindings["selected_assumption"] = chosen.text;
    auto turn = gateway::render_followup(TemplateId::AssumptionBreak, bindings);
    auto call = gateway::follow_up(scoring_conversation, TemplateId::AssumptionBreak, std::move(turn), bindings,
                                   "reframe", gateway::default_sampling(gateway::Step::Reframing));
    auto reply = gw.complete_structured(call, SchemaId::Triplet);

    BreakingTriplet t{chosen, reply.document.at("breaking_rationale").get<std::string>(),
                      reply.document.at("reframed_direction").get<std::string>()};
    session = advance(session, event::TripletProduced{std::move(t)});
}

void build_trace(SessionState& session, Gateway& gw) {
    const auto& t = *session.artifacts.triplet;
    const auto expected = t.broken_assumption.text;
    auto call = gateway::make_call(TemplateId::TraceBuild, {{"reframed_direction", t.reframed_direction},
                                                            {"broken_assumption", expected},
                                                            {"motivation", session.artifacts.profile->motivation}});
    gateway::StructuredOptions opts;
    opts.extra_failure = ErrorCode::TraceInvalid;
    opts.extra = [&expected](const json& doc) {
        return validate_trace(std::get<DerivationTrace>(trace_from_document(doc)), expected);
    };
    gateway::Exchange reply;
    try {
        reply = gw.complete_structured(call, SchemaId::Trace, opts);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::SchemaExhausted) throw;
        throw Error(ErrorCode::TraceInvalid, e.what(), e.details());
    }
    auto trace = std::get<DerivationTrace>(trace_from_document(reply.document));
    session = advance(session, event::TraceProduced{std::move(trace)});
}

DerivationTrace local_trace(const SessionState& s) {
    const auto& p = *s.artifacts.profile;
    const auto& d = selected_direction(s)->statement;
    DerivationTrace t;
    t.problem = p.friction_points.empty() ? p.refined_topic : p.friction_points.front();
    t.broken_assumption = "none (assumption violation skipped)";
    t.insight = d;
    t.claim = d;
    t.predictions = {"The direction improves on the current practice named in the problem.",
                     "The improvement persists under the stated constraints."};
    t.constraints = "compute: " + p.constraints.compute + "; timeline: " + p.constraints.timeline +
                    "; other: " + p.constraints.other;
    t.method = d;
    return t;
}

}  // namespace

void violate_and_reframe(SessionState& session, Gateway& gw) {
    const auto kind = session.phase.kind;
    if (kind != PhaseKind::DirectionsReady && kind != PhaseKind::AssumptionsScored && kind != PhaseKind::Reframed)
        throw Error(ErrorCode::IllegalTransition, "violate_and_reframe requires directions_ready or a later V phase",
                    {{"phase", to_string(kind)}});
    if (!selected_direction(session))
        throw Error(ErrorCode::MissingArtifact, "no direction is selected");

    if (session.ablation_flags.contains(AblationFlag::DisableV)) {
        session = advance(session, event::TraceProduced{local_trace(session)});
        return;
    }

    if (kind == PhaseKind::DirectionsReady) {
        auto reply = score_assumptions(session, gw);
        reframe(session, gw, reply.conversation);
    } else if (kind == PhaseKind::AssumptionsScored) {
        // Resumed run: rebuild the scoring turn from the stored assumptions.
        auto conversation = scoring_call(session).messages;
        json doc;
        for (const auto& a : *session.artifacts.assumptions)
            doc["hidden_assumptions"].push_back({{"text", a.text}, {"feasibility", a.feasibility}, {"novelty", a.novelty}});
        conversation.push_back({gateway::Role::Assistant, doc.dump()});
        reframe(session, gw, conversation);
    }
    build_trace(session, gw);
}

}  // namespace evn::operators
