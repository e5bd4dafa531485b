#include "evn/core/error.hpp"
#include "evn/core/selection.hpp"
#include "evn/core/serialization.hpp"
#include "evn/operators/operators.hpp"

namespace evn::operators {

using gateway::SchemaId;
using gateway::TemplateId;
using nlohmann::json;

namespace {

std::string quoted_list(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out += ", ";
        out += '"' + s + '"';
    }
    return out;
}

std::vector<CandidateDirection> parse_directions(const json& doc) {
    std::vector<CandidateDirection> out;
    for (const auto& d : doc.at("directions")) {
        CandidateDirection c;
        c.id = "d" + std::to_string(out.size() + 1);
        c.statement = d.is_string() ? d.get<std::string>() : d.at("statement").get<std::string>();
        out.push_back(std::move(c));
    }
    return out;
}

void extract_anchors(SessionState& session, Gateway& gw, const std::string& abstracts) {
    const auto& cfg = session.config_snapshot;
    gateway::Bindings b{{"min_anchors", std::to_string(cfg.anchor_range.min)},
                        {"max_anchors", std::to_string(cfg.anchor_range.max)},
                        {"refined_topic", session.artifacts.profile->refined_topic},
                        {"abstracts", abstracts.empty() ? std::string{} : "Related literature abstracts:\n" + abstracts}};
    gateway::StructuredOptions opts;
    opts.extra = [&cfg](const json& doc) -> std::vector<std::string> {
        const auto n = static_cast<int>(doc.at("anchors").size());
        if (n < cfg.anchor_range.min || n > cfg.anchor_range.max)
            return {"anchor count " + std::to_string(n) + " outside " + std::to_string(cfg.anchor_range.min) + ".." +
                    std::to_string(cfg.anchor_range.max)};
        return {};
    };
    auto reply = gw.complete_structured(gateway::make_call(TemplateId::AnchorExtract, std::move(b)), SchemaId::AnchorSet, opts);
    session = advance(session, event::AnchorsExtracted{reply.document.get<AnchorSet>()});
}

}  // namespace

void anchor_and_candidates(SessionState& session, Gateway& gw, const std::string& abstracts) {
    if (session.phase.kind == PhaseKind::ProfileReady) extract_anchors(session, gw, abstracts);
    if (session.phase.kind != PhaseKind::AnchorsReady)
        throw Error(ErrorCode::IllegalTransition, "anchor_and_candidates requires phase profile_ready or anchors_ready",
                    {{"phase", to_string(session.phase.kind)}});

    const auto& cfg = session.config_snapshot;
    const auto& anchors = *session.artifacts.anchors;
    gateway::Bindings b{{"anchors", quoted_list(anchors.anchors)},
                        {"profile_json", json(*session.artifacts.profile).dump(2)},
                        {"count", std::to_string(cfg.direction_count)}};
    gateway::StructuredOptions opts;
    opts.extra = [&cfg](const json& doc) -> std::vector<std::string> {
        const auto n = static_cast<int>(doc.at("directions").size());
        if (n != cfg.direction_count)
            return {"expected " + std::to_string(cfg.direction_count) + " directions, got " + std::to_string(n)};
        return {};
    };

    auto call = gateway::make_call(TemplateId::DirectionGenerate, b);
    auto reply = gw.complete_structured(call, SchemaId::DirectionList, opts);
    auto generated = parse_directions(reply.document);
    auto survivors = filter_by_anchors(generated, anchors);

    if (survivors.empty()) {
        auto turn = gateway::render_followup(TemplateId::DirectionGenerate, b);
        auto retry = gateway::follow_up(reply.conversation, TemplateId::DirectionGenerate, std::move(turn), b,
                                        "regenerate", call.sampling);
        auto second = gw.complete_structured(retry, SchemaId::DirectionList, opts);
        auto regenerated = parse_directions(second.document);
        survivors = filter_by_anchors(regenerated, anchors);
        if (survivors.empty())
            throw Error(ErrorCode::NoSurvivingDirection, "no candidate direction covers every anchor after regeneration",
                        {{"anchors", anchors.anchors}, {"directions", json(regenerated)}});
    }
    survivors.front().selected = true;
    session = advance(session, event::DirectionsGenerated{std::move(survivors)});
}

}  // namespace evn::operators
