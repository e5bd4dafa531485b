#include "evn/evalkit/judge.hpp"

#include "evn/core/error.hpp"
#include "evn/gateway/json_extract.hpp"

namespace evn::evalkit {

using nlohmann::json;

void to_json(json& j, const JudgeScores& v) {
    const auto metric = [](const MetricScore& m) { return json{{"score", m.score}, {"reason", m.reason}}; };
    j = {{"novelty", metric(v.novelty)},
         {"feasibility", metric(v.feasibility)},
         {"impact", metric(v.impact)},
         {"overall_explanation", v.overall_explanation},
         {"judge_id", v.judge_id}};
}

JudgeScores judge_scores_from_json(const json& doc) {
    const auto metric = [&](const char* name) {
        const auto& m = doc.at(name);
        return MetricScore{m.at("score").get<int>(), m.at("reason").get<std::string>()};
    };
    JudgeScores s;
    s.novelty = metric("novelty");
    s.feasibility = metric("feasibility");
    s.impact = metric("impact");
    s.overall_explanation = doc.value("overall_explanation", std::string{});
    s.judge_id = doc.value("judge_id", std::string{});
    return s;
}

JudgeScores judge(const Proposal& proposal, const std::optional<json>& state_snapshot, gateway::Gateway& gw) {
    if (proposal.markdown.find_first_not_of(" \t\r\n") == std::string::npos)
        throw Error(ErrorCode::InvalidArgument, "cannot judge an empty proposal");
    auto call = gateway::make_call(gateway::TemplateId::Judge,
                                   {{"proposal_md", proposal.markdown},
                                    {"state_json", state_snapshot ? gateway::safe_dump(*state_snapshot, 2) : kNoStateMarker}});
    auto reply = gw.complete_structured(call, gateway::SchemaId::JudgeScores);
    auto scores = judge_scores_from_json(reply.document);
    scores.judge_id = gw.backend()->identifier();
    return scores;
}

MetricMeans mean_of_judges(const std::vector<JudgeScores>& scores) {
    if (scores.empty()) throw Error(ErrorCode::InvalidArgument, "at least one judge is required");
    MetricMeans m;
    for (const auto& s : scores) {
        m.novelty += s.novelty.score;
        m.feasibility += s.feasibility.score;
        m.impact += s.impact.score;
    }
    const auto n = static_cast<double>(scores.size());
    return {m.novelty / n, m.feasibility / n, m.impact / n};
}

MetricMeans score_proposal(const Proposal& proposal, const std::optional<json>& state_snapshot,
                           const std::vector<gateway::BackendPtr>& judges,
                           const std::shared_ptr<gateway::AuditLog>& audit, std::vector<JudgeScores>* per_judge) {
    if (judges.empty()) throw Error(ErrorCode::InvalidArgument, "at least one judge is required");
    std::vector<JudgeScores> scores;
    for (const auto& backend : judges) {
        gateway::Gateway gw(backend, audit);
        scores.push_back(judge(proposal, state_snapshot, gw));
    }
    auto means = mean_of_judges(scores);
    if (per_judge) *per_judge = std::move(scores);
    return means;
}

}  // namespace evn::evalkit
