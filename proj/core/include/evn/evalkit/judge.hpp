#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evn/core/types.hpp"
#include "evn/gateway/gateway.hpp"

namespace evn::evalkit {

struct MetricScore {
    int score = 0;
    std::string reason;

    bool operator==(const MetricScore&) const = default;
};

struct JudgeScores {
    MetricScore novelty;
    MetricScore feasibility;
    MetricScore impact;
    std::string overall_explanation;
    std::string judge_id;

    bool operator==(const JudgeScores&) const = default;
};

void to_json(nlohmann::json& j, const JudgeScores& v);
/// Reads a judge_scores document (judge_id is taken from "judge_id" when present).
JudgeScores judge_scores_from_json(const nlohmann::json& doc);

/// Slot text used when no intermediate state accompanies the proposal.
inline constexpr const char* kNoStateMarker = "none provided";

/// Scores a proposal at temperature 0.0. Throws Error{InvalidArgument} for an
/// empty proposal, Error{SchemaExhausted} or Error{TransportError}.
JudgeScores judge(const Proposal& proposal, const std::optional<nlohmann::json>& state_snapshot, gateway::Gateway& gw);

struct MetricMeans {
    double novelty = 0.0;
    double feasibility = 0.0;
    double impact = 0.0;
};

/// Per-metric arithmetic mean over the judges' scores. Throws
/// Error{InvalidArgument} when `scores` is empty.
MetricMeans mean_of_judges(const std::vector<JudgeScores>& scores);

/// Runs judge once per backend (all calls recorded in `audit`), then
/// mean_of_judges. Any judge failure fails the whole scoring.
MetricMeans score_proposal(const Proposal& proposal, const std::optional<nlohmann::json>& state_snapshot,
                           const std::vector<gateway::BackendPtr>& judges,
                           const std::shared_ptr<gateway::AuditLog>& audit = nullptr,
                           std::vector<JudgeScores>* per_judge = nullptr);

}  // namespace evn::evalkit
