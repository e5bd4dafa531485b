#pragma once

#include <cstdint>
#include <optional>

#include <nlohmann/json.hpp>

#include "evn/gateway/prompts.hpp"

namespace evn::gateway {

struct SamplingConfig {
    double temperature = 0.0;
    int max_output_tokens = 4096;
    std::optional<std::int64_t> seed;

    bool operator==(const SamplingConfig&) const = default;
};

/// Pipeline steps with their own sampling temperature.
enum class Step {
    Elicitation,        // E dialogue, profile formalization, anchors, directions
    AssumptionScoring,  // V: assumption extraction and scoring
    Reframing,          // V: rationale + reframed direction
    Trace,
    Necessity,
    Assembly,
    Baseline,
    Judge,
};

/// Default temperature table: E 0.7, scoring 0.6, reframing 0.65, trace 0.2,
/// necessity 0.3, assembly 0.4, baseline 0.4, judge 0.0. Output budget is
/// 8192 tokens for assembly and baseline, 4096 otherwise.
SamplingConfig default_sampling(Step step);

/// The step a template is sampled under by default.
Step default_step(TemplateId id);

/// Judge requests are pinned to temperature 0.0 whatever the caller asks for.
SamplingConfig enforce_floor(TemplateId id, SamplingConfig sampling);

std::vector<std::string> check_sampling(const SamplingConfig& sampling);

void to_json(nlohmann::json& j, const SamplingConfig& v);
void from_json(const nlohmann::json& j, SamplingConfig& v);

}  // namespace evn::gateway
