#include "evn/gateway/sampling.hpp"

namespace evn::gateway {

SamplingConfig default_sampling(Step step) {
    switch (step) {
        case Step::Elicitation: return {0.7, 4096, std::nullopt};
        case Step::AssumptionScoring: return {0.6, 4096, std::nullopt};
        case Step::Reframing: return {0.65, 4096, std::nullopt};
        case Step::Trace: return {0.2, 4096, std::nullopt};
        case Step::Necessity: return {0.3, 4096, std::nullopt};
        case Step::Assembly: return {0.4, 8192, std::nullopt};
        case Step::Baseline: return {0.4, 8192, std::nullopt};
        case Step::Judge: return {0.0, 4096, std::nullopt};
    }
    return {};
}

Step default_step(TemplateId id) {
    switch (id) {
        case TemplateId::ElicitTurn0:
        case TemplateId::ElicitTurnN:
        case TemplateId::ProfileFormalize:
        case TemplateId::AnchorExtract:
        case TemplateId::DirectionGenerate: return Step::Elicitation;
        case TemplateId::AssumptionBreak: return Step::AssumptionScoring;
        case TemplateId::TraceBuild: return Step::Trace;
        case TemplateId::NecessityCheck: return Step::Necessity;
        case TemplateId::ProposalAssemble: return Step::Assembly;
        case TemplateId::BaselineTurn1:
        case TemplateId::BaselineTurn2: return Step::Baseline;
        case TemplateId::Judge: return Step::Judge;
    }
    return Step::Elicitation;
}

SamplingConfig enforce_floor(TemplateId id, SamplingConfig sampling) {
    if (id == TemplateId::Judge) sampling.temperature = 0.0;
    return sampling;
}

std::vector<std::string> check_sampling(const SamplingConfig& s) {
    std::vector<std::string> out;
    if (!(s.temperature >= 0.0 && s.temperature <= 1.0)) out.emplace_back("temperature outside [0,1]");
    if (s.max_output_tokens < 1) out.emplace_back("max_output_tokens must be positive");
    return out;
}

void to_json(nlohmann::json& j, const SamplingConfig& v) {
    j = {{"temperature", v.temperature}, {"max_output_tokens", v.max_output_tokens}};
    j["seed"] = v.seed ? nlohmann::json(*v.seed) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, SamplingConfig& v) {
    j.at("temperature").get_to(v.temperature);
    j.at("max_output_tokens").get_to(v.max_output_tokens);
    if (const auto it = j.find("seed"); it != j.end() && !it->is_null()) {
        v.seed = it->get<std::int64_t>();
    } else {
        v.seed.reset();
    }
}

}  // namespace evn::gateway
