#include "evn/gateway/schemas.hpp"

#include "evn/core/serialization.hpp"
#include "evn/core/validation.hpp"

namespace evn::gateway {

using nlohmann::json;

namespace {

using Violations = std::vector<std::string>;

bool nonempty_string(const json& doc, const char* key) {
    const auto it = doc.find(key);
    return it != doc.end() && it->is_string() && !it->get<std::string>().empty();
}

void require_string(const json& doc, const std::string& where, const char* key, Violations& out) {
    if (!doc.contains(key)) {
        out.push_back("missing field: " + where + key);
    } else if (!nonempty_string(doc, key)) {
        out.push_back(where + key + " must be a non-empty string");
    }
}

void require_unit(const json& doc, const std::string& where, const char* key, Violations& out) {
    const auto it = doc.find(key);
    if (it == doc.end()) {
        out.push_back("missing field: " + where + key);
    } else if (!it->is_number()) {
        out.push_back(where + key + " must be a number");
    } else if (const double v = it->get<double>(); !(v >= 0.0 && v <= 1.0)) {
        out.push_back(where + key + " must lie in [0, 1]");
    }
}

Violations profile(const json& doc) {
    auto v = validate_profile(doc);
    if (is_valid(v)) return {};
    return std::get<ValidationFailure>(v).violations;
}

Violations assumption_set(const json& doc) {
    Violations out;
    const auto it = doc.find("hidden_assumptions");
    if (it == doc.end()) return {"missing field: hidden_assumptions"};
    if (!it->is_array() || it->empty()) return {"hidden_assumptions must be a non-empty array"};
    for (std::size_t i = 0; i < it->size(); ++i) {
        const auto& a = (*it)[i];
        const auto where = "hidden_assumptions[" + std::to_string(i) + "].";
        if (!a.is_object()) {
            out.push_back("hidden_assumptions[" + std::to_string(i) + "] must be an object with scores");
            continue;
        }
        require_string(a, where, "text", out);
        require_unit(a, where, "feasibility", out);
        require_unit(a, where, "novelty", out);
    }
    return out;
}

Violations assumption_single(const json& doc) {
    Violations out;
    const auto it = doc.find("hidden_assumptions");
    if (it == doc.end()) {
        out.emplace_back("missing field: hidden_assumptions");
    } else if (!it->is_array() || it->empty()) {
        out.emplace_back("hidden_assumptions must be a non-empty array");
    } else {
        for (const auto& a : *it)
            if (!a.is_string() || a.get<std::string>().empty()) {
                out.emplace_back("hidden_assumptions must contain non-empty strings");
                break;
            }
    }
    require_string(doc, "", "broken_assumption", out);
    require_string(doc, "", "breaking_rationale", out);
    require_unit(doc, "", "novelty_score", out);
    require_unit(doc, "", "feasibility_score", out);
    return out;
}

Violations triplet(const json& doc) {
    Violations out;
    require_string(doc, "", "breaking_rationale", out);
    require_string(doc, "", "reframed_direction", out);
    return out;
}

Violations trace(const json& doc) {
    auto v = trace_from_document(doc);
    if (is_valid(v)) return {};
    return std::get<ValidationFailure>(v).violations;
}

Violations necessity_report(const json& doc) {
    Violations out;
    for (const char* name : {"necessity", "sufficiency", "counterexample", "anti_inversion", "uniqueness"}) {
        const auto it = doc.find(name);
        if (it == doc.end()) {
            out.push_back(std::string("missing field: ") + name);
            continue;
        }
        if (!it->is_object()) {
            out.push_back(std::string(name) + " must be an object");
            continue;
        }
        if (!it->contains("passed") || !(*it)["passed"].is_boolean())
            out.push_back(std::string(name) + ".passed must be a boolean");
        require_string(*it, std::string(name) + ".", "findings", out);
        if (const auto alt = it->find("simpler_alternative"); alt != it->end() && !alt->is_null() && !alt->is_string())
            out.push_back(std::string(name) + ".simpler_alternative must be a string or null");
    }
    if (!doc.contains("verdict_closed") || !doc["verdict_closed"].is_boolean())
        out.emplace_back("verdict_closed must be a boolean");
    const auto ci = doc.find("critical_improvement");
    if (ci == doc.end()) {
        out.emplace_back("missing field: critical_improvement");
    } else if (!ci->is_string()) {
        out.emplace_back("critical_improvement must be a string");
    }
    if (out.empty()) {
        for (auto& p : validate_necessity_report(doc.get<NecessityReport>())) out.push_back(std::move(p));
    }
    return out;
}

Violations judge_scores(const json& doc) {
    Violations out;
    for (const char* metric : {"novelty", "feasibility", "impact"}) {
        const auto it = doc.find(metric);
        if (it == doc.end()) {
            out.push_back(std::string("missing field: ") + metric);
            continue;
        }
        if (!it->is_object()) {
            out.push_back(std::string(metric) + " must be an object");
            continue;
        }
        const auto score = it->find("score");
        if (score == it->end() || !score->is_number_integer()) {
            out.push_back(std::string(metric) + ".score must be an integer");
        } else if (const auto s = score->get<std::int64_t>(); s < 1 || s > 5) {
            out.push_back(std::string(metric) + ".score " + std::to_string(s) + " outside 1..5");
        }
        require_string(*it, std::string(metric) + ".", "reason", out);
    }
    if (const auto it = doc.find("overall_explanation"); it == doc.end() || !it->is_string())
        out.emplace_back("overall_explanation must be a string");
    return out;
}

Violations anchor_set(const json& doc) {
    const auto it = doc.find("anchors");
    if (it == doc.end()) return {"missing field: anchors"};
    if (!it->is_array()) return {"anchors must be an array"};
    AnchorSet set;
    for (const auto& a : *it) {
        if (!a.is_string()) return {"anchors must contain strings"};
        set.anchors.push_back(a.get<std::string>());
    }
    return validate_anchor_set(set);
}

Violations direction_list(const json& doc) {
    Violations out;
    const auto it = doc.find("directions");
    if (it == doc.end()) return {"missing field: directions"};
    if (!it->is_array() || it->empty()) return {"directions must be a non-empty array"};
    for (std::size_t i = 0; i < it->size(); ++i) {
        const auto& d = (*it)[i];
        const bool ok = (d.is_string() && !d.get<std::string>().empty()) || (d.is_object() && nonempty_string(d, "statement"));
        if (!ok) out.push_back("directions[" + std::to_string(i) + "] needs a non-empty statement");
    }
    return out;
}

}  // namespace

const char* to_string(SchemaId id) {
    switch (id) {
        case SchemaId::Profile: return "profile";
        case SchemaId::AssumptionSet: return "assumption_set";
        case SchemaId::AssumptionSingle: return "assumption_single";
        case SchemaId::Triplet: return "triplet";
        case SchemaId::Trace: return "trace";
        case SchemaId::NecessityReport: return "necessity_report";
        case SchemaId::JudgeScores: return "judge_scores";
        case SchemaId::AnchorSet: return "anchor_set";
        case SchemaId::DirectionList: return "direction_list";
    }
    return "unknown";
}

std::vector<std::string> check_schema(SchemaId id, const json& doc) {
    if (!doc.is_object()) return {"document must be a JSON object"};
    try {
        switch (id) {
            case SchemaId::Profile: return profile(doc);
            case SchemaId::AssumptionSet: return assumption_set(doc);
            case SchemaId::AssumptionSingle: return assumption_single(doc);
            case SchemaId::Triplet: return triplet(doc);
            case SchemaId::Trace: return trace(doc);
            case SchemaId::NecessityReport: return necessity_report(doc);
            case SchemaId::JudgeScores: return judge_scores(doc);
            case SchemaId::AnchorSet: return anchor_set(doc);
            case SchemaId::DirectionList: return direction_list(doc);
        }
    } catch (const json::exception& e) {
        return {std::string("malformed document: ") + e.what()};
    }
    return {"unknown schema"};
}

}  // namespace evn::gateway
