#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace evn::gateway {

enum class SchemaId {
    Profile,
    AssumptionSet,
    AssumptionSingle,  // single-shot appendix format: the model picks a*
    Triplet,
    Trace,
    NecessityReport,
    JudgeScores,
    AnchorSet,
    DirectionList,
};

const char* to_string(SchemaId id);

/// Shape violations of `doc` against the schema; empty means valid.
/// Range rules that depend on operator configuration (assumption counts,
/// anchor counts) are left to the caller.
std::vector<std::string> check_schema(SchemaId id, const nlohmann::json& doc);

}  // namespace evn::gateway
