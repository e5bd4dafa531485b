#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "evn/core/types.hpp"

namespace evn {

/// Complete list of violations found in a model-produced document.
struct ValidationFailure {
    std::vector<std::string> violations;
};

template <typename T>
using Validated = std::variant<T, ValidationFailure>;

/// Builds a profile from the strict-JSON formalization output. Never throws;
/// every missing key, wrong shape and empty required value is reported.
Validated<ResearcherProfile> validate_profile(const nlohmann::json& document);

/// Violated trace invariants; empty means OK. When `expected_broken_assumption`
/// is given, the trace's broken_assumption must equal it after whitespace
/// normalization.
std::vector<std::string> validate_trace(const DerivationTrace& trace,
                                        const std::optional<std::string>& expected_broken_assumption = {});

/// Shape check of a trace document followed by validate_trace.
Validated<DerivationTrace> trace_from_document(const nlohmann::json& document);

std::vector<std::string> validate_anchor_set(const AnchorSet& anchors);
std::vector<std::string> validate_assumption(const HiddenAssumption& assumption);
std::vector<std::string> validate_necessity_report(const NecessityReport& report);

template <typename T>
bool is_valid(const Validated<T>& v) {
    return std::holds_alternative<T>(v);
}

}  // namespace evn
