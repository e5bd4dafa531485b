#include "evn/core/validation.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "evn/core/selection.hpp"

namespace evn {

using nlohmann::json;

namespace {

bool blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

/// Reads a required non-empty string field; records violations otherwise.
void require_string(const json& doc, const std::string& key, const std::string& path, std::string& out,
                    std::vector<std::string>& violations, bool allow_empty = false) {
    const auto it = doc.find(key);
    if (it == doc.end() || it->is_null()) {
        violations.push_back("missing field: " + path);
        return;
    }
    if (!it->is_string()) {
        violations.push_back(path + " must be a string");
        return;
    }
    out = it->get<std::string>();
    if (!allow_empty && blank(out)) violations.push_back(path + " must be non-empty");
}

/// Accepts a string or an array of strings (joined by newlines); models emit both.
void require_text_block(const json& doc, const std::string& key, std::string& out,
                        std::vector<std::string>& violations) {
    const auto it = doc.find(key);
    if (it == doc.end() || it->is_null()) {
        violations.push_back("missing field: " + key);
        return;
    }
    if (it->is_string()) {
        out = it->get<std::string>();
        return;
    }
    if (it->is_array() && std::all_of(it->begin(), it->end(), [](const json& e) { return e.is_string(); })) {
        out.clear();
        for (const auto& e : *it) {
            if (!out.empty()) out += '\n';
            out += e.get<std::string>();
        }
        return;
    }
    violations.push_back(key + " must be a string");
}

std::optional<std::string> optional_text(const json& doc, const std::string& key,
                                         std::vector<std::string>& violations) {
    const auto it = doc.find(key);
    if (it == doc.end() || it->is_null()) return std::nullopt;
    std::string value;
    require_text_block(doc, key, value, violations);
    return value;
}

}  // namespace

Validated<ResearcherProfile> validate_profile(const json& doc) {
    if (!doc.is_object()) return ValidationFailure{{"document must be a JSON object"}};

    std::vector<std::string> violations;
    ResearcherProfile p;

    if (const auto it = doc.find("friction_points"); it == doc.end() || it->is_null()) {
        violations.emplace_back("missing field: friction_points");
    } else if (!it->is_array() ||
               !std::all_of(it->begin(), it->end(), [](const json& e) { return e.is_string(); })) {
        violations.emplace_back("friction_points must be an array of strings");
    } else {
        p.friction_points = it->get<std::vector<std::string>>();
        if (std::all_of(p.friction_points.begin(), p.friction_points.end(),
                        [](const std::string& s) { return blank(s); }))
            violations.emplace_back("friction_points must be non-empty");
    }

    require_string(doc, "motivation", "motivation", p.motivation, violations);

    if (const auto it = doc.find("constraints"); it == doc.end() || it->is_null()) {
        violations.emplace_back("missing field: constraints");
    } else if (!it->is_object()) {
        violations.emplace_back("constraints must be an object");
    } else {
        require_string(*it, "compute", "constraints.compute", p.constraints.compute, violations, true);
        require_string(*it, "timeline", "constraints.timeline", p.constraints.timeline, violations, true);
        require_string(*it, "other", "constraints.other", p.constraints.other, violations, true);
    }

    require_string(doc, "research_taste", "research_taste", p.research_taste, violations);
    require_string(doc, "refined_topic", "refined_topic", p.refined_topic, violations);

    if (!violations.empty()) return ValidationFailure{std::move(violations)};
    return p;
}

std::vector<std::string> validate_trace(const DerivationTrace& t,
                                        const std::optional<std::string>& expected_broken_assumption) {
    std::vector<std::string> out;
    const auto check = [&](const std::string& value, const char* name) {
        if (blank(value)) out.push_back(std::string(name) + " empty");
    };
    check(t.problem, "problem");
    check(t.broken_assumption, "broken_assumption");
    check(t.insight, "insight");
    check(t.claim, "claim");
    if (t.predictions.size() < 2 || t.predictions.size() > 3)
        out.push_back("predictions count " + std::to_string(t.predictions.size()) + " outside 2..3");
    for (std::size_t i = 0; i < t.predictions.size(); ++i)
        if (blank(t.predictions[i])) out.push_back("predictions[" + std::to_string(i) + "] empty");
    check(t.constraints, "constraints");
    check(t.method, "method");

    if (expected_broken_assumption && !blank(t.broken_assumption) &&
        normalize_whitespace(t.broken_assumption) != normalize_whitespace(*expected_broken_assumption))
        out.push_back("broken_assumption does not match the selected assumption: \"" + *expected_broken_assumption +
                      "\"");
    return out;
}

Validated<DerivationTrace> trace_from_document(const json& doc) {
    if (!doc.is_object()) return ValidationFailure{{"document must be a JSON object"}};
    std::vector<std::string> violations;
    DerivationTrace t;
    require_text_block(doc, "problem", t.problem, violations);
    require_text_block(doc, "broken_assumption", t.broken_assumption, violations);
    require_text_block(doc, "insight", t.insight, violations);
    require_text_block(doc, "claim", t.claim, violations);
    if (const auto it = doc.find("predictions"); it == doc.end() || it->is_null()) {
        violations.emplace_back("missing field: predictions");
    } else if (!it->is_array() ||
               !std::all_of(it->begin(), it->end(), [](const json& e) { return e.is_string(); })) {
        violations.emplace_back("predictions must be an array of strings");
    } else {
        t.predictions = it->get<std::vector<std::string>>();
    }
    require_text_block(doc, "constraints", t.constraints, violations);
    require_text_block(doc, "method", t.method, violations);
    t.validation = optional_text(doc, "validation", violations);
    t.impact = optional_text(doc, "impact", violations);
    if (!violations.empty()) return ValidationFailure{std::move(violations)};

    if (auto problems = validate_trace(t); !problems.empty()) return ValidationFailure{std::move(problems)};
    return t;
}

std::vector<std::string> validate_anchor_set(const AnchorSet& set) {
    std::vector<std::string> out;
    if (set.anchors.empty()) {
        out.emplace_back("anchors must be non-empty");
        return out;
    }
    std::set<std::string> seen;
    for (const auto& anchor : set.anchors) {
        const auto norm = normalize_whitespace(anchor);
        if (normalize_for_match(anchor).empty()) {
            out.push_back("anchor \"" + anchor + "\" has no words");
            continue;
        }
        const auto words = std::count(norm.begin(), norm.end(), ' ') + 1;
        if (words > 6) out.push_back("anchor \"" + anchor + "\" has " + std::to_string(words) + " words (max 6)");
        if (!seen.insert(norm).second) out.push_back("duplicate anchor \"" + anchor + "\"");
    }
    return out;
}

std::vector<std::string> validate_assumption(const HiddenAssumption& a) {
    std::vector<std::string> out;
    if (blank(a.text)) out.emplace_back("assumption text empty");
    if (!(a.feasibility >= 0.0 && a.feasibility <= 1.0)) out.emplace_back("feasibility outside [0,1]");
    if (!(a.novelty >= 0.0 && a.novelty <= 1.0)) out.emplace_back("novelty outside [0,1]");
    return out;
}

std::vector<std::string> validate_necessity_report(const NecessityReport& r) {
    std::vector<std::string> out;
    const auto check = [&](const CheckResult& c, const char* name) {
        if (blank(c.findings)) out.push_back(std::string(name) + ".findings empty");
    };
    check(r.necessity, "necessity");
    check(r.sufficiency, "sufficiency");
    check(r.counterexample, "counterexample");
    check(r.anti_inversion, "anti_inversion");
    check(r.uniqueness, "uniqueness");
    if (!r.verdict_closed && blank(r.critical_improvement))
        out.emplace_back("critical_improvement must be non-empty when verdict_closed is false");
    return out;
}

}  // namespace evn
