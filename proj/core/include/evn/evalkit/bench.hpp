#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace evn::evalkit {

enum class Domain { PrognosisPrediction, SingleCellGenomics, ExtremeWeatherAttribution, CausalBrainNetworks };
enum class Ambiguity { Related, Unrelated };

inline constexpr Domain kAllDomains[] = {Domain::PrognosisPrediction, Domain::SingleCellGenomics,
                                         Domain::ExtremeWeatherAttribution, Domain::CausalBrainNetworks};

/// Items per domain in a complete corpus.
inline constexpr int kRelatedPerDomain = 10;
inline constexpr int kUnrelatedPerDomain = 3;

const char* to_string(Domain d);
const char* to_string(Ambiguity a);
/// Topic line handed to the baseline for items of this domain.
const char* domain_label(Domain d);

struct BenchItem {
    std::string item_id;
    Domain domain = Domain::PrognosisPrediction;
    Ambiguity ambiguity = Ambiguity::Related;
    std::string paragraph1;
    std::string paragraph2;

    bool operator==(const BenchItem&) const = default;
};

/// Parses {"complete": bool, "items": [...]}. Throws Error{FormatError} naming
/// the offending item, or Error{CorpusShapeError} listing every deficient
/// (domain, ambiguity) cell of a file that declares itself complete.
std::vector<BenchItem> parse_bench(const nlohmann::json& doc);
std::vector<BenchItem> load_bench(const std::string& path);

void to_json(nlohmann::json& j, const BenchItem& v);

}  // namespace evn::evalkit
