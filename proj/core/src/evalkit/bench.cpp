#include "evn/evalkit/bench.hpp"

#include <fstream>
#include <map>
#include <optional>

#include "evn/core/error.hpp"

namespace evn::evalkit {

using nlohmann::json;

namespace {

std::optional<Domain> parse_domain(const std::string& s) {
    for (auto d : kAllDomains)
        if (s == to_string(d)) return d;
    return std::nullopt;
}

std::string field(const json& item, const char* key, const std::string& id) {
    const auto it = item.find(key);
    if (it == item.end() || !it->is_string())
        throw Error(ErrorCode::FormatError, "bench item " + id + ": " + key + " missing or not a string",
                    {{"item_id", id}, {"field", key}});
    return it->get<std::string>();
}

bool blank(const std::string& s) { return s.find_first_not_of(" \t\r\n") == std::string::npos; }

}  // namespace

const char* to_string(Domain d) {
    switch (d) {
        case Domain::PrognosisPrediction: return "prognosis_prediction";
        case Domain::SingleCellGenomics: return "single_cell_genomics";
        case Domain::ExtremeWeatherAttribution: return "extreme_weather_attribution";
        case Domain::CausalBrainNetworks: return "causal_brain_networks";
    }
    return "unknown";
}

const char* to_string(Ambiguity a) { return a == Ambiguity::Related ? "related" : "unrelated"; }

const char* domain_label(Domain d) {
    switch (d) {
        case Domain::PrognosisPrediction: return "Multimodal Learning for Cancer Prognosis Analysis";
        case Domain::SingleCellGenomics: return "Computational Genomics Analysis of Single-Cell RNA-seq";
        case Domain::ExtremeWeatherAttribution: return "Attribution of Extreme Weather Events in Climate Models";
        case Domain::CausalBrainNetworks: return "Causal Brain-Network Modeling in Neuroscience";
    }
    return "unknown";
}

void to_json(json& j, const BenchItem& v) {
    j = {{"item_id", v.item_id},       {"domain", to_string(v.domain)},   {"ambiguity", to_string(v.ambiguity)},
         {"paragraph1", v.paragraph1}, {"paragraph2", v.paragraph2}};
}

std::vector<BenchItem> parse_bench(const json& doc) {
    if (!doc.is_object() || !doc.contains("items") || !doc["items"].is_array())
        throw Error(ErrorCode::FormatError, "bench file must be an object with an \"items\" array");
    const auto complete_it = doc.find("complete");
    if (complete_it != doc.end() && !complete_it->is_boolean())
        throw Error(ErrorCode::FormatError, "\"complete\" must be a boolean");
    const bool complete = complete_it != doc.end() && complete_it->get<bool>();

    std::vector<BenchItem> items;
    for (std::size_t i = 0; i < doc["items"].size(); ++i) {
        const auto& raw = doc["items"][i];
        const auto fallback = "#" + std::to_string(i);
        if (!raw.is_object()) throw Error(ErrorCode::FormatError, "bench item " + fallback + " is not an object");
        BenchItem item;
        item.item_id = field(raw, "item_id", fallback);
        const auto& id = item.item_id;
        if (blank(id)) throw Error(ErrorCode::FormatError, "bench item " + fallback + ": empty item_id");
        const auto domain = parse_domain(field(raw, "domain", id));
        if (!domain)
            throw Error(ErrorCode::FormatError, "bench item " + id + ": unknown domain " + raw["domain"].get<std::string>(),
                        {{"item_id", id}, {"field", "domain"}});
        item.domain = *domain;
        const auto ambiguity = field(raw, "ambiguity", id);
        if (ambiguity == "related") {
            item.ambiguity = Ambiguity::Related;
        } else if (ambiguity == "unrelated") {
            item.ambiguity = Ambiguity::Unrelated;
        } else {
            throw Error(ErrorCode::FormatError, "bench item " + id + ": ambiguity must be related or unrelated",
                        {{"item_id", id}, {"field", "ambiguity"}});
        }
        item.paragraph1 = field(raw, "paragraph1", id);
        item.paragraph2 = field(raw, "paragraph2", id);
        for (const auto& [name, text] : {std::pair{"paragraph1", &item.paragraph1}, {"paragraph2", &item.paragraph2}})
            if (blank(*text))
                throw Error(ErrorCode::FormatError, "bench item " + id + ": " + name + " is empty",
                            {{"item_id", id}, {"field", name}});
        items.push_back(std::move(item));
    }

    if (complete) {
        std::map<std::pair<Domain, Ambiguity>, int> counts;
        for (const auto& it : items) ++counts[{it.domain, it.ambiguity}];
        json cells = json::array();
        std::string summary;
        for (auto d : kAllDomains) {
            for (auto [a, want] : {std::pair{Ambiguity::Related, kRelatedPerDomain}, {Ambiguity::Unrelated, kUnrelatedPerDomain}}) {
                const int have = counts[{d, a}];
                if (have == want) continue;
                cells.push_back({{"domain", to_string(d)}, {"ambiguity", to_string(a)}, {"expected", want}, {"found", have}});
                if (!summary.empty()) summary += ", ";
                summary += std::string("(") + to_string(d) + ", " + to_string(a) + ") has " + std::to_string(have) +
                           " of " + std::to_string(want);
            }
        }
        if (!cells.empty())
            throw Error(ErrorCode::CorpusShapeError, "complete bench has the wrong shape: " + summary,
                        {{"cells", cells}, {"items", items.size()}});
    }
    return items;
}

std::vector<BenchItem> load_bench(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open bench file " + path, {{"path", path}});
    const auto doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw Error(ErrorCode::FormatError, "bench file is not valid JSON: " + path, {{"path", path}});
    return parse_bench(doc);
}

}  // namespace evn::evalkit
