#include "evn/core/selection.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include "evn/core/error.hpp"

namespace evn {

std::vector<std::size_t> rank_assumptions(std::span<const HiddenAssumption> assumptions, int k) {
    if (assumptions.empty()) throw Error(ErrorCode::EmptyAssumptionSet, "assumption set is empty");
    if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");

    std::vector<std::size_t> order(assumptions.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    // stable: equal (product, novelty) keep input order
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double pa = assumptions[a].product();
        const double pb = assumptions[b].product();
        if (pa != pb) return pa > pb;
        return assumptions[a].novelty > assumptions[b].novelty;
    });
    order.resize(std::min<std::size_t>(static_cast<std::size_t>(k), order.size()));
    return order;
}

std::vector<HiddenAssumption> select_assumptions(std::span<const HiddenAssumption> assumptions, int k) {
    std::vector<HiddenAssumption> out;
    for (auto i : rank_assumptions(assumptions, k)) out.push_back(assumptions[i]);
    return out;
}

namespace {

std::string collapse(std::string_view text, bool strip_punct) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (unsigned char c : text) {
        // Punctuation separates words ("multimodal-fusion" matches "multimodal fusion").
        if (std::isspace(c) || (strip_punct && std::ispunct(c))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

}  // namespace

std::string normalize_for_match(std::string_view text) { return collapse(text, true); }

std::string normalize_whitespace(std::string_view text) { return collapse(text, false); }

bool covers_all_anchors(const CandidateDirection& direction, const AnchorSet& anchors) {
    const auto haystack = normalize_for_match(direction.statement);
    return std::all_of(anchors.anchors.begin(), anchors.anchors.end(), [&](const std::string& anchor) {
        return haystack.find(normalize_for_match(anchor)) != std::string::npos;
    });
}

std::vector<CandidateDirection> filter_by_anchors(std::span<const CandidateDirection> directions,
                                                  const AnchorSet& anchors) {
    if (anchors.anchors.empty()) throw Error(ErrorCode::EmptyAnchorSet, "anchor set is empty");
    std::vector<CandidateDirection> kept;
    std::copy_if(directions.begin(), directions.end(), std::back_inserter(kept),
                 [&](const CandidateDirection& d) { return covers_all_anchors(d, anchors); });
    return kept;
}

}  // namespace evn
