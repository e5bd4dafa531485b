#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evn/core/types.hpp"

namespace evn {

/// Indices of the best min(k, n) assumptions ordered by descending
/// feasibility * novelty. Ties go to the higher novelty, then to the earlier
/// position in `assumptions`.
std::vector<std::size_t> rank_assumptions(std::span<const HiddenAssumption> assumptions, int k);

/// Same ordering as rank_assumptions, returning the assumptions themselves.
/// Throws EmptyAssumptionSet when `assumptions` is empty.
std::vector<HiddenAssumption> select_assumptions(std::span<const HiddenAssumption> assumptions, int k = 1);

/// Case-folds, strips punctuation and collapses whitespace.
std::string normalize_for_match(std::string_view text);

/// Case-folds and collapses whitespace; punctuation is kept.
std::string normalize_whitespace(std::string_view text);

/// Keeps the directions whose normalized statement contains every normalized
/// anchor, preserving input order. Throws EmptyAnchorSet.
std::vector<CandidateDirection> filter_by_anchors(std::span<const CandidateDirection> directions,
                                                  const AnchorSet& anchors);

/// True when `direction` covers every anchor (the predicate behind filter_by_anchors).
bool covers_all_anchors(const CandidateDirection& direction, const AnchorSet& anchors);

}  // namespace evn
