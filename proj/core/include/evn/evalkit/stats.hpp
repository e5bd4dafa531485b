#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace evn::evalkit {

enum class Grouping { Related, Unrelated, Overall };
const char* to_string(Grouping g);

struct ScoreSummary {
    double mean = 0.0;
    /// Sample standard deviation (n-1) over run-level averages; 0 for one run.
    double std = 0.0;
    int n_runs = 0;
    Grouping grouping = Grouping::Overall;
    /// True when n_runs == 1 and std is 0 by convention rather than measured.
    bool single_run = false;
};

/// `run_scores[r][p]` is proposal p's score in run r. Averages proposals within
/// each run, then takes mean and sample std across runs. Throws
/// Error{EmptyGroup} or Error{RaggedRuns}.
ScoreSummary aggregate(const std::vector<std::vector<double>>& run_scores, Grouping grouping);

struct KappaResult {
    /// Empty when expected disagreement is zero.
    std::optional<double> kappa;
    int n_items = 0;
    int scale_size = 5;
    std::string weighting = "quadratic";
};

/// (i - j)^2 / (k - 1)^2 for 1-based categories.
double quadratic_weight(int i, int j, int scale_size);

/// Cohen's kappa with quadratic weights over categories 1..scale_size.
/// Throws Error{LengthMismatch} or Error{RatingOutOfRange}.
KappaResult weighted_kappa(std::span<const int> a, std::span<const int> b, int scale_size = 5);

/// Mean of weighted_kappa over every (llm, human) pair. Throws
/// Error{UndefinedPair} naming the pair whose kappa is undefined.
double pairwise_mean_kappa(const std::vector<std::vector<int>>& llm_raters,
                           const std::vector<std::vector<int>>& human_raters, int scale_size = 5);

}  // namespace evn::evalkit
