#include "evn/evalkit/stats.hpp"

#include <cmath>

#include "evn/core/error.hpp"

namespace evn::evalkit {

const char* to_string(Grouping g) {
    switch (g) {
        case Grouping::Related: return "related";
        case Grouping::Unrelated: return "unrelated";
        case Grouping::Overall: return "overall";
    }
    return "overall";
}

ScoreSummary aggregate(const std::vector<std::vector<double>>& run_scores, Grouping grouping) {
    if (run_scores.empty() || run_scores.front().empty())
        throw Error(ErrorCode::EmptyGroup, std::string("no scores in group ") + to_string(grouping),
                    {{"grouping", to_string(grouping)}});
    const auto width = run_scores.front().size();
    std::vector<double> run_means;
    for (std::size_t r = 0; r < run_scores.size(); ++r) {
        const auto& run = run_scores[r];
        if (run.size() != width)
            throw Error(ErrorCode::RaggedRuns,
                        "run " + std::to_string(r) + " has " + std::to_string(run.size()) + " proposals, expected " +
                            std::to_string(width),
                        {{"run", r}, {"size", run.size()}, {"expected", width}});
        double sum = 0.0;
        for (double v : run) sum += v;
        run_means.push_back(sum / static_cast<double>(width));
    }

    ScoreSummary s;
    s.grouping = grouping;
    s.n_runs = static_cast<int>(run_means.size());
    double sum = 0.0;
    for (double m : run_means) sum += m;
    s.mean = sum / static_cast<double>(s.n_runs);
    if (s.n_runs == 1) {
        s.single_run = true;
        return s;
    }
    double ss = 0.0;
    for (double m : run_means) ss += (m - s.mean) * (m - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.n_runs - 1));
    return s;
}

double quadratic_weight(int i, int j, int scale_size) {
    const double d = i - j;
    const double span = scale_size - 1;
    return d * d / (span * span);
}

KappaResult weighted_kappa(std::span<const int> a, std::span<const int> b, int scale_size) {
    if (scale_size < 2) throw Error(ErrorCode::InvalidArgument, "scale_size must be at least 2");
    if (a.size() != b.size() || a.empty())
        throw Error(ErrorCode::LengthMismatch,
                    "rating vectors must have equal non-zero length (" + std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()) + ")",
                    {{"length_a", a.size()}, {"length_b", b.size()}});
    for (std::size_t t = 0; t < a.size(); ++t)
        for (int r : {a[t], b[t]})
            if (r < 1 || r > scale_size)
                throw Error(ErrorCode::RatingOutOfRange,
                            "rating " + std::to_string(r) + " at item " + std::to_string(t) + " outside 1.." +
                                std::to_string(scale_size),
                            {{"item", t}, {"rating", r}});

    const auto k = static_cast<std::size_t>(scale_size);
    const double n = static_cast<double>(a.size());
    std::vector<double> observed(k * k, 0.0);
    std::vector<double> row(k, 0.0);
    std::vector<double> col(k, 0.0);
    for (std::size_t t = 0; t < a.size(); ++t) {
        const auto i = static_cast<std::size_t>(a[t] - 1);
        const auto j = static_cast<std::size_t>(b[t] - 1);
        observed[i * k + j] += 1.0 / n;
        row[i] += 1.0 / n;
        col[j] += 1.0 / n;
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            const double w = quadratic_weight(static_cast<int>(i) + 1, static_cast<int>(j) + 1, scale_size);
            num += w * observed[i * k + j];
            den += w * row[i] * col[j];
        }

    KappaResult out;
    out.n_items = static_cast<int>(a.size());
    out.scale_size = scale_size;
    if (den > 0.0) out.kappa = 1.0 - num / den;
    return out;
}

double pairwise_mean_kappa(const std::vector<std::vector<int>>& llm_raters,
                           const std::vector<std::vector<int>>& human_raters, int scale_size) {
    if (llm_raters.empty() || human_raters.empty())
        throw Error(ErrorCode::InvalidArgument, "at least one LLM and one human rater are required");
    double sum = 0.0;
    int pairs = 0;
    for (std::size_t l = 0; l < llm_raters.size(); ++l)
        for (std::size_t h = 0; h < human_raters.size(); ++h) {
            const auto r = weighted_kappa(llm_raters[l], human_raters[h], scale_size);
            if (!r.kappa)
                throw Error(ErrorCode::UndefinedPair,
                            "kappa undefined for LLM rater " + std::to_string(l) + " and human rater " + std::to_string(h),
                            {{"llm_rater", l}, {"human_rater", h}});
            sum += *r.kappa;
            ++pairs;
        }
    return sum / pairs;
}

}  // namespace evn::evalkit
