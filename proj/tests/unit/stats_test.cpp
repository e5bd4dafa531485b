#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "evn/core/error.hpp"
#include "evn/evalkit/stats.hpp"

namespace evn::evalkit {
namespace {

// Brute force over the explicit k x k count matrix, in counts rather than
// proportions: kappa = 1 - n * sum(w*O) / sum(w * rowsum * colsum).
std::optional<double> oracle_kappa(const std::vector<int>& a, const std::vector<int>& b, int k) {
    std::vector<std::vector<double>> o(k, std::vector<double>(k, 0.0));
    for (std::size_t t = 0; t < a.size(); ++t) o[a[t] - 1][b[t] - 1] += 1.0;
    std::vector<double> row(k, 0.0), col(k, 0.0);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            row[i] += o[i][j];
            col[j] += o[i][j];
        }
    const double n = static_cast<double>(a.size());
    double num = 0.0, den = 0.0;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            const double w = static_cast<double>((i - j) * (i - j)) / ((k - 1) * (k - 1));
            num += w * o[i][j];
            den += w * row[i] * col[j] / n;
        }
    if (den == 0.0) return std::nullopt;
    return 1.0 - num / den;
}

std::vector<int> random_ratings(std::mt19937& rng, std::size_t n, int k) {
    std::uniform_int_distribution<int> d(1, k);
    std::vector<int> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

double oracle_sample_std(const std::vector<double>& xs) {
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

TEST(Kappa, PerfectAgreement) {
    const std::vector<int> v = {3, 4, 5, 1, 2};
    EXPECT_EQ(weighted_kappa(v, v).kappa, 1.0);
}

TEST(Kappa, ConstantRatersUndefined) {
    const std::vector<int> v = {3, 3, 3, 3};
    const auto r = weighted_kappa(v, v);
    EXPECT_FALSE(r.kappa.has_value());
    EXPECT_EQ(r.n_items, 4);
}

TEST(Kappa, Weights) {
    for (int i = 1; i <= 5; ++i)
        for (int j = 1; j <= 5; ++j) EXPECT_EQ(quadratic_weight(i, j, 5), (i - j) * (i - j) / 16.0);
    EXPECT_EQ(quadratic_weight(1, 5, 5), 1.0);
    EXPECT_EQ(quadratic_weight(3, 3, 5), 0.0);
}

TEST(Kappa, Errors) {
    const std::vector<int> a = {1, 2}, b = {1}, c = {1, 6};
    EXPECT_THROW((void)weighted_kappa(a, b), Error);
    try {
        (void)weighted_kappa(a, c);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::RatingOutOfRange);
    }
    try {
        (void)weighted_kappa(std::vector<int>{}, std::vector<int>{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::LengthMismatch);
    }
}

TEST(KappaProperty, MatchesOracle) {
    std::mt19937 rng(2024);
    for (int t = 0; t < 1000; ++t) {
        const auto n = 1 + rng() % 50;
        const auto a = random_ratings(rng, n, 5);
        const auto b = random_ratings(rng, n, 5);
        const auto got = weighted_kappa(a, b, 5).kappa;
        const auto want = oracle_kappa(a, b, 5);
        ASSERT_EQ(got.has_value(), want.has_value());
        if (want) ASSERT_NEAR(*got, *want, 1e-12);
    }
}

TEST(KappaProperty, SymmetryBoundsPermutation) {
    std::mt19937 rng(77);
    for (int t = 0; t < 500; ++t) {
        const auto n = 2 + rng() % 40;
        const auto a = random_ratings(rng, n, 5);
        auto b = random_ratings(rng, n, 5);
        const auto ab = weighted_kappa(a, b).kappa;
        const auto ba = weighted_kappa(b, a).kappa;
        ASSERT_EQ(ab.has_value(), ba.has_value());
        if (!ab) continue;
        ASSERT_NEAR(*ab, *ba, 1e-12);
        ASSERT_GE(*ab, -1.0 - 1e-12);
        ASSERT_LE(*ab, 1.0 + 1e-12);
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<int> pa(n), pb(n);
        for (std::size_t i = 0; i < n; ++i) {
            pa[i] = a[perm[i]];
            pb[i] = b[perm[i]];
        }
        ASSERT_NEAR(*weighted_kappa(pa, pb).kappa, *ab, 1e-12);
    }
}

TEST(Pairwise, MeanOfFourPairs) {
    const std::vector<std::vector<int>> llm = {{4, 3, 5, 2, 4, 3}, {5, 3, 4, 2, 4, 2}};
    const std::vector<std::vector<int>> human = {{4, 4, 5, 1, 3, 3}, {3, 3, 5, 2, 5, 3}};
    double sum = 0.0;
    for (const auto& l : llm)
        for (const auto& h : human) sum += *oracle_kappa(l, h, 5);
    EXPECT_NEAR(pairwise_mean_kappa(llm, human), sum / 4.0, 1e-12);
}

TEST(Pairwise, SinglePair) {
    const std::vector<int> l = {1, 2, 3, 4}, h = {2, 2, 3, 5};
    EXPECT_NEAR(pairwise_mean_kappa({l}, {h}), *oracle_kappa(l, h, 5), 1e-12);
}

TEST(Pairwise, UndefinedPairReported) {
    try {
        (void)pairwise_mean_kappa({{3, 3, 3}, {1, 2, 3}}, {{3, 3, 3}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::UndefinedPair);
        EXPECT_EQ(e.details().at("llm_rater"), 0);
        EXPECT_EQ(e.details().at("human_rater"), 0);
    }
}

TEST(Aggregate, WorkedSequence) {
    const std::vector<double> runs = {4.5, 4.0, 4.5, 4.0, 4.25};
    std::vector<std::vector<double>> m;
    for (double r : runs) m.push_back({r});
    const auto s = aggregate(m, Grouping::Overall);
    EXPECT_NEAR(s.mean, 4.25, 1e-9);
    EXPECT_NEAR(s.std, oracle_sample_std(runs), 1e-9);
    EXPECT_EQ(s.n_runs, 5);
    EXPECT_FALSE(s.single_run);
}

TEST(Aggregate, RunLevelAveragingFirst) {
    // Two proposals per run: run averages are 4.0 and 3.0.
    const auto s = aggregate({{5.0, 3.0}, {4.0, 2.0}}, Grouping::Related);
    EXPECT_DOUBLE_EQ(s.mean, 3.5);
    EXPECT_NEAR(s.std, oracle_sample_std({4.0, 3.0}), 1e-12);
}

TEST(Aggregate, SingleRunFlagged) {
    const auto s = aggregate({{3.0, 4.0}}, Grouping::Overall);
    EXPECT_EQ(s.std, 0.0);
    EXPECT_TRUE(s.single_run);
}

TEST(Aggregate, IdenticalRunsZeroStd) {
    EXPECT_EQ(aggregate({{4.0}, {4.0}, {4.0}, {4.0}, {4.0}}, Grouping::Overall).std, 0.0);
}

TEST(Aggregate, Errors) {
    try {
        (void)aggregate({}, Grouping::Overall);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyGroup);
    }
    try {
        (void)aggregate({{1.0, 2.0}, {1.0}}, Grouping::Overall);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::RaggedRuns);
    }
}

TEST(AggregateProperty, ShiftLinearity) {
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> score(1.0, 5.0);
    for (int t = 0; t < 300; ++t) {
        const std::size_t runs = 1 + rng() % 6, props = 1 + rng() % 5;
        std::vector<std::vector<double>> m(runs, std::vector<double>(props));
        for (auto& r : m)
            for (auto& x : r) x = std::round(score(rng) * 4.0) / 4.0;
        const double c = 0.5;
        auto shifted = m;
        for (auto& r : shifted)
            for (auto& x : r) x += c;
        const auto a = aggregate(m, Grouping::Overall);
        const auto b = aggregate(shifted, Grouping::Overall);
        ASSERT_NEAR(b.mean - a.mean, c, 1e-12);
        ASSERT_NEAR(b.std, a.std, 1e-9);
    }
}

}  // namespace
}  // namespace evn::evalkit
