#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "tdfdr/scores.hpp"

using namespace tdfdr;

namespace {

// Plain two-pass pooled t, written independently of the library.
double naive_t(const std::vector<double>& a, const std::vector<double>& b) {
    auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
    const double ma = mean(a), mb = mean(b);
    double ss = 0;
    for (double x : a) ss += (x - ma) * (x - ma);
    for (double x : b) ss += (x - mb) * (x - mb);
    const double sp2 = ss / (a.size() + b.size() - 2.0);
    return (ma - mb) / std::sqrt(sp2 * (1.0 / a.size() + 1.0 / b.size()));
}

// Rank sum with midranks by counting, O(n^2).
double naive_rank_sum(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> all(a);
    all.insert(all.end(), b.begin(), b.end());
    double w = 0;
    for (double x : a) {
        double less = 0, equal = 0;
        for (double y : all) {
            if (y < x) less += 1;
            if (y == x) equal += 1;
        }
        w += less + (equal + 1) / 2.0;
    }
    const double n1 = a.size(), n = all.size();
    return std::abs(w - n1 * (n + 1) / 2.0);
}

std::vector<double> concat(std::vector<double> a, const std::vector<double>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

}  // namespace

TEST_CASE("t statistic on small groups") {
    const auto v = concat({2, 4}, {1, 3});
    const GroupedSamples s{v, 2};
    CHECK(t_statistic(s, false) == doctest::Approx(0.70710678).epsilon(1e-8));
    CHECK(t_statistic(s, false) == doctest::Approx(naive_t({2, 4}, {1, 3})));

    const auto same = concat({1, 2, 3}, {1, 2, 3});
    CHECK(t_statistic(GroupedSamples{same, 3}, true) == 0.0);

    const auto flat = concat({1, 1}, {1, 1});
    CHECK_THROWS_AS(t_statistic(GroupedSamples{flat, 2}, true), DegenerateVariance);
}

TEST_CASE("t statistic agrees with a two-pass oracle") {
    std::mt19937_64 eng{11};
    std::normal_distribution<double> g;
    for (int k = 0; k < 200; ++k) {
        std::vector<double> a(3 + k % 5), b(2 + k % 7);
        for (auto& x : a) x = g(eng) + 0.5;
        for (auto& x : b) x = g(eng);
        const auto v = concat(a, b);
        const GroupedSamples s{v, a.size()};
        CHECK(t_statistic(s, false) == doctest::Approx(naive_t(a, b)).epsilon(1e-12));
        CHECK(t_statistic(s, true) == doctest::Approx(std::abs(naive_t(a, b))).epsilon(1e-12));
    }
}

TEST_CASE("signed t flips sign when equal-size groups swap") {
    const std::vector<double> a{0.3, 1.9, 2.2}, b{-0.4, 0.1, 0.8};
    const auto ab = concat(a, b), ba = concat(b, a);
    CHECK(t_statistic(GroupedSamples{ab, 3}, false) ==
          doctest::Approx(-t_statistic(GroupedSamples{ba, 3}, false)).epsilon(1e-14));
}

TEST_CASE("rank sum statistic") {
    auto rs = [](std::vector<double> a, std::vector<double> b) {
        const auto v = concat(a, b);
        return rank_sum_statistic(GroupedSamples{v, a.size()});
    };
    CHECK(rs({5, 6}, {1, 2}) == 2.0);
    CHECK(rs({1, 4}, {2, 3}) == 0.0);
    CHECK(rs({1, 1}, {1, 1}) == 0.0);

    std::mt19937_64 eng{5};
    std::uniform_int_distribution<int> d(0, 6);
    for (int k = 0; k < 300; ++k) {
        std::vector<double> a(2 + k % 6), b(2 + k % 4);
        for (auto& x : a) x = d(eng);
        for (auto& x : b) x = d(eng);
        CHECK(rs(a, b) == doctest::Approx(naive_rank_sum(a, b)));
    }
}

TEST_CASE("rank sum is invariant under monotone transforms") {
    std::mt19937_64 eng{8};
    std::normal_distribution<double> g;
    for (int k = 0; k < 100; ++k) {
        std::vector<double> v(12);
        for (auto& x : v) x = g(eng);
        std::vector<double> w(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) w[i] = std::exp(3 * v[i]) + 7;
        CHECK(rank_sum_statistic(GroupedSamples{v, 5}) == rank_sum_statistic(GroupedSamples{w, 5}));
    }
}

TEST_CASE("grouped samples validation") {
    const std::vector<double> three{1, 2, 3};
    CHECK_THROWS_AS(GroupedSamples(three, 1), InvalidArgument);
    const std::vector<double> bad{1, 2, NAN, 4};
    CHECK_THROWS_AS(GroupedSamples(bad, 2), InvalidArgument);
}

TEST_CASE("regroup scorer matches direct scoring") {
    std::mt19937_64 eng{21};
    std::normal_distribution<double> g;
    for (const auto kind : {ScoreKind::AbsT, ScoreKind::SignedT, ScoreKind::RankSumCentered}) {
        for (int k = 0; k < 50; ++k) {
            std::vector<double> v(9);
            for (auto& x : v) x = std::round(g(eng) * 4) / 4;  // some ties
            const GroupedSamples s{v, 4};
            const RegroupScorer scorer{s, kind};
            const auto direct = score(kind, s);
            CHECK(scorer.target() == doctest::Approx(direct).epsilon(1e-12));
            for (std::size_t i = 0; i < v.size(); ++i) {
                CHECK(static_cast<bool>(scorer.target_mask()[scorer.slot_of(i)]) == (i < 4));
            }
        }
    }
}

TEST_CASE("score symmetry is bit exact") {
    std::mt19937_64 eng{3};
    std::normal_distribution<double> g;
    for (const auto kind : {ScoreKind::AbsT, ScoreKind::SignedT, ScoreKind::RankSumCentered}) {
        std::vector<double> v(20);
        for (auto& x : v) x = g(eng) * 1e3;
        CHECK(check_group_symmetry(kind, GroupedSamples{v, 10}, 100, eng));
    }
}

TEST_CASE("symmetry check detects an order-dependent score") {
    std::mt19937_64 eng{4};
    const std::vector<double> v{1, 2, 3, 4, 5, 6};
    auto first_case = [](const GroupedSamples& s) { return s.cases()[0]; };
    CHECK_FALSE(check_group_symmetry(first_case, GroupedSamples{v, 3}, 100, eng));
}

TEST_CASE("score kind names") {
    CHECK(parse_score_kind("t") == ScoreKind::AbsT);
    CHECK(parse_score_kind("tsigned") == ScoreKind::SignedT);
    CHECK(parse_score_kind("ranksum") == ScoreKind::RankSumCentered);
    CHECK_THROWS_AS(parse_score_kind("fold"), InvalidArgument);
}
