#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "tdfdr/permute.hpp"

using namespace tdfdr;

namespace {

// Pearson statistic against a uniform expectation; passes below the 99.9% quantile.
bool chi_square_uniform(const std::vector<std::size_t>& counts) {
    double total = 0;
    for (auto c : counts) total += c;
    const double expected = total / counts.size();
    double stat = 0;
    for (auto c : counts) stat += (c - expected) * (c - expected) / expected;
    const boost::math::chi_squared_distribution<double> dist(counts.size() - 1.0);
    return stat < boost::math::quantile(dist, 0.999);
}

double abs_t(std::vector<double> a, std::vector<double> b) {
    a.insert(a.end(), b.begin(), b.end());
    return t_statistic(GroupedSamples{a, 2}, true);
}

}  // namespace

TEST_CASE("binomial coefficients") {
    CHECK(binomial(6, 3) == 20);
    CHECK(binomial(20, 10) == 184756);
    CHECK(binomial(10, 0) == 1);
    CHECK(binomial(3, 5) == 0);
    CHECK(binomial(66, 33) == 7219428434016265740ULL);
    CHECK(binomial(200, 100) == UINT64_MAX);
}

TEST_CASE("permutation budget") {
    auto b = resolve_budget(6, 3, 50);
    CHECK(b.t == 20);
    CHECK(b.mode == PermutationMode::Exhaustive);
    b = resolve_budget(20, 10, 50);
    CHECK(b.t == 50);
    CHECK(b.mode == PermutationMode::WithReplacement);
    b = resolve_budget(4, 2, 2);
    CHECK(b.t == 2);
    CHECK(b.mode == PermutationMode::WithReplacement);
    CHECK(resolve_budget(6, 3, 20).mode == PermutationMode::Exhaustive);
    CHECK_THROWS_AS(resolve_budget(6, 3, 1), InvalidArgument);
    CHECK_THROWS_AS(resolve_budget(6, 0, 10), InvalidArgument);
}

TEST_CASE("sample_regrouping is uniform over case subsets") {
    auto eng = rng::make_stream(1, {1});
    std::vector<std::size_t> counts(2, 0);
    for (int k = 0; k < 100000; ++k) counts[sample_regrouping(2, 1, eng).case_subset()[0]]++;
    CHECK(chi_square_uniform(counts));

    std::map<std::vector<std::size_t>, std::size_t> subsets;
    for (int k = 0; k < 60000; ++k) subsets[sample_regrouping(6, 3, eng).case_subset()]++;
    REQUIRE(subsets.size() == 20);
    std::vector<std::size_t> c;
    for (auto& [_, n] : subsets) c.push_back(n);
    CHECK(chi_square_uniform(c));
}

TEST_CASE("sample_regrouping edge cases and determinism") {
    auto eng = rng::make_stream(2, {});
    const auto full = sample_regrouping(3, 3, eng);
    CHECK(full.case_subset() == std::vector<std::size_t>{0, 1, 2});

    auto e1 = rng::make_stream(9, {4}), e2 = rng::make_stream(9, {4});
    for (int k = 0; k < 20; ++k) CHECK(sample_regrouping(10, 4, e1).order == sample_regrouping(10, 4, e2).order);
}

TEST_CASE("exhaustive decoys enumerate every other case subset") {
    auto eng = rng::make_stream(3, {});
    // Literal data from the contract: [10,10] vs [0,0] ranked.
    const std::vector<double> v{10, 10, 0, 0};
    const GroupedSamples s{v, 2};
    const auto budget = resolve_budget(4, 2, 50);
    REQUIRE(budget.t == 6);
    auto rs = decoy_scores(s, ScoreKind::RankSumCentered, budget, eng);
    std::sort(rs.begin(), rs.end());
    CHECK(rs == std::vector<double>{0, 0, 0, 0, 2});
    CHECK(std::count(rs.begin(), rs.end(), score(ScoreKind::RankSumCentered, s)) == 1);

    // The same data is degenerate for t; [10,11] vs [0,1] is not.
    CHECK_THROWS_AS(decoy_scores(s, ScoreKind::AbsT, budget, eng), DegenerateVariance);
    const std::vector<double> w{10, 11, 0, 1};
    auto ts = decoy_scores(GroupedSamples{w, 2}, ScoreKind::AbsT, budget, eng);
    std::vector<double> expected{abs_t({10, 0}, {11, 1}), abs_t({10, 1}, {11, 0}), abs_t({11, 0}, {10, 1}),
                                 abs_t({11, 1}, {10, 0}), abs_t({0, 1}, {10, 11})};
    std::sort(ts.begin(), ts.end());
    std::sort(expected.begin(), expected.end());
    REQUIRE(ts.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(ts[i] == doctest::Approx(expected[i]).epsilon(1e-12));
    CHECK(ts.back() == doctest::Approx(score(ScoreKind::AbsT, GroupedSamples{w, 2})));
}

TEST_CASE("decoy count and constant data") {
    auto eng = rng::make_stream(4, {});
    const std::vector<double> v{0.3, 1.2, -0.5, 2.2, 0.9, 0.1};
    CHECK(decoy_scores(GroupedSamples{v, 3}, ScoreKind::AbsT, resolve_budget(6, 3, 2), eng).size() == 1);
    CHECK(decoy_scores(GroupedSamples{v, 3}, ScoreKind::AbsT, resolve_budget(6, 3, 50), eng).size() == 19);

    const std::vector<double> flat(6, 4.0);
    const auto rs = decoy_scores(GroupedSamples{flat, 3}, ScoreKind::RankSumCentered, resolve_budget(6, 3, 10), eng);
    CHECK(rs.size() == 9);
    for (double x : rs) CHECK(x == score(ScoreKind::RankSumCentered, GroupedSamples{flat, 3}));
}

TEST_CASE("random decoys follow the permutation distribution") {
    // With n = 4, n1 = 2 the rank-sum decoys take 2 with probability 2/6 and 0 otherwise.
    auto eng = rng::make_stream(5, {});
    const std::vector<double> v{5, 6, 1, 2};
    const PermutationBudget budget{5, 5, PermutationMode::WithReplacement};
    std::size_t twos = 0, total = 0;
    for (int k = 0; k < 20000; ++k) {
        for (double x : decoy_scores(GroupedSamples{v, 2}, ScoreKind::RankSumCentered, budget, eng)) {
            twos += x == 2.0;
            ++total;
        }
    }
    const double expected = total / 3.0;
    CHECK(std::abs(twos - expected) < 4 * std::sqrt(total * (1.0 / 3) * (2.0 / 3)));
}
