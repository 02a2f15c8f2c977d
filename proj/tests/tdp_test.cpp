#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "tdfdr/tdp.hpp"

using namespace tdfdr;

namespace {

bool chi_square_uniform(const std::vector<std::size_t>& counts) {
    double total = 0;
    for (auto c : counts) total += c;
    const double expected = total / counts.size();
    double stat = 0;
    for (auto c : counts) stat += (c - expected) * (c - expected) / expected;
    return stat < boost::math::quantile(boost::math::chi_squared_distribution<double>(counts.size() - 1.0), 0.999);
}

// Scans every prefix length directly.
std::size_t scan_threshold(const std::vector<Label>& labels, double r, double alpha) {
    std::size_t best = 0;
    for (std::size_t k = 1; k <= labels.size(); ++k) {
        double d = 0, t = 0;
        for (std::size_t j = 0; j < k; ++j) {
            d += labels[j] == Label::Decoy;
            t += labels[j] == Label::Target;
        }
        if ((d + 1) / (r * std::max(t, 1.0)) <= alpha) best = k;
    }
    return best;
}

std::vector<double> descending(std::size_t t) {
    std::vector<double> v(t);
    for (std::size_t i = 0; i < t; ++i) v[i] = static_cast<double>(t - i);
    return v;
}

GroupedDataset null_dataset(std::size_t m, std::uint64_t seed) {
    auto eng = rng::make_stream(seed, {});
    std::normal_distribution<double> g;
    std::vector<double> values(m * 20);
    for (auto& x : values) x = g(eng);
    std::vector<std::string> ids(m);
    for (std::size_t j = 0; j < m; ++j) ids[j] = "n" + std::to_string(j);
    return GroupedDataset::contiguous(ids, 10, 10, values);
}

}  // namespace

TEST_CASE("final score ordering puts the sentinel last") {
    const auto bottom = FinalScore::bottom();
    CHECK(bottom < FinalScore{-1e308});
    CHECK(bottom < FinalScore{-INFINITY});
    CHECK(bottom == FinalScore::bottom());
    CHECK(FinalScore{2.0} > FinalScore{1.0});
}

TEST_CASE("rank_target") {
    auto eng = rng::make_stream(1, {});
    const std::vector<double> a{1, 2, 3};
    auto r = rank_target(5, a, eng);
    CHECK(r.rank == 1);
    CHECK(r.sorted == std::vector<double>{5, 3, 2, 1});
    const std::vector<double> b{3, 2};
    CHECK(rank_target(1, b, eng).rank == 3);

    const std::vector<double> ties{2, 2, 2};
    std::vector<std::size_t> counts(4, 0);
    for (int k = 0; k < 100000; ++k) counts[rank_target(2, ties, eng).rank - 1]++;
    CHECK(chi_square_uniform(counts));
}

TEST_CASE("standard labelling branches") {
    auto eng = rng::make_stream(2, {});
    const auto sorted = descending(50);
    for (int k = 0; k < 200; ++k) {
        const auto top = label_standard(sorted, 1, 2.0, eng);
        CHECK(top.label == Label::Target);
        CHECK(top.score.value() == sorted[0]);
        const auto mid = label_standard(sorted, 20, 2.0, eng);
        CHECK(mid.label == Label::Unused);
        CHECK(mid.score.is_bottom());
        const auto low = label_standard(sorted, 40, 2.0, eng);
        CHECK(low.label == Label::Decoy);
        CHECK(low.score.value() >= sorted[12]);  // ceil(Lambda') <= 13
    }
    const auto pinned = label_standard_with_draws(sorted, 40, 2.0, 0.5, 3.2);
    CHECK(pinned.label == Label::Decoy);
    CHECK(pinned.score.value() == sorted[3]);
    CHECK(pinned.lambda == 39.5);
    // Boundaries: Lambda = t/(2r) is T, Lambda = t/2 is U.
    CHECK(label_standard_with_draws(sorted, 13, 2.0, 0.5, 1.0).label == Label::Target);
    CHECK(label_standard_with_draws(sorted, 26, 2.0, 0.0, 1.0).label == Label::Decoy);
    CHECK(label_standard_with_draws(sorted, 25, 2.0, 0.0, 1.0).label == Label::Unused);
    CHECK_THROWS_AS(label_standard(sorted, 1, 0.5, eng), InvalidArgument);
}

TEST_CASE("simplified labelling") {
    auto eng = rng::make_stream(3, {});
    const auto sorted = descending(50);
    const auto t = label_simplified(sorted, 10, eng);
    CHECK(t.label == Label::Target);
    CHECK(t.score.value() == sorted[9]);
    const auto d = label_simplified(sorted, 30, eng);
    CHECK(d.label == Label::Decoy);
    CHECK(d.score.value() == sorted[4]);

    const auto three = descending(3);
    std::vector<std::size_t> counts(2, 0);
    for (int k = 0; k < 100000; ++k) {
        const auto o = label_simplified(three, 2, eng);
        CHECK(o.score.value() == three[1]);
        counts[o.label == Label::Target]++;
    }
    CHECK(chi_square_uniform(counts));
}

TEST_CASE("threshold selection") {
    using L = Label;
    CHECK(select_threshold(std::vector<L>{L::Target, L::Target, L::Target, L::Decoy}, 1, 0.5) == 3);
    CHECK(select_threshold(std::vector<L>(80, L::Target), 1, 0.01) == 0);
    CHECK(select_threshold(std::vector<L>(100, L::Target), 1, 0.01) == 100);
    CHECK(select_threshold(std::vector<L>{}, 1, 0.1) == 0);
    CHECK(estimated_fdr(0, 0, 1) == 1.0);
    CHECK(estimated_fdr(3, 8, 2) == 0.25);
}

TEST_CASE("threshold selection matches a prefix scan") {
    auto eng = rng::make_stream(4, {});
    for (int k = 0; k < 400; ++k) {
        const std::size_t len = 1 + rng::uniform_index(eng, 300);
        const double r = std::vector<double>{1, 2, 5, 10}[k % 4];
        std::vector<Label> labels(len);
        for (auto& l : labels) l = std::vector<Label>{Label::Target, Label::Decoy, Label::Unused}[rng::uniform_index(eng, 3)];
        // Bias the head toward targets so K is usually positive.
        for (std::size_t j = 0; j < std::min<std::size_t>(len, 30); ++j) {
            if (rng::uniform01(eng) < 0.8) labels[j] = Label::Target;
        }
        const double alpha = 0.02 * (1 + k % 10);
        CHECK(select_threshold(labels, r, alpha) == scan_threshold(labels, r, alpha));
        // Monotone in alpha.
        CHECK(select_threshold(labels, r, alpha) <= select_threshold(labels, r, alpha + 0.05));
    }
}

TEST_CASE("null label frequencies") {
    const auto data = null_dataset(4000, 5);
    const auto scored = score_tests(data, ScoreKind::AbsT, 50, 17, 1);
    const double m = 4000;
    for (const double r : {1.0, 2.0, 5.0}) {
        const auto run = label_tests(scored, Variant::Standard, r, 17);
        double t = 0, d = 0;
        for (const auto& lt : run.tests) {
            t += lt.label == Label::Target;
            d += lt.label == Label::Decoy;
        }
        const double pt = 1 / (2 * r);
        CHECK(std::abs(t / m - pt) < 3.5 * std::sqrt(pt * (1 - pt) / m));
        CHECK(std::abs(d / m - 0.5) < 3.5 * std::sqrt(0.25 / m));
    }
    const auto run = label_tests(scored, Variant::Simplified, 1, 17);
    double t = 0;
    for (const auto& lt : run.tests) {
        CHECK(lt.label != Label::Unused);
        t += lt.label == Label::Target;
    }
    CHECK(std::abs(t / m - 0.5) < 3.5 * std::sqrt(0.25 / m));
}

TEST_CASE("separable data is fully rejected") {
    const std::size_t m = 100;
    std::vector<double> values(m * 20);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < 10; ++i) values[j * 20 + i] = 100 + j + 0.1 * i;
        for (std::size_t i = 10; i < 20; ++i) values[j * 20 + i] = 0.1 * i;
    }
    std::vector<std::string> ids(m, "x");
    const auto data = GroupedDataset::contiguous(ids, 10, 10, values);
    TdConfig cfg;
    cfg.variant = Variant::Simplified;
    cfg.seed = 3;
    const auto out = run_procedure(data, ScoreKind::SignedT, cfg);
    CHECK(out.K == 100);
    CHECK(out.rejected_ids.size() == 100);
    CHECK(out.targets_at_K == 100);
    CHECK(out.estimated_fdr_at_K == doctest::Approx(0.01));
}

TEST_CASE("null data edge cases") {
    const auto data = null_dataset(80, 6);
    TdConfig cfg;
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        cfg.seed = seed;
        cfg.alpha = 0.01;
        auto out = run_procedure(data, ScoreKind::AbsT, cfg);
        CHECK(out.rejected_ids.empty());
        CHECK(out.no_discoveries);
        cfg.alpha = 0.0;
        CHECK(run_procedure(data, ScoreKind::RankSumCentered, cfg).rejected_ids.empty());
    }
}

TEST_CASE("rejections are targets within K, and runs are thread independent") {
    auto eng = rng::make_stream(7, {});
    std::normal_distribution<double> g;
    const std::size_t m = 600;
    std::vector<double> values(m * 16);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < 16; ++i) values[j * 16 + i] = g(eng) + (j % 5 == 0 && i < 8 ? 2.5 : 0.0);
    }
    const auto data = GroupedDataset::contiguous(std::vector<std::string>(m, "g"), 8, 8, values);
    for (const auto variant : {Variant::Standard, Variant::Simplified, Variant::Adaptive}) {
        TdConfig cfg;
        cfg.variant = variant;
        cfg.r = variant == Variant::Standard ? 2.0 : 1.0;
        cfg.alpha = 0.1;
        cfg.seed = 99;
        cfg.adaptive_n2_min = 4;
        const auto a = run_procedure(data, ScoreKind::AbsT, cfg);
        cfg.threads = 4;
        const auto b = run_procedure(data, ScoreKind::AbsT, cfg);
        CHECK(a.rejected_ids == b.rejected_ids);
        CHECK(a.K == b.K);
        for (std::size_t j = 0; j < m; ++j) {
            CHECK(a.per_test[j].global_rank == b.per_test[j].global_rank);
            CHECK(a.per_test[j].final_score == b.per_test[j].final_score);
        }
        for (const auto id : a.rejected_ids) {
            CHECK(a.per_test[id].label == Label::Target);
            CHECK(a.per_test[id].global_rank <= a.K);
        }
        std::size_t targets_in_k = 0;
        for (const auto& lt : a.per_test) targets_in_k += lt.global_rank <= a.K && lt.label == Label::Target;
        CHECK(targets_in_k == a.rejected_ids.size());
    }
}

TEST_CASE("adaptive helpers") {
    const std::vector<double> grid{1, 2, 5, 10};
    const std::vector<std::size_t> rej{0, 3, 10, 8};
    CHECK(choose_r(grid, rej) == 2);
    const std::vector<std::size_t> tied{4, 4, 1, 4};
    CHECK(choose_r(grid, tied) == 0);

    TdConfig cfg;
    CHECK(resolve_n2(10, 10, cfg) == 5);
    CHECK(resolve_n2(30, 30, cfg) == 5);
    CHECK_THROWS_AS(resolve_n2(8, 10, cfg), InvalidArgument);
    cfg.adaptive_n2 = N2Policy{false, 6};
    CHECK(resolve_n2(12, 14, cfg) == 6);
    CHECK_THROWS_AS(resolve_n2(10, 14, cfg), InvalidArgument);
}

TEST_CASE("adaptive run reports its choice") {
    const auto data = null_dataset(200, 8);
    TdConfig cfg;
    cfg.variant = Variant::Adaptive;
    cfg.seed = 1;
    cfg.alpha = 0.05;
    cfg.adaptive_r_grid = {1};
    const auto out = run_procedure(data, ScoreKind::AbsT, cfg);
    REQUIRE(out.adaptive.has_value());
    CHECK(out.adaptive->r_max == 1.0);
    CHECK(out.adaptive->n2 == 5);
    CHECK(out.r == 1.0);
    CHECK(out.t == 50);
    for (const auto& lt : out.per_test) {
        if (!lt.degenerate) CHECK(lt.label != Label::Unused);  // r = 1 never leaves U
    }
}

TEST_CASE("config validation") {
    TdConfig cfg;
    cfg.alpha = 1.5;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg = {};
    cfg.max_permutations = 1;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    cfg = {};
    cfg.r = 0.5;
    cfg.variant = Variant::Standard;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    CHECK(parse_variant("adaptive") == Variant::Adaptive);
    CHECK_THROWS_AS(parse_variant("fancy"), InvalidArgument);
}
