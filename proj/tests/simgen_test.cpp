#include <doctest.h>

#include <cmath>
#include <vector>

#include "tdfdr/simgen.hpp"

using namespace tdfdr;

namespace {

struct Moments {
    double mean = 0, var = 0;
};

Moments moments(const std::vector<double>& v) {
    Moments m;
    for (double x : v) m.mean += x;
    m.mean /= v.size();
    for (double x : v) m.var += (x - m.mean) * (x - m.mean);
    m.var /= v.size() - 1;
    return m;
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    const auto ma = moments(a), mb = moments(b);
    double c = 0;
    for (std::size_t i = 0; i < a.size(); ++i) c += (a[i] - ma.mean) * (b[i] - mb.mean);
    return c / (a.size() - 1) / std::sqrt(ma.var * mb.var);
}

// Same-sample entries of tests 0 and 1 across many replicates.
std::pair<std::vector<double>, std::vector<double>> cross_test_pairs(SimSpec spec, std::size_t reps) {
    spec.m = 2;
    spec.false_fraction = 0;
    std::vector<double> a, b;
    for (std::size_t r = 0; r < reps; ++r) {
        const auto d = generate(spec, r);
        a.push_back(d.data.row(0)[3]);
        b.push_back(d.data.row(1)[3]);
    }
    return {a, b};
}

// Pools case samples of the false-null tests whose position in the cycle is k.
std::vector<double> cycle_cases(const SimulatedDataset& d, std::size_t first_false, std::size_t k) {
    std::vector<double> out;
    for (std::size_t j = first_false + k; j < d.data.m(); j += 4) {
        const auto row = d.data.row(j);
        out.insert(out.end(), row.begin(), row.begin() + d.data.n_cases());
    }
    return out;
}

}  // namespace

TEST_CASE("normal null entries are standard normal") {
    SimSpec spec;
    spec.m = 50000;
    spec.false_fraction = 0;
    spec.seed = 1;
    const auto d = gen_normal(spec, 0);
    const auto mo = moments(d.data.values());
    CHECK(d.data.values().size() == 1000000);
    CHECK(std::abs(mo.mean) < 3e-3);
    CHECK(std::abs(mo.var - 1) < 3 * std::sqrt(2.0 / 1e6));
    CHECK(d.false_null_count() == 0);
}

TEST_CASE("normal shared factor gives correlation rho") {
    SimSpec spec;
    spec.rho = 0.8;
    spec.seed = 2;
    const auto [a, b] = cross_test_pairs(spec, 100000);
    CHECK(correlation(a, b) == doctest::Approx(0.8).epsilon(0.025));
    CHECK(moments(a).var == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("normal false nulls cycle through case means") {
    SimSpec spec;
    spec.m = 1000;
    spec.seed = 3;
    const auto d = gen_normal(spec, 0);
    CHECK(d.false_null_count() == 100);
    for (std::size_t j = 0; j < 1000; ++j) CHECK(d.false_null[j] == (j >= 900));
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(std::abs(moments(cycle_cases(d, 900, k)).mean - (k + 1.0)) < 0.25);
    }
    std::vector<double> controls;
    for (std::size_t j = 900; j < 1000; ++j) {
        const auto row = d.data.row(j);
        controls.insert(controls.end(), row.begin() + 10, row.end());
    }
    CHECK(std::abs(moments(controls).mean) < 0.15);
}

TEST_CASE("gamma models") {
    SimSpec spec;
    spec.model = SimModel::GammaIndep;
    spec.m = 50000;
    spec.false_fraction = 0;
    spec.seed = 4;
    const auto mo = moments(gen_gamma(spec, 0).data.values());
    CHECK(mo.mean == doctest::Approx(1.0).epsilon(0.005));
    CHECK(mo.var == doctest::Approx(1.0).epsilon(0.02));

    spec.model = SimModel::GammaDep;
    const auto [a, b] = cross_test_pairs(spec, 100000);
    CHECK(moments(a).mean == doctest::Approx(5.0).epsilon(0.01));
    CHECK(moments(a).var == doctest::Approx(5.0).epsilon(0.03));
    CHECK(correlation(a, b) == doctest::Approx(0.8).epsilon(0.025));

    spec.model = SimModel::GammaIndep;
    spec.m = 2000;
    spec.false_fraction = 0.1;
    const auto d = gen_gamma(spec, 0);
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(std::abs(moments(cycle_cases(d, 1800, k)).mean - (k + 2.0)) < 0.35);
    }
}

TEST_CASE("small adaptive scenario") {
    double case_mean = 0;
    for (std::size_t r = 0; r < 20; ++r) {
        const auto d = gen_adaptive_small(r, 9);
        REQUIRE(d.data.m() == 200);
        REQUIRE(d.data.n_cases() == 10);
        REQUIRE(d.data.n_controls() == 10);
        CHECK(d.false_null_count() == 20);
        for (std::size_t j = 0; j < 200; ++j) CHECK(d.false_null[j] == (j >= 180));
        case_mean += moments(cycle_cases(d, 180, 0)).mean + moments(cycle_cases(d, 180, 1)).mean +
                     moments(cycle_cases(d, 180, 2)).mean + moments(cycle_cases(d, 180, 3)).mean;
        std::vector<double> nulls(d.data.values().begin(), d.data.values().begin() + 180 * 20);
        const auto mo = moments(nulls);
        CHECK(std::abs(mo.mean) < 0.08);
        CHECK(std::abs(mo.var - 1) < 0.12);
    }
    CHECK(case_mean / 80 == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("generation is reproducible and replicate dependent") {
    SimSpec spec;
    spec.m = 300;
    spec.seed = 10;
    spec.rho = 0.4;
    const auto a = generate(spec, 3), b = generate(spec, 3), c = generate(spec, 4);
    CHECK(a.data.values() == b.data.values());
    CHECK(a.false_null == b.false_null);
    CHECK(a.data.values() != c.data.values());
    spec.threads = 4;
    CHECK(generate(spec, 3).data.values() == a.data.values());
}

TEST_CASE("spec validation") {
    SimSpec spec;
    spec.rho = 1.0;
    CHECK_THROWS_AS(spec.validate(), InvalidArgument);
    spec = {};
    spec.false_fraction = 1.5;
    CHECK_THROWS_AS(spec.validate(), InvalidArgument);
    spec = {};
    spec.m = 10001;
    spec.false_fraction = 0.01;
    CHECK(spec.false_nulls() == 100);
    CHECK(parse_sim_model("gamma-dep") == SimModel::GammaDep);
}
