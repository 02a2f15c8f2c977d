#include "tdfdr/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <boost/math/special_functions/beta.hpp>

#include "tdfdr/error.hpp"
#include "tdfdr/parallel.hpp"
#include "tdfdr/permute.hpp"
#include "tdfdr/rng.hpp"

namespace tdfdr {

std::string_view to_string(PValueMethod m) noexcept {
    switch (m) {
        case PValueMethod::TTest: return "ttest";
        case PValueMethod::RankSum: return "ranksum";
        case PValueMethod::PooledPermutation: return "permutation";
    }
    return "unknown";
}

PValueMethod parse_pvalue_method(std::string_view name) {
    if (name == "ttest" || name == "t") return PValueMethod::TTest;
    if (name == "ranksum" || name == "rank-sum") return PValueMethod::RankSum;
    if (name == "permutation" || name == "pooled-permutation") return PValueMethod::PooledPermutation;
    throw InvalidArgument("unknown p-value method '" + std::string(name) + "'");
}

double t_pvalue(double t, double df, bool two_sided) {
    if (!(df > 0.0)) throw InvalidArgument("t_pvalue: degrees of freedom must be positive");
    if (std::isnan(t)) throw InvalidArgument("t_pvalue: t is NaN");
    double two = 0.0;
    if (std::isinf(t)) {
        two = 0.0;
    } else {
        // P(|T| >= |t|) = I_{df/(df+t^2)}(df/2, 1/2)
        const double x = df / (df + t * t);
        two = boost::math::ibeta(df / 2.0, 0.5, x);
    }
    if (two_sided) return std::clamp(two, 0.0, 1.0);
    const double upper = t >= 0.0 ? two / 2.0 : 1.0 - two / 2.0;
    return std::clamp(upper, 0.0, 1.0);
}

PValueVector t_pvalues(const GroupedDataset& data, bool two_sided) {
    PValueVector out;
    out.method = PValueMethod::TTest;
    out.p.resize(data.m());
    const double df = static_cast<double>(data.n() - 2);
    std::vector<double> buffer;
    for (std::size_t j = 0; j < data.m(); ++j) {
        const auto s = data.samples(j, buffer);
        const RegroupScorer scorer(s, ScoreKind::SignedT);
        if (const auto t = scorer.try_score(scorer.target_mask())) {
            out.p[j] = t_pvalue(*t, df, two_sided);
        } else {
            out.p[j] = 1.0;
            ++out.degenerate;
        }
    }
    return out;
}

PValueVector pooled_permutation_pvalues(const GroupedDataset& data, ScoreKind kind, std::size_t per_test_draws,
                                        std::uint64_t seed, std::size_t threads) {
    if (per_test_draws < 1) throw InvalidArgument("pooled permutation: per_test_draws must be >= 1");
    const std::size_t m = data.m();
    const PermutationBudget budget{per_test_draws + 1, per_test_draws + 1, PermutationMode::WithReplacement};

    std::vector<double> targets(m, 0.0);
    std::vector<std::uint8_t> usable(m, 0);
    std::vector<std::vector<double>> draws(m);
    parallel_for(m, threads, [&](std::size_t j) {
        auto eng = rng::make_stream(seed, {rng::kPooledStream, j});
        std::vector<double> buffer;
        const RegroupScorer scorer(data.samples(j, buffer), kind);
        const auto target = scorer.try_score(scorer.target_mask());
        if (!target) return;
        try {
            draws[j] = decoy_scores(scorer, budget, eng);
        } catch (const DegenerateVariance&) {
            return;
        }
        targets[j] = *target;
        usable[j] = 1;
    });

    std::vector<double> pool;
    pool.reserve(m * per_test_draws);
    for (std::size_t j = 0; j < m; ++j) pool.insert(pool.end(), draws[j].begin(), draws[j].end());
    std::sort(pool.begin(), pool.end());

    PValueVector out;
    out.method = PValueMethod::PooledPermutation;
    out.p.resize(m, 1.0);
    const double denom = static_cast<double>(pool.size() + 1);
    for (std::size_t j = 0; j < m; ++j) {
        if (!usable[j]) {
            ++out.degenerate;
            continue;
        }
        const auto at_least = static_cast<std::size_t>(pool.end() - std::lower_bound(pool.begin(), pool.end(), targets[j]));
        out.p[j] = static_cast<double>(at_least + 1) / denom;
    }
    return out;
}

double rank_sum_pvalue(const GroupedSamples& s, RankSumMethod method) {
    const std::size_t n = s.n();
    if (method == RankSumMethod::Auto) method = n <= kExactRankSumMaxN ? RankSumMethod::Exact : RankSumMethod::Normal;

    const RegroupScorer scorer(s, ScoreKind::RankSumCentered);
    const double observed = scorer.target();

    if (method == RankSumMethod::Exact) {
        const std::uint64_t total = binomial(n, s.n_cases());
        if (total > 50'000'000ULL) throw InvalidArgument("exact rank-sum enumeration too large");
        const PermutationBudget all{static_cast<std::size_t>(total), static_cast<std::size_t>(total),
                                    PermutationMode::Exhaustive};
        rng::Engine unused{0};
        const auto others = decoy_scores(scorer, all, unused);
        // centered statistics are multiples of 0.5, so comparisons are exact
        const auto extreme = std::count_if(others.begin(), others.end(), [&](double v) { return v >= observed; });
        return static_cast<double>(extreme + 1) / static_cast<double>(total);
    }

    std::vector<double> sorted(s.values().begin(), s.values().end());
    std::sort(sorted.begin(), sorted.end());
    double tie_term = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && sorted[j] == sorted[i]) ++j;
        const double c = static_cast<double>(j - i);
        tie_term += c * c * c - c;
        i = j;
    }
    const double nd = static_cast<double>(n);
    const double n1 = static_cast<double>(s.n_cases());
    const double n0 = static_cast<double>(s.n_controls());
    const double variance = n1 * n0 / 12.0 * ((nd + 1.0) - tie_term / (nd * (nd - 1.0)));
    if (!(variance > 0.0)) return 1.0;
    const double z = std::max(0.0, observed - 0.5) / std::sqrt(variance);
    return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

PValueVector rank_sum_pvalues(const GroupedDataset& data) {
    PValueVector out;
    out.method = PValueMethod::RankSum;
    out.p.resize(data.m());
    std::vector<double> buffer;
    for (std::size_t j = 0; j < data.m(); ++j) out.p[j] = rank_sum_pvalue(data.samples(j, buffer));
    return out;
}

namespace {

std::vector<std::size_t> order_by_p(std::span<const double> p) {
    std::vector<std::size_t> order(p.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
    return order;
}

void check_pvalues(std::span<const double> p) {
    for (const double v : p) {
        if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("p-values must lie in [0, 1]");
    }
}

}  // namespace

std::vector<std::size_t> bh_reject(std::span<const double> p, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
    check_pvalues(p);
    const auto order = order_by_p(p);
    const double m = static_cast<double>(p.size());
    std::size_t k_max = 0;
    for (std::size_t k = 1; k <= order.size(); ++k) {
        if (m * p[order[k - 1]] / static_cast<double>(k) <= alpha) k_max = k;
    }
    std::vector<std::size_t> out(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k_max));
    std::sort(out.begin(), out.end());
    return out;
}

double storey_pi0(std::span<const double> p, double lambda) {
    if (!(lambda >= 0.0 && lambda < 1.0)) throw InvalidArgument("storey lambda must lie in [0, 1)");
    if (p.empty()) return 1.0;
    const auto above = std::count_if(p.begin(), p.end(), [&](double v) { return v > lambda; });
    return std::min(1.0, static_cast<double>(above) / ((1.0 - lambda) * static_cast<double>(p.size())));
}

QValues qvalues_with_pi0(std::span<const double> p, double pi0) {
    check_pvalues(p);
    if (!(pi0 >= 0.0 && pi0 <= 1.0)) throw InvalidArgument("pi0 must lie in [0, 1]");
    QValues out;
    out.pi0 = pi0;
    out.q.assign(p.size(), 1.0);
    const auto order = order_by_p(p);
    const double scale = pi0 * static_cast<double>(p.size());
    double running = 1.0;
    for (std::size_t k = order.size(); k >= 1; --k) {
        const double candidate = scale * p[order[k - 1]] / static_cast<double>(k);
        running = std::min(running, candidate);
        out.q[order[k - 1]] = running;
    }
    return out;
}

QValues storey_qvalues(std::span<const double> p, double lambda) {
    return qvalues_with_pi0(p, storey_pi0(p, lambda));
}

std::vector<std::size_t> reject_by_qvalue(std::span<const double> q, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < q.size(); ++j) {
        if (q[j] <= alpha) out.push_back(j);
    }
    return out;
}

}  // namespace tdfdr
