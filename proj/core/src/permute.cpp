#include "tdfdr/permute.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "tdfdr/error.hpp"

namespace tdfdr {

std::string_view to_string(PermutationMode mode) noexcept {
    return mode == PermutationMode::Exhaustive ? "exhaustive" : "with-replacement";
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) noexcept {
    if (k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t result = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        // result * (n - k + i) / i is integral; divide out gcd(result, i) first
        const std::uint64_t g = std::gcd(result, i);
        const std::uint64_t factor = (n - k + i) / (i / g);
        if (__builtin_mul_overflow(result / g, factor, &result)) return std::numeric_limits<std::uint64_t>::max();
    }
    return result;
}

PermutationBudget resolve_budget(std::size_t n, std::size_t n0, std::size_t cap) {
    if (cap < 2) throw InvalidArgument("permutation cap must be >= 2 (got " + std::to_string(cap) + ")");
    if (n0 == 0 || n0 >= n) {
        throw InvalidArgument("resolve_budget: n0 must lie strictly between 0 and n (n=" + std::to_string(n) +
                              ", n0=" + std::to_string(n0) + ")");
    }
    const std::uint64_t regroupings = binomial(n, n0);
    PermutationBudget b;
    b.cap = cap;
    if (regroupings <= cap) {
        b.t = static_cast<std::size_t>(regroupings);
        b.mode = PermutationMode::Exhaustive;
    } else {
        b.t = cap;
        b.mode = PermutationMode::WithReplacement;
    }
    return b;
}

std::vector<std::size_t> Regrouping::case_subset() const {
    std::vector<std::size_t> out(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_cases));
    std::sort(out.begin(), out.end());
    return out;
}

Regrouping sample_regrouping(std::size_t n, std::size_t n_cases, rng::Engine& eng) {
    if (n_cases > n) throw InvalidArgument("sample_regrouping: n_cases exceeds n");
    Regrouping g;
    g.n_cases = n_cases;
    g.order.resize(n);
    std::iota(g.order.begin(), g.order.end(), std::size_t{0});
    std::shuffle(g.order.begin(), g.order.end(), eng);
    return g;
}

namespace {

double checked_score(const RegroupScorer& scorer, std::span<const std::uint8_t> mask) {
    if (auto v = scorer.try_score(mask)) return *v;
    throw DegenerateVariance("regrouping has zero pooled variance");
}

}  // namespace

std::vector<double> decoy_scores(const RegroupScorer& scorer, const PermutationBudget& budget, rng::Engine& eng) {
    const std::size_t n = scorer.n();
    const std::size_t n1 = scorer.n_cases();
    if (budget.t < 2) throw InvalidArgument("decoy_scores: budget t must be >= 2");

    std::vector<double> out;
    out.reserve(budget.t - 1);
    std::vector<std::uint8_t> mask(n, 0);

    if (budget.mode == PermutationMode::WithReplacement) {
        std::vector<std::size_t> slots(n);
        std::iota(slots.begin(), slots.end(), std::size_t{0});
        for (std::size_t d = 0; d + 1 < budget.t; ++d) {
            // Partial Fisher-Yates: the first n1 entries become a uniform
            // n1-subset, the same law as the case prefix of a uniform ordering.
            for (std::size_t i = 0; i < n1; ++i) {
                const std::size_t j = i + rng::uniform_index(eng, n - i);
                std::swap(slots[i], slots[j]);
            }
            std::fill(mask.begin(), mask.end(), std::uint8_t{0});
            for (std::size_t i = 0; i < n1; ++i) mask[slots[i]] = 1;
            out.push_back(checked_score(scorer, mask));
        }
        return out;
    }

    const std::uint64_t total = binomial(n, n1);
    if (budget.t != total) {
        throw InvalidArgument("decoy_scores: exhaustive budget t=" + std::to_string(budget.t) +
                              " does not match C(n, n1)=" + std::to_string(total));
    }
    const auto target = scorer.target_mask();
    bool skipped_original = false;
    std::vector<std::size_t> comb(n1);
    std::iota(comb.begin(), comb.end(), std::size_t{0});
    while (true) {
        std::fill(mask.begin(), mask.end(), std::uint8_t{0});
        for (const auto c : comb) mask[c] = 1;
        if (!skipped_original && std::equal(mask.begin(), mask.end(), target.begin())) {
            skipped_original = true;
        } else {
            out.push_back(checked_score(scorer, mask));
        }
        // next combination in lexicographic order
        std::size_t i = n1;
        while (i > 0 && comb[i - 1] == n - n1 + (i - 1)) --i;
        if (i == 0) break;
        ++comb[i - 1];
        for (std::size_t k = i; k < n1; ++k) comb[k] = comb[k - 1] + 1;
    }
    return out;
}

std::vector<double> decoy_scores(const GroupedSamples& s, ScoreKind kind, const PermutationBudget& budget,
                                 rng::Engine& eng) {
    return decoy_scores(RegroupScorer(s, kind), budget, eng);
}

}  // namespace tdfdr
