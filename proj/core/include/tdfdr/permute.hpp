#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "tdfdr/rng.hpp"
#include "tdfdr/scores.hpp"

namespace tdfdr {

enum class PermutationMode { WithReplacement, Exhaustive };

std::string_view to_string(PermutationMode mode) noexcept;

/// t scores per test: one target and t - 1 decoys.
struct PermutationBudget {
    std::size_t t = 0;
    std::size_t cap = 0;
    PermutationMode mode = PermutationMode::WithReplacement;
};

/// C(n, k), saturating at UINT64_MAX instead of overflowing.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k) noexcept;

/// t = min(C(n, n0), cap); exhaustive enumeration whenever all regroupings fit
/// under the cap. Throws InvalidArgument if cap < 2 or n0 is 0 or n.
PermutationBudget resolve_budget(std::size_t n, std::size_t n0, std::size_t cap);

/// An ordering of sample indices 0..n-1; the first n_cases entries are cases.
struct Regrouping {
    std::vector<std::size_t> order;
    std::size_t n_cases = 0;

    /// Case sample indices in ascending order.
    std::vector<std::size_t> case_subset() const;
};

/// Uniform over all n! orderings (the identity included).
Regrouping sample_regrouping(std::size_t n, std::size_t n_cases, rng::Engine& eng);

/// The t - 1 decoy scores of one test. WithReplacement draws independent
/// uniform regroupings; Exhaustive scores every case subset except one copy of
/// the observed grouping. Throws DegenerateVariance if any regrouping is
/// degenerate.
std::vector<double> decoy_scores(const RegroupScorer& scorer, const PermutationBudget& budget, rng::Engine& eng);
std::vector<double> decoy_scores(const GroupedSamples& s, ScoreKind kind, const PermutationBudget& budget,
                                 rng::Engine& eng);

}  // namespace tdfdr
