#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tdfdr/dataset.hpp"
#include "tdfdr/scores.hpp"

namespace tdfdr {

enum class PValueMethod { TTest, RankSum, PooledPermutation };

std::string_view to_string(PValueMethod m) noexcept;
PValueMethod parse_pvalue_method(std::string_view name);

struct PValueVector {
    std::vector<double> p;
    PValueMethod method = PValueMethod::TTest;
    std::size_t degenerate = 0;  // tests assigned p = 1 because their score was undefined
};

/// Student t tail probability with `df` degrees of freedom, via the
/// regularized incomplete beta function. One-sided means P(T >= t).
double t_pvalue(double t, double df, bool two_sided);

/// Pooled-variance t-test p-values (df = n - 2). Degenerate tests get p = 1.
PValueVector t_pvalues(const GroupedDataset& data, bool two_sided = true);

/// One empirical null built from `per_test_draws` random regroupings of every
/// test; p_j = (1 + #{pool >= target_j}) / (1 + pool size).
PValueVector pooled_permutation_pvalues(const GroupedDataset& data, ScoreKind kind, std::size_t per_test_draws,
                                        std::uint64_t seed, std::size_t threads = 1);

enum class RankSumMethod { Auto, Exact, Normal };

/// Largest n handled by exact enumeration under RankSumMethod::Auto.
inline constexpr std::size_t kExactRankSumMaxN = 12;

/// Two-sided Wilcoxon rank-sum p-value. Exact enumerates every case subset of
/// the observed midranks (ties handled exactly); Normal uses the tie-corrected
/// normal approximation with continuity correction.
double rank_sum_pvalue(const GroupedSamples& s, RankSumMethod method = RankSumMethod::Auto);

PValueVector rank_sum_pvalues(const GroupedDataset& data);

/// Benjamini-Hochberg step-up. Returns rejected indices, ascending.
std::vector<std::size_t> bh_reject(std::span<const double> p, double alpha);

struct QValues {
    double pi0 = 1.0;
    std::vector<double> q;
};

/// min(1, #{p > lambda} / ((1 - lambda) m)).
double storey_pi0(std::span<const double> p, double lambda);
QValues qvalues_with_pi0(std::span<const double> p, double pi0);
QValues storey_qvalues(std::span<const double> p, double lambda = 0.5);

/// Indices with q <= alpha, ascending.
std::vector<std::size_t> reject_by_qvalue(std::span<const double> q, double alpha);

}  // namespace tdfdr
