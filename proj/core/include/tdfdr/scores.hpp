#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tdfdr/error.hpp"
#include "tdfdr/rng.hpp"

namespace tdfdr {

enum class ScoreKind { AbsT, SignedT, RankSumCentered };

std::string_view to_string(ScoreKind kind) noexcept;
/// Accepts "t" / "abs-t", "signed-t" / "tsigned", "ranksum" / "rank-sum".
ScoreKind parse_score_kind(std::string_view name);

/// Non-owning view of one test's n samples: cases occupy the first
/// n_cases positions, controls the remainder.
class GroupedSamples {
public:
    /// Throws InvalidArgument unless both groups have at least two samples
    /// and every value is finite.
    GroupedSamples(std::span<const double> values, std::size_t n_cases);

    std::span<const double> values() const noexcept { return values_; }
    std::span<const double> cases() const noexcept { return values_.first(n_cases_); }
    std::span<const double> controls() const noexcept { return values_.subspan(n_cases_); }
    std::size_t n() const noexcept { return values_.size(); }
    std::size_t n_cases() const noexcept { return n_cases_; }
    std::size_t n_controls() const noexcept { return values_.size() - n_cases_; }

private:
    std::span<const double> values_;
    std::size_t n_cases_;
};

/// Pooled-variance two-sample t statistic, case mean minus control mean.
/// Throws DegenerateVariance when the pooled variance is zero.
double t_statistic(const GroupedSamples& s, bool absolute);

/// |W - n1(n+1)/2| where W is the midrank sum of the case samples.
double rank_sum_statistic(const GroupedSamples& s);

double score(ScoreKind kind, const GroupedSamples& s);

/// Scores arbitrary regroupings of one test's samples.
///
/// The samples are sorted once (by value, then by original group) and every
/// score is accumulated over that fixed slot order. Any regrouping is then a
/// mask over slots, and scores depend only on which multiset of values lands
/// in each group: bit-for-bit invariant under permutations within a group.
class RegroupScorer {
public:
    RegroupScorer(const GroupedSamples& s, ScoreKind kind);

    ScoreKind kind() const noexcept { return kind_; }
    std::size_t n() const noexcept { return sorted_.size(); }
    std::size_t n_cases() const noexcept { return n_cases_; }

    /// Slot mask of the observed grouping (1 = case).
    std::span<const std::uint8_t> target_mask() const noexcept { return target_mask_; }
    /// Sorted slot holding original sample i.
    std::size_t slot_of(std::size_t sample) const { return slot_of_.at(sample); }

    /// std::nullopt when the regrouping has zero pooled variance (t kinds only).
    std::optional<double> try_score(std::span<const std::uint8_t> case_mask) const noexcept;
    double score(std::span<const std::uint8_t> case_mask) const;
    double target() const { return score(target_mask_); }

private:
    ScoreKind kind_;
    std::size_t n_cases_;
    std::vector<double> sorted_;
    std::vector<double> midranks_;
    std::vector<std::uint8_t> target_mask_;
    std::vector<std::size_t> slot_of_;
};

/// True iff `fn` returns a bit-identical value on `trials` random
/// within-group shuffles of `s`.
template <class ScoreFn>
bool check_group_symmetry(ScoreFn&& fn, const GroupedSamples& s, std::size_t trials, rng::Engine& eng) {
    if (trials == 0) throw InvalidArgument("check_group_symmetry: trials must be >= 1");
    const auto reference = std::bit_cast<std::uint64_t>(static_cast<double>(fn(s)));
    std::vector<double> buf(s.values().begin(), s.values().end());
    const auto n1 = static_cast<std::ptrdiff_t>(s.n_cases());
    for (std::size_t k = 0; k < trials; ++k) {
        std::shuffle(buf.begin(), buf.begin() + n1, eng);
        std::shuffle(buf.begin() + n1, buf.end(), eng);
        const GroupedSamples shuffled{buf, s.n_cases()};
        if (std::bit_cast<std::uint64_t>(static_cast<double>(fn(shuffled))) != reference) return false;
    }
    return true;
}

bool check_group_symmetry(ScoreKind kind, const GroupedSamples& s, std::size_t trials, rng::Engine& eng);

}  // namespace tdfdr
