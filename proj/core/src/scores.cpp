#include "tdfdr/scores.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace tdfdr {

std::string_view to_string(ScoreKind kind) noexcept {
    switch (kind) {
        case ScoreKind::AbsT: return "t";
        case ScoreKind::SignedT: return "signed-t";
        case ScoreKind::RankSumCentered: return "ranksum";
    }
    return "unknown";
}

ScoreKind parse_score_kind(std::string_view name) {
    if (name == "t" || name == "abs-t" || name == "abst") return ScoreKind::AbsT;
    if (name == "signed-t" || name == "tsigned" || name == "signed") return ScoreKind::SignedT;
    if (name == "ranksum" || name == "rank-sum" || name == "wilcoxon") return ScoreKind::RankSumCentered;
    throw InvalidArgument("unknown score kind '" + std::string(name) + "'");
}

GroupedSamples::GroupedSamples(std::span<const double> values, std::size_t n_cases)
    : values_{values}, n_cases_{n_cases} {
    if (n_cases < 2 || values.size() < n_cases + 2) {
        throw InvalidArgument("GroupedSamples: need at least two cases and two controls (n=" +
                              std::to_string(values.size()) + ", n1=" + std::to_string(n_cases) + ")");
    }
    for (const double v : values) {
        if (!std::isfinite(v)) throw InvalidArgument("GroupedSamples: non-finite value");
    }
}

RegroupScorer::RegroupScorer(const GroupedSamples& s, ScoreKind kind) : kind_{kind}, n_cases_{s.n_cases()} {
    const std::size_t n = s.n();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const auto values = s.values();
    // Ties on value put controls before cases so the slot layout depends only
    // on the (value, group) multiset.
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (values[a] != values[b]) return values[a] < values[b];
        const bool ca = a < n_cases_;
        const bool cb = b < n_cases_;
        return ca < cb;
    });

    sorted_.resize(n);
    target_mask_.resize(n);
    slot_of_.resize(n);
    for (std::size_t slot = 0; slot < n; ++slot) {
        sorted_[slot] = values[idx[slot]];
        target_mask_[slot] = idx[slot] < n_cases_ ? 1 : 0;
        slot_of_[idx[slot]] = slot;
    }

    if (kind_ == ScoreKind::RankSumCentered) {
        midranks_.resize(n);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && sorted_[j + 1] == sorted_[i]) ++j;
            // 1-based ranks i+1 .. j+1 share their average
            const double mid = static_cast<double>(i + j + 2) / 2.0;
            for (std::size_t k = i; k <= j; ++k) midranks_[k] = mid;
            i = j + 1;
        }
    }
}

std::optional<double> RegroupScorer::try_score(std::span<const std::uint8_t> case_mask) const noexcept {
    const std::size_t n = sorted_.size();
    if (kind_ == ScoreKind::RankSumCentered) {
        // midranks are multiples of 0.5, so the sum is exact in any order
        double w = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (case_mask[i]) w += midranks_[i];
        }
        const double expected = static_cast<double>(n_cases_) * static_cast<double>(n + 1) / 2.0;
        return std::fabs(w - expected);
    }

    const std::size_t n1 = n_cases_;
    const std::size_t n0 = n - n1;
    double sum1 = 0.0;
    double sum0 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (case_mask[i]) {
            sum1 += sorted_[i];
        } else {
            sum0 += sorted_[i];
        }
    }
    const double mean1 = sum1 / static_cast<double>(n1);
    const double mean0 = sum0 / static_cast<double>(n0);
    double ss1 = 0.0;
    double ss0 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (case_mask[i]) {
            const double d = sorted_[i] - mean1;
            ss1 += d * d;
        } else {
            const double d = sorted_[i] - mean0;
            ss0 += d * d;
        }
    }
    const double pooled = (ss1 + ss0) / static_cast<double>(n - 2);
    if (!(pooled > 0.0)) return std::nullopt;
    const double se = std::sqrt(pooled * (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n0)));
    const double t = (mean1 - mean0) / se;
    return kind_ == ScoreKind::AbsT ? std::fabs(t) : t;
}

double RegroupScorer::score(std::span<const std::uint8_t> case_mask) const {
    if (auto v = try_score(case_mask)) return *v;
    throw DegenerateVariance("pooled variance is zero");
}

double t_statistic(const GroupedSamples& s, bool absolute) {
    return RegroupScorer(s, absolute ? ScoreKind::AbsT : ScoreKind::SignedT).target();
}

double rank_sum_statistic(const GroupedSamples& s) {
    return RegroupScorer(s, ScoreKind::RankSumCentered).target();
}

double score(ScoreKind kind, const GroupedSamples& s) {
    return RegroupScorer(s, kind).target();
}

bool check_group_symmetry(ScoreKind kind, const GroupedSamples& s, std::size_t trials, rng::Engine& eng) {
    return check_group_symmetry([kind](const GroupedSamples& g) { return score(kind, g); }, s, trials, eng);
}

}  // namespace tdfdr
