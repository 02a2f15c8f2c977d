#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tdfdr/dataset.hpp"
#include "tdfdr/permute.hpp"
#include "tdfdr/rng.hpp"
#include "tdfdr/scores.hpp"

namespace tdfdr {

enum class Variant { Standard, Simplified, Adaptive };
enum class Label : char { Target = 'T', Decoy = 'D', Unused = 'U' };

std::string_view to_string(Variant v) noexcept;
Variant parse_variant(std::string_view name);
char to_char(Label l) noexcept;

/// A final score, or the bottom sentinel that orders strictly below every
/// real score. Sentinels compare equal to each other.
class FinalScore {
public:
    constexpr FinalScore() noexcept = default;
    constexpr explicit FinalScore(double v) noexcept : value_{v}, bottom_{false} {}
    static constexpr FinalScore bottom() noexcept { return FinalScore{}; }

    constexpr bool is_bottom() const noexcept { return bottom_; }
    constexpr double value() const noexcept { return value_; }

    constexpr std::partial_ordering operator<=>(const FinalScore& o) const noexcept {
        if (bottom_ || o.bottom_) return static_cast<int>(!bottom_) <=> static_cast<int>(!o.bottom_);
        return value_ <=> o.value_;
    }
    constexpr bool operator==(const FinalScore& o) const noexcept { return (*this <=> o) == 0; }

private:
    double value_ = -std::numeric_limits<double>::infinity();
    bool bottom_ = true;
};

struct N2Policy {
    bool automatic = true;
    std::size_t fixed = 0;
};

struct TdConfig {
    Variant variant = Variant::Simplified;
    double r = 1.0;
    double alpha = 0.05;
    std::size_t max_permutations = 50;  // tau: cap on t
    std::uint64_t seed = 0;
    std::vector<double> adaptive_r_grid{1, 2, 5, 10, 15, 20, 25};
    N2Policy adaptive_n2{};
    std::size_t adaptive_n2_min = 5;
    std::size_t adaptive_part1_cap = 252;
    std::size_t threads = 1;

    /// Throws InvalidArgument on out-of-range fields.
    void validate() const;
};

struct RankedScores {
    std::size_t rank = 0;        // 1-based position of the target, descending
    std::vector<double> sorted;  // all t scores, descending
};

/// Sorts target + decoys descending; the target's position among equal
/// scores is uniform.
RankedScores rank_target(double target, std::span<const double> decoys, rng::Engine& eng);

struct LabelOutcome {
    Label label = Label::Unused;
    FinalScore score;
    double lambda = std::numeric_limits<double>::quiet_NaN();
};

/// Standard labelling with t = sorted.size(). Draws P ~ U[0,1) and, on the
/// decoy branch, Lambda' ~ U(0, t/(2r)].
LabelOutcome label_standard(std::span<const double> sorted, std::size_t rank, double r, rng::Engine& eng);

/// Same rule with the two random draws supplied (p in [0,1), lambda_prime in
/// (0, t/(2r)]).
LabelOutcome label_standard_with_draws(std::span<const double> sorted, std::size_t rank, double r, double p,
                                       double lambda_prime);

/// Simplified labelling (r = 1): target below the middle rank is T, above is
/// D mapped to rank i - ceil(t/2), exactly at the middle a fair coin.
LabelOutcome label_simplified(std::span<const double> sorted, std::size_t rank, rng::Engine& eng);

/// (decoys + 1) / (r * max(targets, 1)).
double estimated_fdr(std::size_t decoys, std::size_t targets, double r) noexcept;

/// Deepest k whose estimated FDR among the first k labels is <= alpha, or 0.
std::size_t select_threshold(std::span<const Label> labels_in_rank_order, double r, double alpha);

struct LabeledTest {
    std::size_t id = 0;
    bool degenerate = false;
    double target_score = std::numeric_limits<double>::quiet_NaN();
    std::size_t rank = 0;  // target rank among t scores; 0 if degenerate
    double lambda = std::numeric_limits<double>::quiet_NaN();
    Label label = Label::Unused;
    FinalScore final_score;
    std::size_t global_rank = 0;  // 1-based position after the global sort
};

struct AdaptiveInfo {
    double r_max = 1.0;
    std::size_t n2 = 0;
    std::vector<double> grid;
    std::vector<std::size_t> part1_rejections;
};

struct DecisionSet {
    Variant variant = Variant::Simplified;
    double r = 1.0;
    double alpha = 0.0;
    std::size_t t = 0;
    PermutationMode mode = PermutationMode::WithReplacement;
    std::size_t K = 0;
    std::size_t targets_at_K = 0;
    std::size_t decoys_at_K = 0;
    double estimated_fdr_at_K = 0.0;
    bool no_discoveries = true;
    std::vector<std::size_t> rejected_ids;  // in global rank order
    std::vector<LabeledTest> per_test;      // indexed by test id
    std::size_t degenerate_tests = 0;
    std::optional<AdaptiveInfo> adaptive;
};

/// Step 1 output for one test.
struct ScoredTest {
    bool degenerate = false;
    double target = std::numeric_limits<double>::quiet_NaN();
    RankedScores ranked;
};

struct ScoredDataset {
    PermutationBudget budget;
    std::vector<ScoredTest> tests;
};

/// Target and decoy scores for every test; test j draws from the stream
/// (seed, stream_tag, j).
ScoredDataset score_tests(const GroupedDataset& data, ScoreKind kind, std::size_t max_permutations,
                          std::uint64_t seed, std::size_t threads, std::uint64_t stream_tag = rng::kScoreStream);

/// Labels and globally ranked tests for one (variant, r); independent of alpha.
struct LabeledRun {
    Variant variant = Variant::Simplified;
    double r = 1.0;
    PermutationBudget budget;
    std::vector<LabeledTest> tests;       // by id
    std::vector<std::size_t> rank_order;  // ids in descending final-score order
};

/// Steps 2-3. Label randomness for test j comes from (seed, stream_tag, j).
LabeledRun label_tests(const ScoredDataset& scored, Variant variant, double r, std::uint64_t seed,
                       std::uint64_t stream_tag = rng::kLabelStream);

/// Step 4 on an already-labeled run.
DecisionSet decide(const LabeledRun& run, double alpha);

/// Standard or Simplified procedure end to end.
DecisionSet run_procedure(const GroupedDataset& data, ScoreKind kind, const TdConfig& config);

/// Index of the grid value with the most rejections (ties -> smallest r).
std::size_t choose_r(std::span<const double> grid, std::span<const std::size_t> rejections);

/// Part-1 group size for the adaptive procedure. Throws InvalidArgument when
/// min(n0/2, n1/2) < n2_min.
std::size_t resolve_n2(std::size_t n_cases, std::size_t n_controls, const TdConfig& config);

/// Adaptive procedure. Scoring and labels depend only on the data and seed, so
/// one runner can answer several alpha levels cheaply.
class AdaptiveRunner {
public:
    AdaptiveRunner(const GroupedDataset& data, ScoreKind kind, const TdConfig& config);

    DecisionSet decide(double alpha);
    std::size_t n2() const noexcept { return n2_; }

private:
    const LabeledRun& part1_run(std::size_t grid_index);
    const LabeledRun& part2_run(std::size_t grid_index);

    TdConfig config_;
    std::size_t n2_ = 0;
    ScoredDataset part1_;
    ScoredDataset part2_;
    std::vector<std::optional<LabeledRun>> part1_runs_;
    std::vector<std::optional<LabeledRun>> part2_runs_;
};

DecisionSet adaptive_run(const GroupedDataset& data, ScoreKind kind, const TdConfig& config);

}  // namespace tdfdr
