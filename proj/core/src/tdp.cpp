#include "tdfdr/tdp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tdfdr/error.hpp"
#include "tdfdr/parallel.hpp"

namespace tdfdr {

std::string_view to_string(Variant v) noexcept {
    switch (v) {
        case Variant::Standard: return "standard";
        case Variant::Simplified: return "simplified";
        case Variant::Adaptive: return "adaptive";
    }
    return "unknown";
}

Variant parse_variant(std::string_view name) {
    if (name == "standard") return Variant::Standard;
    if (name == "simplified") return Variant::Simplified;
    if (name == "adaptive") return Variant::Adaptive;
    throw InvalidArgument("unknown variant '" + std::string(name) + "'");
}

char to_char(Label l) noexcept { return static_cast<char>(l); }

void TdConfig::validate() const {
    if (!(r >= 1.0) || !std::isfinite(r)) throw InvalidArgument("r must be a finite value >= 1");
    if (variant == Variant::Simplified && r != 1.0) throw InvalidArgument("the simplified variant requires r = 1");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
    if (max_permutations < 2) throw InvalidArgument("permutation cap must be >= 2");
    if (variant == Variant::Adaptive) {
        if (adaptive_r_grid.empty()) throw InvalidArgument("adaptive r grid must be nonempty");
        for (const double g : adaptive_r_grid) {
            if (!(g >= 1.0) || !std::isfinite(g)) throw InvalidArgument("adaptive r grid values must be >= 1");
        }
        if (!adaptive_n2.automatic && adaptive_n2.fixed < 2) throw InvalidArgument("fixed n2 must be >= 2");
        if (adaptive_part1_cap < 2) throw InvalidArgument("adaptive part-1 cap must be >= 2");
    }
}

RankedScores rank_target(double target, std::span<const double> decoys, rng::Engine& eng) {
    std::size_t greater = 0;
    std::size_t equal = 0;
    for (const double d : decoys) {
        if (d > target) {
            ++greater;
        } else if (d == target) {
            ++equal;
        }
    }
    RankedScores out;
    out.rank = 1 + greater + rng::uniform_index(eng, equal + 1);
    out.sorted.reserve(decoys.size() + 1);
    out.sorted.push_back(target);
    out.sorted.insert(out.sorted.end(), decoys.begin(), decoys.end());
    std::sort(out.sorted.begin(), out.sorted.end(), std::greater<>{});
    return out;
}

namespace {

void check_rank(std::size_t rank, std::size_t t) {
    if (t == 0 || rank < 1 || rank > t) {
        throw InvalidArgument("rank " + std::to_string(rank) + " outside 1.." + std::to_string(t));
    }
}

void check_r(double r, std::size_t t) {
    if (!(r >= 1.0) || r > static_cast<double>(t)) {
        throw InvalidArgument("r must lie in [1, t] (r=" + std::to_string(r) + ", t=" + std::to_string(t) + ")");
    }
}

}  // namespace

LabelOutcome label_standard_with_draws(std::span<const double> sorted, std::size_t rank, double r, double p,
                                       double lambda_prime) {
    const std::size_t t = sorted.size();
    check_rank(rank, t);
    check_r(r, t);
    const double td = static_cast<double>(t);
    const double target_band = td / (2.0 * r);

    LabelOutcome out;
    out.lambda = static_cast<double>(rank) - p;
    if (out.lambda <= target_band) {
        out.label = Label::Target;
        out.score = FinalScore{sorted[rank - 1]};
    } else if (out.lambda > td / 2.0) {
        const auto pos = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(lambda_prime)), 1, t);
        out.label = Label::Decoy;
        out.score = FinalScore{sorted[pos - 1]};
    } else {
        out.label = Label::Unused;
        out.score = FinalScore::bottom();
    }
    return out;
}

LabelOutcome label_standard(std::span<const double> sorted, std::size_t rank, double r, rng::Engine& eng) {
    const std::size_t t = sorted.size();
    check_rank(rank, t);
    check_r(r, t);
    const double p = rng::uniform01(eng);
    const double lambda = static_cast<double>(rank) - p;
    double lambda_prime = 0.0;
    if (lambda > static_cast<double>(t) / 2.0) {
        // (1 - U) maps [0,1) onto (0,1], giving Lambda' on (0, t/(2r)]
        lambda_prime = (1.0 - rng::uniform01(eng)) * static_cast<double>(t) / (2.0 * r);
    }
    return label_standard_with_draws(sorted, rank, r, p, lambda_prime);
}

LabelOutcome label_simplified(std::span<const double> sorted, std::size_t rank, rng::Engine& eng) {
    const std::size_t t = sorted.size();
    check_rank(rank, t);
    LabelOutcome out;
    const std::size_t twice = 2 * rank;
    if (twice < t + 1) {
        out.label = Label::Target;
        out.score = FinalScore{sorted[rank - 1]};
    } else if (twice > t + 1) {
        const std::size_t half_up = (t + 1) / 2;
        out.label = Label::Decoy;
        out.score = FinalScore{sorted[rank - half_up - 1]};
    } else {
        out.label = rng::uniform01(eng) < 0.5 ? Label::Target : Label::Decoy;
        out.score = FinalScore{sorted[rank - 1]};
    }
    return out;
}

double estimated_fdr(std::size_t decoys, std::size_t targets, double r) noexcept {
    return static_cast<double>(decoys + 1) / (r * static_cast<double>(std::max<std::size_t>(targets, 1)));
}

std::size_t select_threshold(std::span<const Label> labels_in_rank_order, double r, double alpha) {
    std::size_t targets = 0;
    std::size_t decoys = 0;
    std::size_t K = 0;
    for (std::size_t k = 0; k < labels_in_rank_order.size(); ++k) {
        if (labels_in_rank_order[k] == Label::Target) {
            ++targets;
        } else if (labels_in_rank_order[k] == Label::Decoy) {
            ++decoys;
        }
        if (estimated_fdr(decoys, targets, r) <= alpha) K = k + 1;
    }
    return K;
}

ScoredDataset score_tests(const GroupedDataset& data, ScoreKind kind, std::size_t max_permutations,
                          std::uint64_t seed, std::size_t threads, std::uint64_t stream_tag) {
    ScoredDataset out;
    out.budget = resolve_budget(data.n(), data.n_controls(), max_permutations);
    out.tests.resize(data.m());
    parallel_for(data.m(), threads, [&](std::size_t j) {
        auto eng = rng::make_stream(seed, {stream_tag, j});
        std::vector<double> buffer;
        const auto samples = data.samples(j, buffer);
        const RegroupScorer scorer(samples, kind);
        auto& test = out.tests[j];
        const auto target = scorer.try_score(scorer.target_mask());
        if (!target) {
            test.degenerate = true;
            return;
        }
        test.target = *target;
        try {
            const auto decoys = decoy_scores(scorer, out.budget, eng);
            test.ranked = rank_target(test.target, decoys, eng);
        } catch (const DegenerateVariance&) {
            test.degenerate = true;
        }
    });
    return out;
}

LabeledRun label_tests(const ScoredDataset& scored, Variant variant, double r, std::uint64_t seed,
                       std::uint64_t stream_tag) {
    if (variant == Variant::Adaptive) throw InvalidArgument("label_tests: adaptive is not a labelling rule");
    if (variant == Variant::Simplified) r = 1.0;
    check_r(r, scored.budget.t);

    LabeledRun run;
    run.variant = variant;
    run.r = r;
    run.budget = scored.budget;
    const std::size_t m = scored.tests.size();
    run.tests.resize(m);
    std::vector<double> jitter(m);

    for (std::size_t j = 0; j < m; ++j) {
        auto eng = rng::make_stream(seed, {stream_tag, j});
        const auto& in = scored.tests[j];
        auto& lt = run.tests[j];
        lt.id = j;
        lt.degenerate = in.degenerate;
        if (!in.degenerate) {
            lt.target_score = in.target;
            lt.rank = in.ranked.rank;
            const auto outcome = variant == Variant::Standard ? label_standard(in.ranked.sorted, in.ranked.rank, r, eng)
                                                              : label_simplified(in.ranked.sorted, in.ranked.rank, eng);
            lt.label = outcome.label;
            lt.final_score = outcome.score;
            lt.lambda = outcome.lambda;
        }
        // tie-break key for the global sort
        jitter[j] = rng::uniform01(eng);
    }

    run.rank_order.resize(m);
    std::iota(run.rank_order.begin(), run.rank_order.end(), std::size_t{0});
    std::sort(run.rank_order.begin(), run.rank_order.end(), [&](std::size_t a, std::size_t b) {
        const auto c = run.tests[a].final_score <=> run.tests[b].final_score;
        if (c != 0) return c > 0;
        if (jitter[a] != jitter[b]) return jitter[a] < jitter[b];
        return a < b;
    });
    for (std::size_t pos = 0; pos < m; ++pos) run.tests[run.rank_order[pos]].global_rank = pos + 1;
    return run;
}

namespace {

struct Cut {
    std::size_t K = 0;
    std::size_t targets = 0;
    std::size_t decoys = 0;
};

Cut cut_at_threshold(const LabeledRun& run, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
    std::vector<Label> labels(run.rank_order.size());
    for (std::size_t pos = 0; pos < labels.size(); ++pos) labels[pos] = run.tests[run.rank_order[pos]].label;
    Cut cut;
    cut.K = select_threshold(labels, run.r, alpha);
    for (std::size_t pos = 0; pos < cut.K; ++pos) {
        if (labels[pos] == Label::Target) ++cut.targets;
        if (labels[pos] == Label::Decoy) ++cut.decoys;
    }
    return cut;
}

}  // namespace

DecisionSet decide(const LabeledRun& run, double alpha) {
    const Cut cut = cut_at_threshold(run, alpha);
    DecisionSet out;
    out.variant = run.variant;
    out.r = run.r;
    out.alpha = alpha;
    out.t = run.budget.t;
    out.mode = run.budget.mode;
    out.K = cut.K;
    out.targets_at_K = cut.targets;
    out.decoys_at_K = cut.decoys;
    out.per_test = run.tests;
    for (std::size_t pos = 0; pos < cut.K; ++pos) {
        const auto id = run.rank_order[pos];
        if (run.tests[id].label == Label::Target) out.rejected_ids.push_back(id);
    }
    for (const auto& lt : run.tests) out.degenerate_tests += lt.degenerate ? 1 : 0;
    out.no_discoveries = out.rejected_ids.empty();
    out.estimated_fdr_at_K = out.no_discoveries ? 0.0 : estimated_fdr(cut.decoys, cut.targets, run.r);
    return out;
}

DecisionSet run_procedure(const GroupedDataset& data, ScoreKind kind, const TdConfig& config) {
    config.validate();
    if (config.variant == Variant::Adaptive) return adaptive_run(data, kind, config);
    const auto scored = score_tests(data, kind, config.max_permutations, config.seed, config.threads);
    const auto run = label_tests(scored, config.variant, config.r, config.seed);
    return decide(run, config.alpha);
}

std::size_t choose_r(std::span<const double> grid, std::span<const std::size_t> rejections) {
    if (grid.empty() || grid.size() != rejections.size()) {
        throw InvalidArgument("choose_r: grid and rejection counts must be nonempty and equally sized");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (rejections[i] > rejections[best] || (rejections[i] == rejections[best] && grid[i] < grid[best])) {
            best = i;
        }
    }
    return best;
}

std::size_t resolve_n2(std::size_t n_cases, std::size_t n_controls, const TdConfig& config) {
    const std::size_t upper = std::min(n_cases / 2, n_controls / 2);
    if (upper < std::max<std::size_t>(config.adaptive_n2_min, 2)) {
        throw InvalidArgument("adaptive split impossible: min(n0/2, n1/2) = " + std::to_string(upper) +
                              " is below the minimum part-1 group size " + std::to_string(config.adaptive_n2_min));
    }
    if (!config.adaptive_n2.automatic) {
        const std::size_t n2 = config.adaptive_n2.fixed;
        if (n2 < 2 || n2 > upper) {
            throw InvalidArgument("fixed n2 = " + std::to_string(n2) + " outside [2, " + std::to_string(upper) + "]");
        }
        return n2;
    }
    std::size_t n2 = 0;
    for (std::size_t k = config.adaptive_n2_min; k <= upper; ++k) {
        if (binomial(2 * k, k) <= config.adaptive_part1_cap) n2 = k;
    }
    if (n2 == 0) {
        throw InvalidArgument("adaptive split impossible: no n2 >= " + std::to_string(config.adaptive_n2_min) +
                              " has C(2 n2, n2) within the part-1 cap " + std::to_string(config.adaptive_part1_cap));
    }
    return n2;
}

AdaptiveRunner::AdaptiveRunner(const GroupedDataset& data, ScoreKind kind, const TdConfig& config)
    : config_{config} {
    config_.variant = Variant::Adaptive;
    config_.validate();
    n2_ = resolve_n2(data.n_cases(), data.n_controls(), config_);

    const std::size_t m = data.m();
    const std::size_t n1 = data.n_cases();
    const std::size_t n0 = data.n_controls();
    const std::size_t w1 = 2 * n2_;
    const std::size_t w2 = data.n() - w1;
    std::vector<double> part1(m * w1);
    std::vector<double> part2(m * w2);

    parallel_for(m, config_.threads, [&](std::size_t j) {
        auto eng = rng::make_stream(config_.seed, {rng::kSplitStream, j});
        std::vector<double> buffer;
        const auto s = data.samples(j, buffer);
        std::vector<double> cases(s.cases().begin(), s.cases().end());
        std::vector<double> controls(s.controls().begin(), s.controls().end());
        // partial Fisher-Yates: the first n2 entries become a uniform subset
        for (std::size_t i = 0; i < n2_; ++i) {
            std::swap(cases[i], cases[i + rng::uniform_index(eng, n1 - i)]);
            std::swap(controls[i], controls[i + rng::uniform_index(eng, n0 - i)]);
        }
        double* p1 = part1.data() + j * w1;
        double* p2 = part2.data() + j * w2;
        std::copy_n(cases.begin(), n2_, p1);
        std::copy_n(controls.begin(), n2_, p1 + n2_);
        p2 = std::copy(cases.begin() + static_cast<std::ptrdiff_t>(n2_), cases.end(), p2);
        std::copy(controls.begin() + static_cast<std::ptrdiff_t>(n2_), controls.end(), p2);
    });

    const auto part1_data = GroupedDataset::contiguous(data.ids(), n2_, n2_, std::move(part1));
    const auto part2_data = GroupedDataset::contiguous(data.ids(), n1 - n2_, n0 - n2_, std::move(part2));

    const auto part1_cap = static_cast<std::size_t>(binomial(w1, n2_));
    part1_ = score_tests(part1_data, kind, part1_cap, config_.seed, config_.threads, rng::kAdaptivePart1);
    part2_ = score_tests(part2_data, kind, config_.max_permutations, config_.seed, config_.threads,
                         rng::kAdaptivePart2);

    for (const double g : config_.adaptive_r_grid) {
        if (g > static_cast<double>(part1_.budget.t) || g > static_cast<double>(part2_.budget.t)) {
            throw InvalidArgument("adaptive r grid value " + std::to_string(g) + " exceeds t of a part (t1=" +
                                  std::to_string(part1_.budget.t) + ", t2=" + std::to_string(part2_.budget.t) + ")");
        }
    }
    part1_runs_.resize(config_.adaptive_r_grid.size());
    part2_runs_.resize(config_.adaptive_r_grid.size());
}

const LabeledRun& AdaptiveRunner::part1_run(std::size_t i) {
    if (!part1_runs_[i]) {
        const auto tag = rng::derive_seed(rng::kAdaptivePart1, {rng::kLabelStream, i});
        part1_runs_[i] = label_tests(part1_, Variant::Standard, config_.adaptive_r_grid[i], config_.seed, tag);
    }
    return *part1_runs_[i];
}

const LabeledRun& AdaptiveRunner::part2_run(std::size_t i) {
    if (!part2_runs_[i]) {
        const auto tag = rng::derive_seed(rng::kAdaptivePart2, {rng::kLabelStream, i});
        part2_runs_[i] = label_tests(part2_, Variant::Standard, config_.adaptive_r_grid[i], config_.seed, tag);
    }
    return *part2_runs_[i];
}

DecisionSet AdaptiveRunner::decide(double alpha) {
    const auto& grid = config_.adaptive_r_grid;
    std::vector<std::size_t> rejections(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& run = part1_run(i);
        const Cut cut = cut_at_threshold(run, alpha);
        rejections[i] = cut.targets;
    }
    const std::size_t best = choose_r(grid, rejections);
    DecisionSet out = tdfdr::decide(part2_run(best), alpha);
    out.variant = Variant::Adaptive;
    out.adaptive = AdaptiveInfo{grid[best], n2_, grid, std::move(rejections)};
    return out;
}

DecisionSet adaptive_run(const GroupedDataset& data, ScoreKind kind, const TdConfig& config) {
    AdaptiveRunner runner(data, kind, config);
    return runner.decide(config.alpha);
}

}  // namespace tdfdr
