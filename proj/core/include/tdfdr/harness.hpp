#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tdfdr/baselines.hpp"
#include "tdfdr/simgen.hpp"
#include "tdfdr/tdp.hpp"

namespace tdfdr {

/// One method evaluated on each replicate. Parsed from tags:
///   td-<simplified|standard|adaptive>-<t|tsigned|ranksum>-<decoys>[-r<r>]
///   <bh|storey>-<ttest|ranksum|permutation>
struct MethodSpec {
    enum class Family { TargetDecoy, Bh, Storey };

    std::string tag;
    Family family = Family::TargetDecoy;
    Variant variant = Variant::Simplified;
    ScoreKind score = ScoreKind::AbsT;
    std::size_t decoys = 49;
    double r = 1.0;
    PValueMethod pvalues = PValueMethod::TTest;
    std::size_t pooled_draws = 10;
    double lambda = 0.5;
};

MethodSpec parse_method(std::string_view tag);

struct ExperimentSpec {
    std::string name = "experiment";
    SimSpec sim;
    std::vector<MethodSpec> methods;
    std::size_t reps = 100;
    std::vector<double> alphas{0.05, 0.10};
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    std::size_t max_failures = 3;  // a method failing this many replicates is aborted

    void validate() const;
};

/// Parses `key = value` lines (# comments allowed). Keys: name, model, rho,
/// m, n1, n0, false_fraction, effect_cycle, reps, alphas, methods, seed,
/// threads, max_failures.
ExperimentSpec parse_experiment_config(std::string_view text);
ExperimentSpec load_experiment_config(const std::filesystem::path& path);

/// Named experiment groups: "table1-2" (alias "independent"), "table3-4"
/// ("dependent"), "table5" ("adaptive").
std::vector<ExperimentSpec> preset(std::string_view name, std::size_t reps, std::uint64_t seed, std::size_t threads);

struct RepResult {
    std::size_t replicate = 0;
    std::string method;
    double alpha = 0.0;
    std::size_t rejections = 0;
    std::size_t true_rejections = 0;
    double fdp = 0.0;
    bool failed = false;
    std::string error;
};

/// Aggregate for one (method, alpha) cell.
struct CellSummary {
    std::string method;
    double alpha = 0.0;
    double mean_fdp = 0.0;
    double fdp_se = 0.0;
    double mean_rejections = 0.0;
    double mean_true_rejections = 0.0;
    std::size_t replicates = 0;
    std::size_t failures = 0;
    bool aborted = false;
    bool starred = false;  // mean FDP exceeds alpha
    std::string first_error;
    std::vector<double> fdp;
    std::vector<std::size_t> rejections;
    std::vector<std::size_t> true_rejections;
};

struct ExperimentSummary {
    ExperimentSpec spec;
    std::vector<CellSummary> cells;  // method-major, alpha-minor

    const CellSummary& cell(std::string_view method, double alpha) const;
};

/// #{rejected true nulls} / max(#rejected, 1).
double fdp(std::span<const std::size_t> rejected_ids, const std::vector<bool>& false_null);
double fdp(const DecisionSet& decisions, const std::vector<bool>& false_null);

/// All methods of one replicate, evaluated on the same generated dataset.
std::vector<RepResult> run_replicate(const ExperimentSpec& spec, std::size_t replicate);

ExperimentSummary run_experiment(const ExperimentSpec& spec);

}  // namespace tdfdr
