#include "tdfdr/harness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "tdfdr/error.hpp"
#include "tdfdr/io.hpp"
#include "tdfdr/parallel.hpp"
#include "tdfdr/rng.hpp"

namespace tdfdr {

namespace {

std::vector<std::string> split(std::string_view s, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(delim, start);
        out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::size_t parse_count(std::string_view text, std::string_view what) {
    std::size_t pos = 0;
    std::string s(text);
    try {
        if (s.empty() || s.front() == '-') throw std::invalid_argument("negative");
        const auto v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw InvalidArgument("invalid " + std::string(what) + " '" + s + "'");
    }
}

double parse_real(std::string_view text, std::string_view what) {
    try {
        return parse_double(text);
    } catch (const DataError&) {
        throw InvalidArgument("invalid " + std::string(what) + " '" + std::string(text) + "'");
    }
}

std::vector<double> parse_real_list(std::string_view text, std::string_view what) {
    std::vector<double> out;
    for (const auto& item : split(text, ',')) out.push_back(parse_real(trim(item), what));
    return out;
}

}  // namespace

MethodSpec parse_method(std::string_view tag) {
    MethodSpec ms;
    ms.tag = std::string(tag);
    const auto parts = split(tag, '-');
    auto bad = [&] { return InvalidArgument("unrecognised method tag '" + std::string(tag) + "'"); };

    if (parts.size() >= 4 && parts[0] == "td") {
        ms.family = MethodSpec::Family::TargetDecoy;
        ms.variant = parse_variant(parts[1]);
        ms.score = parse_score_kind(parts[2]);
        ms.decoys = parse_count(parts[3], "decoy count");
        if (ms.decoys < 1) throw bad();
        for (std::size_t i = 4; i < parts.size(); ++i) {
            if (parts[i].size() > 1 && parts[i][0] == 'r') {
                ms.r = parse_real(std::string_view(parts[i]).substr(1), "r");
            } else {
                throw bad();
            }
        }
        if (ms.variant == Variant::Simplified && ms.r != 1.0) throw bad();
        return ms;
    }
    if (parts.size() >= 2 && (parts[0] == "bh" || parts[0] == "storey")) {
        ms.family = parts[0] == "bh" ? MethodSpec::Family::Bh : MethodSpec::Family::Storey;
        ms.pvalues = parse_pvalue_method(parts[1]);
        for (std::size_t i = 2; i < parts.size(); ++i) {
            const std::string_view p = parts[i];
            if (p.size() > 1 && p[0] == 'd') {
                ms.pooled_draws = parse_count(p.substr(1), "pooled draw count");
            } else if (p.size() > 1 && p[0] == 'l') {
                ms.lambda = parse_real(p.substr(1), "lambda");
            } else {
                throw bad();
            }
        }
        return ms;
    }
    throw bad();
}

void ExperimentSpec::validate() const {
    sim.validate();
    if (reps < 2) throw InvalidArgument("reps must be >= 2");
    if (methods.empty()) throw InvalidArgument("experiment needs at least one method");
    if (alphas.empty()) throw InvalidArgument("experiment needs at least one alpha");
    for (const double a : alphas) {
        if (!(a >= 0.0 && a <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
    }
    for (std::size_t i = 0; i < methods.size(); ++i) {
        for (std::size_t k = i + 1; k < methods.size(); ++k) {
            if (methods[i].tag == methods[k].tag) throw InvalidArgument("duplicate method '" + methods[i].tag + "'");
        }
    }
}

ExperimentSpec parse_experiment_config(std::string_view text) {
    ExperimentSpec spec;
    std::size_t line_no = 0;
    for (const auto& raw : split(text, '\n')) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw InvalidArgument("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const auto key = std::string(trim(line.substr(0, eq)));
        const auto value = trim(line.substr(eq + 1));
        if (key == "name") {
            spec.name = std::string(value);
        } else if (key == "model") {
            spec.sim.model = parse_sim_model(value);
        } else if (key == "rho") {
            spec.sim.rho = parse_real(value, key);
        } else if (key == "m") {
            spec.sim.m = parse_count(value, key);
        } else if (key == "n1") {
            spec.sim.n_cases = parse_count(value, key);
        } else if (key == "n0") {
            spec.sim.n_controls = parse_count(value, key);
        } else if (key == "false_fraction") {
            spec.sim.false_fraction = parse_real(value, key);
        } else if (key == "effect_cycle") {
            spec.sim.effect_cycle = parse_real_list(value, key);
        } else if (key == "reps") {
            spec.reps = parse_count(value, key);
        } else if (key == "alphas") {
            spec.alphas = parse_real_list(value, key);
        } else if (key == "methods") {
            spec.methods.clear();
            for (const auto& tag : split(value, ',')) spec.methods.push_back(parse_method(trim(tag)));
        } else if (key == "seed") {
            spec.seed = parse_count(value, key);
        } else if (key == "threads") {
            spec.threads = parse_count(value, key);
        } else if (key == "max_failures") {
            spec.max_failures = parse_count(value, key);
        } else {
            throw InvalidArgument("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }
    spec.validate();
    return spec;
}

ExperimentSpec load_experiment_config(const std::filesystem::path& path) {
    return parse_experiment_config(read_file(path));
}

namespace {

std::vector<MethodSpec> methods_from(std::initializer_list<std::string_view> tags) {
    std::vector<MethodSpec> out;
    for (const auto t : tags) out.push_back(parse_method(t));
    return out;
}

std::string pct(double fraction) {
    return std::to_string(static_cast<int>(std::lround(fraction * 100))) + "pct";
}

}  // namespace

std::vector<ExperimentSpec> preset(std::string_view name, std::size_t reps, std::uint64_t seed, std::size_t threads) {
    std::vector<ExperimentSpec> out;
    auto base = [&](std::string label, SimModel model, double rho, double frac) {
        ExperimentSpec e;
        e.name = std::move(label);
        e.sim.model = model;
        e.sim.rho = rho;
        e.sim.m = 10000;
        e.sim.n_cases = 10;
        e.sim.n_controls = 10;
        e.sim.false_fraction = frac;
        e.reps = reps;
        e.seed = seed;
        e.threads = threads;
        e.alphas = {0.05, 0.10};
        e.methods = methods_from({"td-simplified-tsigned-49", "td-simplified-tsigned-1", "td-simplified-t-49",
                                  "td-simplified-t-1", "td-simplified-ranksum-49",
                                  "td-simplified-ranksum-1", "storey-ttest", "storey-permutation",
                                  "storey-ranksum"});
        return e;
    };

    if (name == "table1-2" || name == "table1" || name == "table2" || name == "independent") {
        for (const double frac : {0.01, 0.10}) out.push_back(base("normal-" + pct(frac), SimModel::Normal, 0.0, frac));
        for (const double frac : {0.01, 0.10}) {
            out.push_back(base("gamma-" + pct(frac), SimModel::GammaIndep, 0.0, frac));
        }
    } else if (name == "table3-4" || name == "table3" || name == "table4" || name == "dependent") {
        for (const double rho : {0.4, 0.8}) {
            for (const double frac : {0.01, 0.10}) {
                std::ostringstream label;
                label << "normal-rho" << rho << "-" << pct(frac);
                out.push_back(base(label.str(), SimModel::Normal, rho, frac));
            }
        }
        for (const double frac : {0.01, 0.10}) {
            out.push_back(base("gamma-dep-" + pct(frac), SimModel::GammaDep, 0.0, frac));
        }
    } else if (name == "table5" || name == "adaptive") {
        ExperimentSpec e;
        e.name = "adaptive-small";
        e.sim.model = SimModel::AdaptiveSmall;
        e.sim.m = 200;
        e.sim.false_fraction = 0.1;
        e.reps = reps;
        e.seed = seed;
        e.threads = threads;
        e.alphas = {0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.10};
        e.methods = methods_from({"td-simplified-tsigned-49", "td-adaptive-tsigned-49", "td-simplified-t-49",
                                  "td-adaptive-t-49"});
        out.push_back(std::move(e));
    } else {
        throw InvalidArgument("unknown preset '" + std::string(name) + "'");
    }
    for (const auto& e : out) e.validate();
    return out;
}

const CellSummary& ExperimentSummary::cell(std::string_view method, double alpha) const {
    for (const auto& c : cells) {
        if (c.method == method && c.alpha == alpha) return c;
    }
    throw InvalidArgument("no summary cell for method '" + std::string(method) + "' at alpha " + std::to_string(alpha));
}

double fdp(std::span<const std::size_t> rejected_ids, const std::vector<bool>& false_null) {
    std::size_t false_rejections = 0;
    for (const auto id : rejected_ids) {
        if (id >= false_null.size()) throw InvalidArgument("fdp: truth flags do not cover every test");
        if (!false_null[id]) ++false_rejections;
    }
    return static_cast<double>(false_rejections) / static_cast<double>(std::max<std::size_t>(rejected_ids.size(), 1));
}

double fdp(const DecisionSet& decisions, const std::vector<bool>& false_null) {
    if (false_null.size() < decisions.per_test.size()) {
        throw InvalidArgument("fdp: truth flags do not cover every test");
    }
    return fdp(decisions.rejected_ids, false_null);
}

namespace {

RepResult tally(std::size_t replicate, const std::string& method, double alpha, std::span<const std::size_t> rejected,
                const std::vector<bool>& false_null) {
    RepResult r;
    r.replicate = replicate;
    r.method = method;
    r.alpha = alpha;
    r.rejections = rejected.size();
    for (const auto id : rejected) r.true_rejections += false_null[id] ? 1 : 0;
    r.fdp = fdp(rejected, false_null);
    return r;
}

void evaluate_method(const MethodSpec& ms, const SimulatedDataset& sim, const std::vector<double>& alphas,
                     std::uint64_t method_seed, std::size_t replicate, std::vector<RepResult>& out) {
    const auto& data = sim.data;
    if (ms.family == MethodSpec::Family::TargetDecoy) {
        if (ms.variant == Variant::Adaptive) {
            TdConfig cfg;
            cfg.variant = Variant::Adaptive;
            cfg.max_permutations = ms.decoys + 1;
            cfg.seed = method_seed;
            AdaptiveRunner runner(data, ms.score, cfg);
            for (const double a : alphas) {
                out.push_back(tally(replicate, ms.tag, a, runner.decide(a).rejected_ids, sim.false_null));
            }
            return;
        }
        const auto scored = score_tests(data, ms.score, ms.decoys + 1, method_seed, 1);
        const auto run = label_tests(scored, ms.variant, ms.r, method_seed);
        for (const double a : alphas) {
            out.push_back(tally(replicate, ms.tag, a, decide(run, a).rejected_ids, sim.false_null));
        }
        return;
    }

    PValueVector p;
    switch (ms.pvalues) {
        case PValueMethod::TTest: p = t_pvalues(data, true); break;
        case PValueMethod::RankSum: p = rank_sum_pvalues(data); break;
        case PValueMethod::PooledPermutation:
            p = pooled_permutation_pvalues(data, ScoreKind::AbsT, ms.pooled_draws, method_seed, 1);
            break;
    }
    if (ms.family == MethodSpec::Family::Bh) {
        for (const double a : alphas) out.push_back(tally(replicate, ms.tag, a, bh_reject(p.p, a), sim.false_null));
    } else {
        const auto q = storey_qvalues(p.p, ms.lambda);
        for (const double a : alphas) {
            out.push_back(tally(replicate, ms.tag, a, reject_by_qvalue(q.q, a), sim.false_null));
        }
    }
}

}  // namespace

std::vector<RepResult> run_replicate(const ExperimentSpec& spec, std::size_t replicate) {
    SimSpec sim_spec = spec.sim;
    sim_spec.seed = rng::derive_seed(spec.seed, {rng::kDataStream});
    sim_spec.threads = 1;
    const auto sim = generate(sim_spec, replicate);

    std::vector<RepResult> out;
    out.reserve(spec.methods.size() * spec.alphas.size());
    for (std::size_t k = 0; k < spec.methods.size(); ++k) {
        const auto& ms = spec.methods[k];
        const auto method_seed = rng::derive_seed(spec.seed, {rng::kMethodStream, replicate, k});
        const std::size_t before = out.size();
        try {
            evaluate_method(ms, sim, spec.alphas, method_seed, replicate, out);
        } catch (const std::exception& e) {
            out.resize(before);
            for (const double a : spec.alphas) {
                RepResult r;
                r.replicate = replicate;
                r.method = ms.tag;
                r.alpha = a;
                r.failed = true;
                r.error = e.what();
                out.push_back(std::move(r));
            }
        }
    }
    return out;
}

ExperimentSummary run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    std::vector<std::vector<RepResult>> per_rep(spec.reps);
    parallel_for(spec.reps, spec.threads, [&](std::size_t rep) { per_rep[rep] = run_replicate(spec, rep); });

    ExperimentSummary summary;
    summary.spec = spec;
    const std::size_t n_alpha = spec.alphas.size();
    for (std::size_t k = 0; k < spec.methods.size(); ++k) {
        for (std::size_t a = 0; a < n_alpha; ++a) {
            CellSummary cell;
            cell.method = spec.methods[k].tag;
            cell.alpha = spec.alphas[a];
            for (std::size_t rep = 0; rep < spec.reps; ++rep) {
                const auto& r = per_rep[rep][k * n_alpha + a];
                if (r.failed) {
                    ++cell.failures;
                    if (cell.first_error.empty()) cell.first_error = r.error;
                    continue;
                }
                cell.fdp.push_back(r.fdp);
                cell.rejections.push_back(r.rejections);
                cell.true_rejections.push_back(r.true_rejections);
            }
            cell.aborted = cell.failures >= spec.max_failures;
            cell.replicates = cell.fdp.size();
            const auto N = static_cast<double>(cell.replicates);
            if (cell.replicates > 0) {
                double sum_fdp = 0.0;
                double sum_rej = 0.0;
                double sum_true = 0.0;
                for (std::size_t i = 0; i < cell.replicates; ++i) {
                    sum_fdp += cell.fdp[i];
                    sum_rej += static_cast<double>(cell.rejections[i]);
                    sum_true += static_cast<double>(cell.true_rejections[i]);
                }
                cell.mean_fdp = sum_fdp / N;
                cell.mean_rejections = sum_rej / N;
                cell.mean_true_rejections = sum_true / N;
                if (cell.replicates > 1) {
                    double ss = 0.0;
                    for (const double f : cell.fdp) ss += (f - cell.mean_fdp) * (f - cell.mean_fdp);
                    cell.fdp_se = std::sqrt(ss / (N - 1.0)) / std::sqrt(N);
                }
            }
            cell.starred = cell.mean_fdp > cell.alpha;
            summary.cells.push_back(std::move(cell));
        }
    }
    return summary;
}

}  // namespace tdfdr
