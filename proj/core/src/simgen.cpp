#include "tdfdr/simgen.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "tdfdr/error.hpp"
#include "tdfdr/parallel.hpp"
#include "tdfdr/rng.hpp"

namespace tdfdr {

std::string_view to_string(SimModel m) noexcept {
    switch (m) {
        case SimModel::Normal: return "normal";
        case SimModel::GammaIndep: return "gamma";
        case SimModel::GammaDep: return "gamma-dep";
        case SimModel::AdaptiveSmall: return "adaptive-small";
    }
    return "unknown";
}

SimModel parse_sim_model(std::string_view name) {
    if (name == "normal") return SimModel::Normal;
    if (name == "gamma" || name == "gamma-indep") return SimModel::GammaIndep;
    if (name == "gamma-dep") return SimModel::GammaDep;
    if (name == "adaptive-small") return SimModel::AdaptiveSmall;
    throw InvalidArgument("unknown simulation model '" + std::string(name) + "'");
}

void SimSpec::validate() const {
    if (!(false_fraction >= 0.0 && false_fraction <= 1.0)) throw InvalidArgument("false_fraction must lie in [0, 1]");
    if (!(rho >= 0.0 && rho < 1.0)) throw InvalidArgument("rho must lie in [0, 1)");
    if (m == 0) throw InvalidArgument("m must be positive");
    if (n_cases < 2 || n_controls < 2) throw InvalidArgument("each group needs at least two samples");
    if (effective_cycle().empty()) throw InvalidArgument("effect cycle must be nonempty");
    if (model == SimModel::GammaIndep || model == SimModel::GammaDep) {
        for (const double k : effective_cycle()) {
            if (!(k > 0.0)) throw InvalidArgument("gamma shapes must be positive");
        }
        if (!(shared_gamma_shape > 0.0)) throw InvalidArgument("shared gamma shape must be positive");
    }
}

std::vector<double> SimSpec::effective_cycle() const {
    if (!effect_cycle.empty()) return effect_cycle;
    switch (model) {
        case SimModel::Normal: return {1, 2, 3, 4};
        case SimModel::GammaIndep:
        case SimModel::GammaDep: return {2, 3, 4, 5};
        case SimModel::AdaptiveSmall: return {4};
    }
    return {};
}

std::size_t SimSpec::false_nulls() const noexcept {
    return static_cast<std::size_t>(std::llround(false_fraction * static_cast<double>(m)));
}

std::size_t SimulatedDataset::false_null_count() const noexcept {
    std::size_t c = 0;
    for (const bool f : false_null) c += f ? 1 : 0;
    return c;
}

namespace {

constexpr std::uint64_t kSharedFactor = std::numeric_limits<std::uint64_t>::max();

std::vector<std::string> make_ids(std::size_t m) {
    std::vector<std::string> ids(m);
    for (std::size_t j = 0; j < m; ++j) ids[j] = "test" + std::to_string(j + 1);
    return ids;
}

// Fills a contiguous m x n matrix. `draw(j, i, eng)` returns X_ji.
template <class Draw>
SimulatedDataset fill(const SimSpec& spec, std::size_t replicate, Draw&& draw) {
    const std::size_t m = spec.m;
    const std::size_t n = spec.n_cases + spec.n_controls;
    const std::size_t m0 = m - spec.false_nulls();
    std::vector<double> values(m * n);
    parallel_for(m, spec.threads, [&](std::size_t j) {
        auto eng = rng::make_stream(spec.seed, {rng::kDataStream, replicate, j});
        for (std::size_t i = 0; i < n; ++i) values[j * n + i] = draw(j, i, eng);
    });
    SimulatedDataset out{GroupedDataset::contiguous(make_ids(m), spec.n_cases, spec.n_controls, std::move(values)),
                         std::vector<bool>(m, false)};
    for (std::size_t j = m0; j < m; ++j) out.false_null[j] = true;
    return out;
}

}  // namespace

SimulatedDataset gen_normal(const SimSpec& spec, std::size_t replicate) {
    if (spec.model != SimModel::Normal && spec.model != SimModel::AdaptiveSmall) {
        throw InvalidArgument("gen_normal: model must be normal");
    }
    spec.validate();
    const auto cycle = spec.effective_cycle();
    const std::size_t m0 = spec.m - spec.false_nulls();
    auto shared = rng::make_stream(spec.seed, {rng::kDataStream, replicate, kSharedFactor});
    const double zeta0 = std::normal_distribution<double>{}(shared);
    const double common = std::sqrt(spec.rho) * zeta0;
    const double own = std::sqrt(1.0 - spec.rho);

    return fill(spec, replicate, [&](std::size_t j, std::size_t i, rng::Engine& eng) {
        std::normal_distribution<double> noise;
        double mu = 0.0;
        if (j >= m0 && i < spec.n_cases) mu = cycle[(j - m0) % cycle.size()];
        return common + own * noise(eng) + mu;
    });
}

SimulatedDataset gen_gamma(const SimSpec& spec, std::size_t replicate) {
    if (spec.model != SimModel::GammaIndep && spec.model != SimModel::GammaDep) {
        throw InvalidArgument("gen_gamma: model must be gamma or gamma-dep");
    }
    spec.validate();
    const auto cycle = spec.effective_cycle();
    const std::size_t m0 = spec.m - spec.false_nulls();
    double shared_component = 0.0;
    if (spec.model == SimModel::GammaDep) {
        auto shared = rng::make_stream(spec.seed, {rng::kDataStream, replicate, kSharedFactor});
        shared_component = std::gamma_distribution<double>(spec.shared_gamma_shape, 1.0)(shared);
    }

    return fill(spec, replicate, [&](std::size_t j, std::size_t i, rng::Engine& eng) {
        double shape = 1.0;
        if (j >= m0 && i < spec.n_cases) shape = cycle[(j - m0) % cycle.size()];
        return shared_component + std::gamma_distribution<double>(shape, 1.0)(eng);
    });
}

SimulatedDataset gen_adaptive_small(std::size_t replicate, std::uint64_t seed) {
    SimSpec spec;
    spec.model = SimModel::AdaptiveSmall;
    spec.m = 200;
    spec.n_cases = 10;
    spec.n_controls = 10;
    spec.false_fraction = 0.1;
    spec.effect_cycle = {4.0};
    spec.seed = seed;
    return gen_normal(spec, replicate);
}

SimulatedDataset generate(const SimSpec& spec, std::size_t replicate) {
    switch (spec.model) {
        case SimModel::Normal: return gen_normal(spec, replicate);
        case SimModel::GammaIndep:
        case SimModel::GammaDep: return gen_gamma(spec, replicate);
        case SimModel::AdaptiveSmall: {
            // fixed scenario; only the seed and thread count carry over
            SimSpec fixed = spec;
            fixed.rho = 0.0;
            fixed.m = 200;
            fixed.n_cases = 10;
            fixed.n_controls = 10;
            fixed.false_fraction = 0.1;
            fixed.effect_cycle = {4.0};
            return gen_normal(fixed, replicate);
        }
    }
    throw InvalidArgument("generate: unknown model");
}

}  // namespace tdfdr
