#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "tdfdr/dataset.hpp"

namespace tdfdr {

enum class SimModel { Normal, GammaIndep, GammaDep, AdaptiveSmall };

std::string_view to_string(SimModel m) noexcept;
SimModel parse_sim_model(std::string_view name);

struct SimSpec {
    SimModel model = SimModel::Normal;
    double rho = 0.0;  // Normal only, in [0, 1)
    std::size_t m = 10000;
    std::size_t n_cases = 10;
    std::size_t n_controls = 10;
    double false_fraction = 0.1;
    /// Case means (Normal) or case shapes (Gamma) for false nulls, cycled
    /// across consecutive false-null tests. Empty = model default.
    std::vector<double> effect_cycle;
    double shared_gamma_shape = 4.0;  // GammaDep shared component
    std::uint64_t seed = 0;
    std::size_t threads = 1;

    void validate() const;
    std::vector<double> effective_cycle() const;
    std::size_t false_nulls() const noexcept;
};

struct SimulatedDataset {
    GroupedDataset data;
    std::vector<bool> false_null;  // truth: true where the null hypothesis is false

    std::size_t false_null_count() const noexcept;
};

SimulatedDataset gen_normal(const SimSpec& spec, std::size_t replicate);
SimulatedDataset gen_gamma(const SimSpec& spec, std::size_t replicate);
/// 200 tests, 10 + 10 samples, N(0,1) noise, the last 20 tests' cases N(4,1).
SimulatedDataset gen_adaptive_small(std::size_t replicate, std::uint64_t seed);

/// Dispatches on spec.model.
SimulatedDataset generate(const SimSpec& spec, std::size_t replicate);

}  // namespace tdfdr
