#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace tdfdr::rng {

using Engine = std::mt19937_64;

// Stream domain tags. Each consumer of randomness draws from its own
// sub-stream so that adding draws in one place never shifts another.
inline constexpr std::uint64_t kScoreStream = 0x5c0e;
inline constexpr std::uint64_t kLabelStream = 0x1abe1;
inline constexpr std::uint64_t kSplitStream = 0x5b17;
inline constexpr std::uint64_t kAdaptivePart1 = 0xada1;
inline constexpr std::uint64_t kAdaptivePart2 = 0xada2;
inline constexpr std::uint64_t kDataStream = 0xda7a;
inline constexpr std::uint64_t kMethodStream = 0x3e7d;
inline constexpr std::uint64_t kPooledStream = 0x9001;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Hashes a master seed and a path of stream coordinates (tag, replicate,
/// test index, ...) into an engine seed. Distinct paths give unrelated seeds.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept;

inline Engine make_stream(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    return Engine{derive_seed(master, path)};
}

/// Uniform double on [0, 1) with 53 random bits.
inline double uniform01(Engine& eng) noexcept {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Uniform integer on [0, bound). bound must be positive.
std::size_t uniform_index(Engine& eng, std::size_t bound);

}  // namespace tdfdr::rng
