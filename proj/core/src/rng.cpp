#include "tdfdr/rng.hpp"

#include "tdfdr/error.hpp"

namespace tdfdr::rng {

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t h = splitmix64(master);
    for (const auto coord : path) {
        h = splitmix64(h ^ splitmix64(coord + 0x632be59bd9b4e019ULL));
    }
    return h;
}

std::size_t uniform_index(Engine& eng, std::size_t bound) {
    if (bound == 0) throw InvalidArgument("uniform_index: bound must be positive");
    std::uniform_int_distribution<std::size_t> dist(0, bound - 1);
    return dist(eng);
}

}  // namespace tdfdr::rng
