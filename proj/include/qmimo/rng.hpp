#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace qmimo {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive statistically independent seeds
/// from a master seed and a list of counter ids.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> ids) {
    std::uint64_t s = mix64(master);
    for (std::uint64_t id : ids) s = mix64(s ^ mix64(id));
    return s;
}

inline Rng make_rng(std::uint64_t master, std::initializer_list<std::uint64_t> ids) {
    return Rng(derive_seed(master, ids));
}

}  // namespace qmimo
