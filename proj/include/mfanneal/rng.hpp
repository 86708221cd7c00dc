#pragma once

#include <cstdint>

namespace mfanneal {

/// SplitMix64 mixing step. Used for deterministic seed derivation only;
/// instance sampling itself runs on std::mt19937_64.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Per-task seed for a sweep record. A pure function of
/// (master_seed, n, sample_index), so the record set is independent of
/// scheduling and worker count.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t n,
                                 std::uint64_t sample_index) {
    std::uint64_t h = splitmix64(master_seed);
    h = splitmix64(h ^ n);
    h = splitmix64(h ^ sample_index);
    return h;
}

/// Maps a raw 64-bit draw to a double in [0, 1). Fixed mapping instead of
/// std::uniform_real_distribution, whose output is implementation-defined.
inline double uniform_unit(std::uint64_t raw) {
    return static_cast<double>(raw >> 11) * 0x1.0p-53;
}

} // namespace mfanneal
