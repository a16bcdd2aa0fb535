#pragma once

#include <cstdint>

namespace tml {

// Counter-based generator: the value at index n depends only on (seed, n), so any site of a
// random potential can be evaluated independently and in any order. The mixing function is
// the splitmix64 finalizer; the algorithm is pinned and bit-exact on every platform.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t counter_bits(std::uint64_t seed, std::int64_t n) {
    return splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(n));
}

// Uniform on [0, 1) with 53 random mantissa bits.
inline double counter_unit(std::uint64_t seed, std::int64_t n) {
    return static_cast<double>(counter_bits(seed, n) >> 11) * 0x1.0p-53;
}

// Uniform on [-1, 1).
inline double counter_uniform_pm1(std::uint64_t seed, std::int64_t n) {
    return 2.0 * counter_unit(seed, n) - 1.0;
}

}  // namespace tml
