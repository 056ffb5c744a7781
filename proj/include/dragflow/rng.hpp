// Counter-based random numbers. Every draw is a pure hash of
// (seed, stream, step, slot), so particle simulations are reproducible
// bit-for-bit regardless of evaluation order, and matched-seed runs over a
// parameter sweep see identical noise.
#pragma once

#include <cmath>
#include <cstdint>

namespace dragflow {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Hash a 4-word key into one 64-bit word by chaining the splitmix64
// finalizer. Each word is absorbed before the next mix, so distinct keys
// decorrelate fully.
inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t step,
                                  std::uint64_t slot) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ stream);
    h = splitmix64(h ^ step);
    h = splitmix64(h ^ slot);
    return h;
}

// Uniform double in the open interval (0,1); never returns 0 or 1, so it is
// safe under log().
inline double uniform_open(std::uint64_t seed, std::uint64_t stream, std::uint64_t step,
                           std::uint64_t slot) {
    const std::uint64_t h = counter_hash(seed, stream, step, slot);
    return ((double)(h >> 11) + 0.5) * 0x1p-53;
}

// Pair of independent standard normals via Box-Muller; consumes slots
// `slot` and `slot+1`.
inline void normal_pair(std::uint64_t seed, std::uint64_t stream, std::uint64_t step,
                        std::uint64_t slot, double& z0, double& z1) {
    const double u1 = uniform_open(seed, stream, step, slot);
    const double u2 = uniform_open(seed, stream, step, slot + 1);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 6.283185307179586476925286766559 * u2;
    z0 = r * std::cos(t);
    z1 = r * std::sin(t);
}

inline double normal_one(std::uint64_t seed, std::uint64_t stream, std::uint64_t step,
                         std::uint64_t slot) {
    double z0, z1;
    normal_pair(seed, stream, step, slot, z0, z1);
    return z0;
}

}  // namespace dragflow
