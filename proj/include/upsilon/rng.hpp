#pragma once

// Seeded random streams. Every stream is derived from the master seed and a
// path of integer tags (program id, episode, role ...), so the draw sequence of
// a rollout does not depend on which worker ran it or in what order.
//
// Draw helpers avoid std:: distributions, whose output is
// implementation-defined; reports must be bit-identical across toolchains.

#include <cstdint>
#include <initializer_list>
#include <random>

namespace upsilon {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = mix64(master);
    for (std::uint64_t tag : path) s = mix64(s ^ mix64(tag + 0x632be59bd9b4e019ull));
    return s;
}

// Stream roles mixed into derived seeds.
namespace stream {
inline constexpr std::uint64_t environment = 1;
inline constexpr std::uint64_t agent = 2;
inline constexpr std::uint64_t bootstrap = 3;
inline constexpr std::uint64_t mixture = 4;
inline constexpr std::uint64_t sampling = 5;
inline constexpr std::uint64_t signature = 6;
inline constexpr std::uint64_t permutation = 7;
}  // namespace stream

class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    bool bit() { return (engine_() >> 63) != 0; }

    /// Uniform in [0, n), n >= 1, by rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// Uniform in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 engine_;
};

}  // namespace upsilon
