#pragma once

#include <cstdint>
#include <random>

namespace resil::rng {

// Engine seeded from (run seed, stream index). mt19937_64 plus seed_seq is
// fully specified by the standard, so streams reproduce across platforms.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

// Unbiased draw from [0, bound) by rejection. std::uniform_int_distribution is
// implementation-defined, which would break bit-reproducibility of p-values.
inline std::uint64_t uniform_below(std::mt19937_64& gen, std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v = gen();
    while (v >= limit) v = gen();
    return v % bound;
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace resil::rng
