#pragma once

#include <cmath>
#include <cstdint>

namespace smalldev {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11 constants).
// Each 128-bit counter maps to four independent 32-bit words under a 64-bit
// key, so the i-th draw of stream s is a pure function of (key, s, i): workers
// can consume disjoint index ranges with no shared state and no ordering
// constraints.
struct Philox4x32 {
    std::uint32_t v[4];

    static Philox4x32 generate(std::uint64_t key,
                               std::uint64_t ctr_lo,
                               std::uint64_t ctr_hi) {
        std::uint32_t c0 = static_cast<std::uint32_t>(ctr_lo);
        std::uint32_t c1 = static_cast<std::uint32_t>(ctr_lo >> 32);
        std::uint32_t c2 = static_cast<std::uint32_t>(ctr_hi);
        std::uint32_t c3 = static_cast<std::uint32_t>(ctr_hi >> 32);
        std::uint32_t k0 = static_cast<std::uint32_t>(key);
        std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = 0xD2511F53ULL * c0;
            const std::uint64_t p1 = 0xCD9E8D57ULL * c2;
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            c0 = hi1 ^ c1 ^ k0;
            c1 = lo1;
            c2 = hi0 ^ c3 ^ k1;
            c3 = lo0;
            k0 += 0x9E3779B9U;
            k1 += 0xBB67AE85U;
        }
        return Philox4x32{{c0, c1, c2, c3}};
    }
};

// Uniform in (0,1]: 53-bit mantissa from two 32-bit words, shifted away from 0
// so log() below is always finite.
[[nodiscard]] inline double bits_to_unit_open(std::uint32_t a, std::uint32_t b) {
    const std::uint64_t w = (static_cast<std::uint64_t>(a) << 32) | b;
    return static_cast<double>((w >> 11) + 1) * 0x1.0p-53;
}

// Uniform in [0,1).
[[nodiscard]] inline double bits_to_unit_half_open(std::uint32_t a, std::uint32_t b) {
    const std::uint64_t w = (static_cast<std::uint64_t>(a) << 32) | b;
    return static_cast<double>(w >> 11) * 0x1.0p-53;
}

// One N(0,1) variate per (seed, stream, sample, coordinate) via Box-Muller.
// stream separates independent vectors drawn for the same sample index.
[[nodiscard]] inline double standard_normal(std::uint64_t seed,
                                            std::uint32_t stream,
                                            std::uint64_t sample,
                                            std::uint32_t coordinate) {
    const std::uint64_t ctr_hi =
        (static_cast<std::uint64_t>(stream) << 32) | coordinate;
    const Philox4x32 r = Philox4x32::generate(seed, sample, ctr_hi);
    const double u1 = bits_to_unit_open(r.v[0], r.v[1]);
    const double u2 = bits_to_unit_half_open(r.v[2], r.v[3]);
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

} // namespace smalldev
