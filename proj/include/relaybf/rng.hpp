// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace relaybf {

/// Counter-based pseudo-random stream: a SplitMix64 walk whose starting
/// state is a hash of (seed, purpose tag, indices).  Streams derived with
/// distinct tags or indices are statistically independent, and a stream's
/// output depends only on its derivation key, never on evaluation order or
/// thread placement.
class RngStream {
public:
    RngStream() : state_(0x9e3779b97f4a7c15ULL) {}

    static constexpr std::uint64_t kTagChannelUplink = 0x6368616e5f66ULL;   // "chan_f"
    static constexpr std::uint64_t kTagChannelDownlink = 0x6368616e5f67ULL; // "chan_g"
    static constexpr std::uint64_t kTagRandomization = 0x72616e64ULL;       // "rand"
    static constexpr std::uint64_t kTagSbf = 0x736266ULL;                   // "sbf"
    static constexpr std::uint64_t kTagSymbols = 0x73796dULL;               // "sym"
    static constexpr std::uint64_t kTagNoise = 0x6e6f69ULL;                 // "noi"
    static constexpr std::uint64_t kTagSweep = 0x73776565ULL;               // "swee"
    static constexpr std::uint64_t kTagVerify = 0x76657269ULL;              // "veri"

    /// Derive a stream from a master seed, a purpose tag and up to three indices.
    static RngStream derive(std::uint64_t seed, std::uint64_t tag,
                            std::uint64_t i0 = 0, std::uint64_t i1 = 0,
                            std::uint64_t i2 = 0) {
        std::uint64_t h = mix(seed + 0x9e3779b97f4a7c15ULL);
        h = mix(h ^ tag);
        h = mix(h ^ i0);
        h = mix(h ^ i1);
        h = mix(h ^ i2);
        RngStream s;
        s.state_ = h;
        return s;
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    /// Uniform double in (0, 1]; never returns 0 so it is safe under log().
    double next_uniform() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Standard real normal N(0,1) via Box-Muller (consumes two uniforms).
    double next_normal() {
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    /// Circularly symmetric complex normal CN(0,1): real and imaginary parts
    /// independent N(0, 1/2).  Consumes exactly two uniforms.
    std::complex<double> next_cnormal() {
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double mag = std::sqrt(-std::log(u1)); // sqrt of Exp(1) radius^2
        return {mag * std::cos(2.0 * M_PI * u2), mag * std::sin(2.0 * M_PI * u2)};
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t state_;
};

} // namespace relaybf
