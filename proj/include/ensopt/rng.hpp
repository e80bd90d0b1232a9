#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ensopt {

// Deterministic random source. std::mt19937_64 has an ISO-pinned output
// sequence, and all distributions here are hand-rolled on top of the raw
// 64-bit stream, so results are bit-identical across platforms and
// standard-library implementations (the std::*_distribution classes are not).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform double in [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform double in (0, 1]; safe as a log() argument.
    double uniform_pos() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Uniform index in [0, n). Modulo bias is below n / 2^64.
    std::size_t uniform_index(std::size_t n) {
        return static_cast<std::size_t>(next_u64() % static_cast<std::uint64_t>(n));
    }

    // Standard normal via Box-Muller, no cached second value so the
    // stream position is always two uniforms per call.
    double normal() {
        const double u1 = uniform_pos();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

private:
    std::mt19937_64 gen_;
};

} // namespace ensopt
