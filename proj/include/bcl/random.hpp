#pragma once

// Seeded random streams and low-discrepancy sequences.
//
// Generators are implemented directly (no std distributions) so that sample
// streams are identical across standard libraries and platforms.

#include "bcl/geometry.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace bcl {

inline std::uint64_t splitmix64(std::uint64_t& state)
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Combines a seed with a stream index into an independent-looking seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream)
{
    std::uint64_t s = seed ^ (0x6a09e667f3bcc909ULL + stream * 0x9e3779b97f4a7c15ULL);
    splitmix64(s);
    return splitmix64(s);
}

/// xoshiro256** with splitmix64 seeding.
class Rng {
public:
    explicit Rng(std::uint64_t seed)
    {
        std::uint64_t s = seed;
        for (auto& w : state_) {
            w = splitmix64(s);
        }
    }

    std::uint64_t next()
    {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_open0() { return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53; }

    /// Standard normal pair via Box-Muller.
    std::array<double, 2> normal_pair()
    {
        const double u1 = uniform_open0();
        const double u2 = uniform();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * std::numbers::pi * u2;
        return {rad * std::cos(ang), rad * std::sin(ang)};
    }

    /// Complex standard normal (independent real and imaginary parts).
    std::complex<double> complex_normal()
    {
        auto g = normal_pair();
        return {g[0], g[1]};
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::array<std::uint64_t, 4> state_{};
};

/// Uniform point on the unit sphere of C^n.
inline Point sample_sphere(Rng& rng, Eigen::Index n)
{
    Point z(n);
    for (;;) {
        for (Eigen::Index i = 0; i < n; ++i) {
            z(i) = rng.complex_normal();
        }
        const double len = z.norm();
        if (len > 1e-300) {
            return z / len;
        }
    }
}

/// Uniform point in the unit ball of C^n (normalized volume measure).
inline Point sample_ball(Rng& rng, Eigen::Index n)
{
    const double radius = std::pow(rng.uniform(), 1.0 / (2.0 * static_cast<double>(n)));
    return radius * sample_sphere(rng, n);
}

/// Radical inverse of `index` in the given base (van der Corput).
inline double radical_inverse(std::uint64_t base, std::uint64_t index)
{
    double result = 0.0;
    double f = 1.0 / static_cast<double>(base);
    while (index > 0) {
        result += f * static_cast<double>(index % base);
        index /= base;
        f /= static_cast<double>(base);
    }
    return result;
}

/// Halton sequence coordinate `dim` of point `index`, using the first primes.
inline double halton(std::size_t dim, std::uint64_t index)
{
    static constexpr std::array<std::uint64_t, 16> primes{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
    return radical_inverse(primes.at(dim), index + 1);
}

}  // namespace bcl
