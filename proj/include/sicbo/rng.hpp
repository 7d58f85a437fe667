#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>

// Deterministic random number generation. Every stochastic component draws
// through this wrapper; the mappings below (not std::*_distribution, whose
// algorithms are implementation-defined) keep runs reproducible across
// platforms and re-implementable in other languages. See README for the
// exact derivations.

namespace sicbo {

// SplitMix64 finalizer; used to derive per-trial seeds from a base seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t trial_index) {
    return splitmix64(base_seed + trial_index);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform on [0,1) with 53-bit resolution.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

    // One Box-Muller pair; consumes exactly two generator words.
    // u1 lies in (0,1] so the logarithm is finite.
    void normal_pair(double& z0, double& z1) {
        const double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        z0 = r * std::cos(a);
        z1 = r * std::sin(a);
    }

    // n standard normals; whole pairs are drawn and the spare value of an odd
    // tail is discarded, so the stream position depends only on n.
    void normals(double* out, std::size_t n) {
        std::size_t k = 0;
        for (; k + 2 <= n; k += 2) normal_pair(out[k], out[k + 1]);
        if (k < n) {
            double spare;
            normal_pair(out[k], spare);
        }
    }

    double normal() {
        double z0, z1;
        normal_pair(z0, z1);
        return z0;
    }

    std::uint64_t next_u64() { return gen_(); }

    // Uniform integer in [0, n) by rejection; unbiased.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % n;
        std::uint64_t v = gen_();
        while (v >= limit) v = gen_();
        return v % n;
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace sicbo
