// SPDX-License-Identifier: Apache-2.0
//
// geochan: geometry-based radio channel estimation, prediction, and fusion
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
// ------------------------------------------------------------------------

#ifndef GEOCHAN_RANDOM_HPP
#define GEOCHAN_RANDOM_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

namespace geochan {

// SplitMix64 mixing step. Used to derive independent, reproducible
// sub-stream seeds from a master seed plus a list of integer tags
// (run index, time step, anchor index, purpose id, ...).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t s = splitmix64(master);
    for (std::uint64_t t : tags)
        s = splitmix64(s ^ t);
    return s;
}

// Seeded random stream with explicit Box-Muller normals so that draws are
// bit-reproducible independent of the standard library's distribution
// implementations.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) : rng_(seed) {}

    // Uniform draw in [0, 1) with 53 random bits.
    double uniform() { return double(rng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal draw.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0)
            u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    // Circular complex Gaussian draw with total variance `variance`
    // (real and imaginary parts each carry half of it).
    std::complex<double> circular_normal(double variance) {
        const double s = std::sqrt(0.5 * variance);
        const double re = s * normal();
        const double im = s * normal();
        return {re, im};
    }

    std::uint64_t raw() { return rng_(); }

  private:
    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace geochan

#endif
