#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "eqmin/types.hpp"

namespace testsupport {

// small hand-rolled generator for property tests
struct Gen {
    std::mt19937_64 rng;
    explicit Gen(std::uint64_t seed) : rng(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
    double log_uniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

    // interior point of the double-product quotient, kept away from the strata by `pad`
    eqmin::State interior(double pad = 0.05) {
        return {uniform(pad, eqmin::pi - pad), uniform(pad, eqmin::half_pi - pad), uniform(-eqmin::pi, eqmin::pi)};
    }
};

template <class F>
void for_all(std::uint64_t seed, int count, F&& body) {
    Gen g(seed);
    for (int i = 0; i < count; ++i) body(g, i);
}

}  // namespace testsupport
