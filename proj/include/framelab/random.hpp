#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "framelab/scalar.hpp"

namespace framelab {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent stream `stream` of a user seed, so parallel work items draw
/// the same numbers regardless of scheduling.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream + 0x5851f42d4c957f2dULL));
}

/// Integer coordinates drawn uniformly from [-bound, bound].
template <Scalar T>
std::vector<T> random_integer_vector(std::mt19937_64& rng, std::size_t n, int bound) {
    std::uniform_int_distribution<int> dist(-bound, bound);
    std::vector<T> v(n);
    for (auto& x : v) x = T(dist(rng));
    return v;
}

inline std::vector<double> random_unit_vector(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> gauss;
    std::vector<double> v(n);
    double s = 0.0;
    do {
        s = 0.0;
        for (auto& x : v) {
            x = gauss(rng);
            s += x * x;
        }
    } while (s == 0.0 && n > 0);
    const double inv = 1.0 / std::sqrt(s);
    for (auto& x : v) x *= inv;
    return v;
}

}  // namespace framelab
