#pragma once

#include <random>
#include <vector>

#include "framelab/framelab.hpp"
#include "oracles.hpp"

namespace testing_support {

using framelab::Rational;

inline framelab::VectorFamily<Rational> family(const oracle::QRows& rows, std::size_t n) {
    return framelab::VectorFamily<Rational>::from_vectors(n, rows);
}

inline framelab::VectorFamily<Rational> family(std::size_t n, std::initializer_list<std::initializer_list<long>> rows) {
    oracle::QRows q;
    for (const auto& r : rows) {
        oracle::QVec v;
        for (long x : r) v.emplace_back(x);
        q.push_back(v);
    }
    return family(q, n);
}

inline oracle::QRows rows_of(const framelab::VectorFamily<Rational>& f) {
    oracle::QRows out;
    for (std::size_t i = 0; i < f.size(); ++i) out.push_back(f.vector(i));
    return out;
}

inline framelab::Subspace<Rational> span(std::size_t n, std::initializer_list<std::initializer_list<Rational>> rows) {
    return framelab::Subspace<Rational>::span_of(n, framelab::Matrix<Rational>(rows));
}

/// The six subspaces of 3-space used as the running example.
inline framelab::SubspaceFamily<Rational> six_subspaces() {
    const Rational h(1, 2);
    return {3,
            {span(3, {{1, 0, 0}, {0, 1, 0}}), span(3, {{0, 1, 0}}), span(3, {{0, 0, 1}}), span(3, {{h, h, 0}}),
             span(3, {{0, h, h}}), span(3, {{h, 0, h}})}};
}

inline framelab::Matrix<Rational> shear() { return framelab::Matrix<Rational>{{1, 0, 0}, {-1, 1, 0}, {0, 0, 1}}; }

inline framelab::VectorFamily<Rational> five_vectors() {
    return family(3, {{1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {0, 1, 1}, {1, 0, 1}});
}

/// Random Parseval frame: M Gaussian vectors in N-space after the canonical
/// tight transform.
inline framelab::VectorFamily<double> random_parseval(std::mt19937_64& rng, std::size_t m, std::size_t n) {
    std::normal_distribution<double> g;
    framelab::Matrix<double> rows(m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) rows(i, j) = g(rng);
    return framelab::canonical_tight_transform(framelab::VectorFamily<double>(n, rows));
}

}  // namespace testing_support
