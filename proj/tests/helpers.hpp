#pragma once

#include "pcv/engine.hpp"
#include "pcv/rng.hpp"

namespace pcv::testing {

inline Matrix random_matrix(Index rows, Index cols, SplitMix64& rng) {
    Matrix m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    return m;
}

// rank-r structure plus independent noise, the collinear shape the
// generators are built for
inline Matrix collinear_matrix(Index rows, Index cols, Index rank, double noise,
                               SplitMix64& rng) {
    Matrix x = random_matrix(rows, rank, rng) * random_matrix(rank, cols, rng);
    for (Index i = 0; i < x.size(); ++i) x.data()[i] += noise * rng.normal();
    return x;
}

inline Vector random_vector(Index n, SplitMix64& rng) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = rng.normal();
    return v;
}

inline SegmentPlan manual_plan(std::vector<int> assignment, int k) {
    SegmentPlan p;
    p.K = k;
    p.assignment = std::move(assignment);
    p.scheme = SplitScheme::random;
    return p;
}

}  // namespace pcv::testing
