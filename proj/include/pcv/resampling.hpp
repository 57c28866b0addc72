#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "pcv/errors.hpp"
#include "pcv/rng.hpp"

namespace pcv {

enum class SplitScheme { random, venetian };

inline const char* to_string(SplitScheme s) {
    return s == SplitScheme::random ? "random" : "venetian";
}

inline SplitScheme split_scheme_from_string(const std::string& s) {
    if (s == "random") return SplitScheme::random;
    if (s == "venetian") return SplitScheme::venetian;
    throw ValidationError("unknown split scheme '" + s + "'");
}

// Assignment of every row to one of K cross-validation segments.
// Segment sizes differ by at most one; the first (I mod K) segments carry
// the extra row.
struct SegmentPlan {
    int K = 0;
    std::vector<int> assignment;  // length I, values in 0..K-1
    std::uint64_t seed = 0;
    SplitScheme scheme = SplitScheme::random;

    long rows() const { return static_cast<long>(assignment.size()); }

    std::vector<std::vector<long>> segments() const {
        std::vector<std::vector<long>> seg(static_cast<std::size_t>(K));
        for (long i = 0; i < rows(); ++i)
            seg[static_cast<std::size_t>(assignment[static_cast<std::size_t>(i)])].push_back(i);
        return seg;
    }
};

// random: seeded shuffle, then contiguous blocks.
// venetian: row i goes to segment i mod K (deterministic, for debugging).
// Identical (I, K, seed, scheme) produce identical plans on every platform.
inline SegmentPlan make_splits(long rows, int k, std::uint64_t seed, SplitScheme scheme) {
    if (k < 2 || static_cast<long>(k) > rows) throw BadSegmentCount(k, rows);
    SegmentPlan plan;
    plan.K = k;
    plan.seed = seed;
    plan.scheme = scheme;
    plan.assignment.resize(static_cast<std::size_t>(rows));
    if (scheme == SplitScheme::venetian) {
        for (long i = 0; i < rows; ++i)
            plan.assignment[static_cast<std::size_t>(i)] = static_cast<int>(i % k);
        return plan;
    }
    std::vector<long> order(static_cast<std::size_t>(rows));
    std::iota(order.begin(), order.end(), 0L);
    SplitMix64 rng(seed);
    shuffle(order, rng);
    const long base = rows / k;
    const long extra = rows % k;
    std::size_t pos = 0;
    for (int s = 0; s < k; ++s) {
        const long size = base + (s < extra ? 1 : 0);
        for (long c = 0; c < size; ++c)
            plan.assignment[static_cast<std::size_t>(order[pos++])] = s;
    }
    return plan;
}

}  // namespace pcv
