#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace pcv {

// Project-wide pseudo-random generator: SplitMix64 (Steele, Lea & Flood,
// "Fast splittable pseudorandom number generators", OOPSLA 2014). Chosen
// because the whole sequence is defined by integer arithmetic only, so the
// same seed yields the same stream on every platform and compiler, and
// because substreams can be derived deterministically (see derive_seed).
// All randomness in the toolkit flows through this generator; every output
// file records the seeds it was produced from.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 bits of mantissa.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n) by rejection, no modulo bias.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t threshold = (0ULL - n) % n;
        for (;;) {
            std::uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    // Marsaglia polar method, one value per call; consumes a variable number
    // of draws, which is fine since every consumer owns its substream.
    double normal() {
        for (;;) {
            double u = 2.0 * uniform() - 1.0;
            double v = 2.0 * uniform() - 1.0;
            double s = u * u + v * v;
            if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }

  private:
    std::uint64_t state_;
};

// Deterministic substream derivation: hashing (seed, index) through one
// SplitMix64 round keeps independent consumers (PV-set i, class c, run r)
// on non-overlapping streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 g(seed ^ (0xA0761D6478BD642FULL + index * 0xE7037ED1A0B428DBULL));
    return g.next();
}

// Fisher-Yates with the project generator; std::shuffle is not portable
// across standard libraries.
template <typename T>
void shuffle(std::vector<T>& v, SplitMix64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.below(i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace pcv
