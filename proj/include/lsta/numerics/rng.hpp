#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace lsta {

/// Deterministic generator. Distributions are computed here rather than
/// through <random> distributions so sequences match across standard
/// libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n);
    /// Standard normal via Box-Muller.
    double normal();

    std::vector<std::size_t> permutation(std::size_t n);

private:
    std::mt19937_64 engine_;
};

/// Mixes a seed with a stream id (e.g. epoch) into an independent seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

} // namespace lsta
