#pragma once

#include <cstdint>
#include <random>

namespace msrl {

/// Deterministic random stream. The engine is the standard-specified
/// mt19937_64; every transform on top of it (uniform doubles, normals via
/// the polar method, chi-squared, bounded integers) is implemented here so
/// draws are reproducible across standard libraries and platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Independent stream derived from (seed, stream) by splitmix64 mixing;
    /// parallel workers each take their own stream index.
    static Rng derive(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal, Marsaglia polar method (pairs cached).
    double normal();

    /// Chi-squared with df degrees of freedom as a sum of squared normals.
    double chi_squared(int df);

    /// Unbiased integer in [0, n).
    std::size_t uniform_index(std::size_t n);

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace msrl
