#include "msrl/rng.hpp"

#include <cmath>

namespace msrl {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

} // namespace

Rng Rng::derive(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t state = seed ^ (0x6a09e667f3bcc909ull + stream * 0x3c6ef372fe94f82aull);
    const std::uint64_t a = splitmix64(state);
    const std::uint64_t b = splitmix64(state);
    return Rng(a ^ (b << 1));
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
}

double Rng::chi_squared(int df) {
    double acc = 0.0;
    for (int i = 0; i < df; ++i) {
        const double z = normal();
        acc += z * z;
    }
    return acc;
}

std::size_t Rng::uniform_index(std::size_t n) {
    // Lemire-style rejection to stay unbiased.
    const std::uint64_t bound = n;
    const std::uint64_t threshold = (0ull - bound) % bound;
    while (true) {
        const std::uint64_t r = gen_();
        if (r >= threshold) return static_cast<std::size_t>(r % bound);
    }
}

} // namespace msrl
