#pragma once

#include <cstdint>
#include <random>

namespace sbm {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

// Deterministic stream derivation: replicate r of run (seed, lane) gets its
// own generator, independent of evaluation order across threads.
inline std::mt19937_64 make_stream(std::uint64_t master_seed,
                                   std::uint64_t lane = 0,
                                   std::uint64_t replicate = 0) {
    std::uint64_t s = master_seed;
    std::uint64_t a = detail::splitmix64(s);
    s ^= 0x6a09e667f3bcc909ULL + lane;
    std::uint64_t b = detail::splitmix64(s);
    s ^= 0xbb67ae8584caa73bULL + replicate;
    std::uint64_t c = detail::splitmix64(s);
    std::uint64_t d = detail::splitmix64(s);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                      static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32),
                      static_cast<std::uint32_t>(d), static_cast<std::uint32_t>(d >> 32)};
    return std::mt19937_64(seq);
}

// Inverse Gaussian IG(mean mu, shape lambda) via the transformation method
// of Michael, Schucany and Haas (1976).
template <class Rng>
double sample_inverse_gaussian(Rng& rng, double mu, double lambda) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double v = normal(rng);
    const double y = v * v;
    const double x = mu + mu * mu * y / (2.0 * lambda) -
                     mu / (2.0 * lambda) * std::sqrt(4.0 * mu * lambda * y + mu * mu * y * y);
    if (unif(rng) <= mu / (mu + x)) return x;
    return mu * mu / x;
}

}  // namespace sbm
