#pragma once

#include <random>
#include <vector>

#include "sbm/rng.hpp"
#include "sbm/types.hpp"

namespace sbm {

// Draws the n i.i.d. subordinator increments of the random clock.
// Gamma clock:            dtau ~ Gamma(shape = delta/kappa, scale = kappa)
// Inverse Gaussian clock: dtau ~ IG(mean = delta, shape = delta^2/kappa)
// Both satisfy E dtau = delta and Var dtau = kappa * delta.
template <class Rng>
std::vector<double> sample_subordinator_increments(const ModelParams& params,
                                                   const SamplingScheme& scheme, Rng& rng) {
    params.validate();
    scheme.validate();
    const double delta = scheme.delta();
    std::vector<double> out(scheme.n);
    if (params.clock == ClockFamily::Gamma) {
        std::gamma_distribution<double> gamma(delta / params.kappa, params.kappa);
        for (auto& v : out) v = gamma(rng);
    } else {
        const double shape = delta * delta / params.kappa;
        for (auto& v : out) v = sample_inverse_gaussian(rng, delta, shape);
    }
    return out;
}

inline std::vector<double> sample_subordinator_increments(const ModelParams& params,
                                                          const SamplingScheme& scheme,
                                                          std::uint64_t seed) {
    auto rng = make_stream(seed);
    return sample_subordinator_increments(params, scheme, rng);
}

// Simulates observed increments
//   dX_i = sigma * sqrt(dtau_i) * Z_i + theta * dtau_i + b * delta
// plus, when rho > 0, the telescoping noise contribution
//   eps(i*delta) - eps((i-1)*delta) with eps i.i.d. N(0, rho^2);
// the n+1 noise values are attached to observation times, so consecutive
// noisy increments follow the MA(1) structure of differenced white noise.
template <class Rng>
IncrementSeries simulate_increments(const ModelParams& params, const SamplingScheme& scheme,
                                    const NoiseSpec& noise, Rng& rng) {
    params.validate();
    scheme.validate();
    noise.validate();
    const double delta = scheme.delta();
    IncrementSeries series;
    series.scheme = scheme;
    series.noisy = noise.rho > 0.0;
    series.values = sample_subordinator_increments(params, scheme, rng);

    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& v : series.values) {
        const double dtau = v;
        v = params.sigma * std::sqrt(dtau) * normal(rng) + params.theta * dtau +
            params.b * delta;
    }
    if (series.noisy) {
        double prev = noise.rho * normal(rng);
        for (auto& v : series.values) {
            const double cur = noise.rho * normal(rng);
            v += cur - prev;
            prev = cur;
        }
    }
    return series;
}

inline IncrementSeries simulate_increments(const ModelParams& params,
                                           const SamplingScheme& scheme, const NoiseSpec& noise,
                                           std::uint64_t seed) {
    auto rng = make_stream(seed);
    return simulate_increments(params, scheme, noise, rng);
}

}  // namespace sbm
