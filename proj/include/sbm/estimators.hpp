#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "sbm/types.hpp"
#include "sbm/variations.hpp"

namespace sbm {

// Floor applied to fourth/eighth noise-moment estimates where they feed a
// fractional power in a K* formula; raw values stay unclamped.
inline constexpr double kMomentFloor = 1e-30;

// Moment estimates of the microstructure noise built from full-grid
// realized variations of order 2, 4 and 8.
struct NoiseMoments {
    double m2_eps = 0.0;   // E eps^2 (rho^2)
    double m4_eps = 0.0;   // E eps^4, may be negative in finite samples
    double m4_diff = 0.0;  // E (eps_2 - eps_1)^4
    double m8_diff = 0.0;  // E (eps_2 - eps_1)^8
    double e_eps = 0.0;    // Var((eps_2 - eps_1)^4), clamped at kMomentFloor
};

struct EstimateReport {
    std::string estimator_id;
    double value = 0.0;
    std::size_t K_used = 1;
    double sigma_plugin = 0.0;
    NoiseMoments noise_moments;
    SamplingScheme scheme;
};

namespace detail {

inline double sample_mean(const std::vector<double>& v) {
    Accumulator acc;
    for (double x : v) acc.add(x);
    return acc.sum / static_cast<double>(v.size());
}

inline double central_moment(const std::vector<double>& v, int k, double mean) {
    Accumulator acc;
    for (double x : v) acc.add(abs_pow(x - mean, k) * ((k % 2 == 1 && x < mean) ? -1.0 : 1.0));
    return acc.sum / static_cast<double>(v.size());
}

}  // namespace detail

// Plain method-of-moments estimator [X,X]_2 / T.
inline double mme_sigma2(const IncrementSeries& series) {
    if (series.values.empty()) throw std::invalid_argument("mme_sigma2: empty series");
    return full_grid_variation(series, 2) / series.scheme.T;
}

// Centered variant: sample variance of increments divided by delta.
inline double mme_sigma2_centered(const IncrementSeries& series) {
    if (series.values.empty()) throw std::invalid_argument("mme_sigma2_centered: empty series");
    const double mean = detail::sample_mean(series.values);
    return detail::central_moment(series.values, 2, mean) / series.scheme.delta();
}

// Plain kurtosis-parameter estimator (T/3) [X,X]_4 / [X,X]_2^2.
inline double mme_kappa(const IncrementSeries& series) {
    if (series.values.empty()) throw std::invalid_argument("mme_kappa: empty series");
    const double rv2 = full_grid_variation(series, 2);
    if (rv2 <= 0.0) throw std::domain_error("mme_kappa: zero quadratic variation");
    const double rv4 = full_grid_variation(series, 4);
    return series.scheme.T / 3.0 * rv4 / (rv2 * rv2);
}

// Centered variant (delta/3) mu4/mu2^2 - delta.
inline double mme_kappa_centered(const IncrementSeries& series) {
    if (series.values.empty()) throw std::invalid_argument("mme_kappa_centered: empty series");
    const double delta = series.scheme.delta();
    const double mean = detail::sample_mean(series.values);
    const double mu2 = detail::central_moment(series.values, 2, mean);
    if (mu2 <= 0.0) throw std::domain_error("mme_kappa_centered: zero variance");
    const double mu4 = detail::central_moment(series.values, 4, mean);
    return delta / 3.0 * mu4 / (mu2 * mu2) - delta;
}

// Diagnostic 2*mu2^2 / (delta*|mu3|) - 1; a large value supports the
// negligible-skewness assumption. Returns +inf when mu3 vanishes.
inline double skewness_diagnostic(const IncrementSeries& series) {
    if (series.values.empty()) throw std::invalid_argument("skewness_diagnostic: empty series");
    const double mean = detail::sample_mean(series.values);
    const double mu2 = detail::central_moment(series.values, 2, mean);
    const double mu3 = detail::central_moment(series.values, 3, mean);
    if (mu3 == 0.0) return std::numeric_limits<double>::infinity();
    return 2.0 * mu2 * mu2 / (series.scheme.delta() * std::fabs(mu3)) - 1.0;
}

// Two-scale volatility estimator: averaged sparse quadratic variation.
inline double tsrv_sigma2(const IncrementSeries& series, std::size_t K) {
    return averaged_sparse_variation(series, K, 2);
}

// Intermediate noise-adjusted variant: subtracts the full-grid noise
// second-moment estimate; expectation is ((K-1)/K) sigma^2.
inline double tsrv_sigma2_noise_adjusted(const IncrementSeries& series, std::size_t K) {
    const double mu2_noise = series.scheme.delta() / series.scheme.T * full_grid_variation(series, 2);
    return tsrv_sigma2(series, K) - mu2_noise / (static_cast<double>(K) * series.scheme.delta());
}

// Unbiased two-scale volatility estimator (white noise): the averaged
// sparse variation minus a full-grid correction, both scaled by 1/(K-1).
inline double tsrv_sigma2_unbiased(const IncrementSeries& series, std::size_t K) {
    if (K < 2) throw std::invalid_argument("tsrv_sigma2_unbiased: K must be >= 2");
    const double Kd = static_cast<double>(K);
    const double sparse = averaged_sparse_variation(series, K, 2);
    const double full = full_grid_variation(series, 2);
    return Kd / (Kd - 1.0) * sparse - full / ((Kd - 1.0) * series.scheme.T);
}

// Two-scale kurtosis estimator with an explicit sigma^2 plug-in:
// (1/(3 sigma^4 K)) sum_i (1/T_i) [X,X]_4 over subgrid i, minus K*delta.
inline double ts_kappa(const IncrementSeries& series, std::size_t K, double sigma2_plugin) {
    if (!(sigma2_plugin > 0.0))
        throw std::invalid_argument("ts_kappa: sigma2 plug-in must be > 0");
    const double sigma4 = sigma2_plugin * sigma2_plugin;
    const double sparse4 = averaged_sparse_variation(series, K, 4);
    return sparse4 / (3.0 * sigma4) - static_cast<double>(K) * series.scheme.delta();
}

// Asymptotically debiased variant using full-grid noise moment estimates.
inline double ts_kappa_noise_adjusted(const IncrementSeries& series, std::size_t K,
                                      double sigma2_plugin) {
    if (!(sigma2_plugin > 0.0))
        throw std::invalid_argument("ts_kappa_noise_adjusted: sigma2 plug-in must be > 0");
    const double delta = series.scheme.delta();
    const double T = series.scheme.T;
    const double sigma4 = sigma2_plugin * sigma2_plugin;
    const double mu2_noise = delta / T * full_grid_variation(series, 2);
    const double mu4_noise = delta / T * full_grid_variation(series, 4);
    return ts_kappa(series, K, sigma2_plugin) - 2.0 / sigma2_plugin * mu2_noise -
           mu4_noise / (3.0 * sigma4 * static_cast<double>(K) * delta);
}

// Unbiased two-scale kurtosis estimator (white noise): four-term
// combination of sparse and full-grid variations of order 4 and 2.
inline double ts_kappa_unbiased(const IncrementSeries& series, std::size_t K,
                                double sigma2_plugin) {
    if (K < 2) throw std::invalid_argument("ts_kappa_unbiased: K must be >= 2");
    if (!(sigma2_plugin > 0.0))
        throw std::invalid_argument("ts_kappa_unbiased: sigma2 plug-in must be > 0");
    const double Kd = static_cast<double>(K);
    const double delta = series.scheme.delta();
    const double T = series.scheme.T;
    const double sigma4 = sigma2_plugin * sigma2_plugin;
    const double n = static_cast<double>(series.values.size());
    const double sparse4 = averaged_sparse_variation(series, K, 4);
    const double full4 = full_grid_variation(series, 4);
    const double full2 = full_grid_variation(series, 2);
    return Kd / (Kd - 1.0) * sparse4 / (3.0 * sigma4) - full4 / (3.0 * sigma4 * (Kd - 1.0) * T) -
           2.0 / (n * sigma2_plugin) * full2 - (Kd - 1.0) * delta;
}

// Noise-moment estimates from the finest grid.
inline NoiseMoments estimate_noise_moments(const IncrementSeries& series) {
    if (series.values.size() < 2)
        throw std::invalid_argument("estimate_noise_moments: need n >= 2");
    const double n = static_cast<double>(series.values.size());
    NoiseMoments m;
    const double rv2 = full_grid_variation(series, 2);
    const double rv4 = full_grid_variation(series, 4);
    const double rv8 = full_grid_variation(series, 8);
    m.m2_eps = rv2 / (2.0 * n);
    m.m4_diff = rv4 / n;
    m.m8_diff = rv8 / n;
    m.m4_eps = rv4 / (2.0 * n) - 3.0 * m.m2_eps * m.m2_eps;
    m.e_eps = std::max(m.m8_diff - m.m4_diff * m.m4_diff, kMomentFloor);
    return m;
}

}  // namespace sbm
