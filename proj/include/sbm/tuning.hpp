#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "sbm/estimators.hpp"
#include "sbm/types.hpp"

namespace sbm {

// Inputs of the closed-form optimal-K and MSE formulas.
struct TheoryInputs {
    std::size_t n = 0;
    double T = 0.0;
    double sigma2 = 0.0;
    double kappa = 0.0;
    double m2_eps = 0.0;   // E eps^2
    double m4_eps = 0.0;   // E eps^4
    double m4_diff = 0.0;  // E (eps_2-eps_1)^4
    double e_eps = 0.0;    // Var((eps_2-eps_1)^4)

    void validate() const {
        if (n < 2) throw std::invalid_argument("TheoryInputs: n must be >= 2");
        if (!(T > 0.0)) throw std::invalid_argument("TheoryInputs: T must be > 0");
        if (!(sigma2 > 0.0)) throw std::invalid_argument("TheoryInputs: sigma2 must be > 0");
    }
};

namespace detail {

// Round to nearest and clamp to [2, n/2]; guarantees K-1 >= 1 and at least
// two observations per subgrid.
inline std::size_t clamp_k(double raw, std::size_t n) {
    const std::size_t hi = std::max<std::size_t>(2, n / 2);
    if (!std::isfinite(raw)) return hi;
    const double rounded = std::round(raw);
    if (rounded <= 2.0) return 2;
    if (rounded >= static_cast<double>(hi)) return hi;
    return static_cast<std::size_t>(rounded);
}

inline double floored(double x) { return std::max(x, kMomentFloor); }

}  // namespace detail

// K minimizing 4 s^4 K/(3n) + 4 n^2 m2^2/(T^2 K^2):
// n * (6 m2^2 / (T^2 s^4))^(1/3).
inline std::size_t k_star_1(const TheoryInputs& in) {
    in.validate();
    const double s4 = in.sigma2 * in.sigma2;
    const double raw = static_cast<double>(in.n) *
                       std::cbrt(6.0 * in.m2_eps * in.m2_eps / (in.T * in.T * s4));
    return detail::clamp_k(raw, in.n);
}

// K minimizing 4 s^4 K/(3n) + 4 n (m4 + m2^2)/(T^2 K^2):
// n^(2/3) * (6 (m4 + m2^2) / (T^2 s^4))^(1/3).
inline std::size_t k_star_2(const TheoryInputs& in) {
    in.validate();
    const double s4 = in.sigma2 * in.sigma2;
    const double num = 6.0 * (detail::floored(in.m4_eps) + in.m2_eps * in.m2_eps);
    const double raw =
        std::pow(static_cast<double>(in.n), 2.0 / 3.0) * std::cbrt(num / (in.T * in.T * s4));
    return detail::clamp_k(raw, in.n);
}

// K minimizing 64 T^2 K^3/(5 n^3) + n^2 m4d^2/(T^2 K^2 s^8):
// n * (5 m4d^2 / (96 T^4 s^8))^(1/5).
inline std::size_t k_star_3(const TheoryInputs& in) {
    in.validate();
    const double s4 = in.sigma2 * in.sigma2;
    const double s8 = s4 * s4;
    const double m4d = detail::floored(in.m4_diff);
    const double T4 = in.T * in.T * in.T * in.T;
    const double raw = static_cast<double>(in.n) *
                       std::pow(5.0 * m4d * m4d / (96.0 * T4 * s8), 0.2);
    return detail::clamp_k(raw, in.n);
}

// K minimizing 64 T^2 K^3/(5 n^3) + 2 n e/(9 s^8 T^2 K^2):
// n^(4/5) * (5 e / (432 T^4 s^8))^(1/5).
inline std::size_t k_star_4(const TheoryInputs& in) {
    in.validate();
    const double s4 = in.sigma2 * in.sigma2;
    const double s8 = s4 * s4;
    const double T4 = in.T * in.T * in.T * in.T;
    const double raw = std::pow(static_cast<double>(in.n), 0.8) *
                       std::pow(5.0 * detail::floored(in.e_eps) / (432.0 * T4 * s8), 0.2);
    return detail::clamp_k(raw, in.n);
}

// Two-term MSE objectives whose integer minimizers the closed forms above
// approximate.
inline double mse_objective_sigma_sparse(const TheoryInputs& in, double K) {
    const double s4 = in.sigma2 * in.sigma2;
    const double n = static_cast<double>(in.n);
    return 4.0 * s4 * K / (3.0 * n) +
           4.0 * n * n * in.m2_eps * in.m2_eps / (in.T * in.T * K * K);
}

inline double mse_objective_sigma_unbiased(const TheoryInputs& in, double K) {
    const double s4 = in.sigma2 * in.sigma2;
    const double n = static_cast<double>(in.n);
    return 4.0 * s4 * K / (3.0 * n) +
           4.0 * n * (in.m4_eps + in.m2_eps * in.m2_eps) / (in.T * in.T * K * K);
}

inline double mse_objective_kappa_sparse(const TheoryInputs& in, double K) {
    const double s4 = in.sigma2 * in.sigma2;
    const double s8 = s4 * s4;
    const double n = static_cast<double>(in.n);
    return 64.0 / 5.0 * in.T * in.T * K * K * K / (n * n * n) +
           n * n * in.m4_diff * in.m4_diff / (in.T * in.T * K * K * s8);
}

inline double mse_objective_kappa_unbiased(const TheoryInputs& in, double K) {
    const double s4 = in.sigma2 * in.sigma2;
    const double s8 = s4 * s4;
    const double n = static_cast<double>(in.n);
    return 64.0 / 5.0 * in.T * in.T * K * K * K / (n * n * n) +
           2.0 * n * in.e_eps / (9.0 * s8 * in.T * in.T * K * K);
}

enum class MseFormula {
    SigmaSparseAtOptimum,    // leading MSE of the sparse estimator at K*_1
    SigmaUnbiasedAtOptimum,  // leading MSE of the unbiased estimator at K*_2
    KappaSparseAtOptimum,    // leading MSE of the sparse kappa estimator at K*_3
    KappaUnbiasedAtOptimum,  // leading MSE of the unbiased kappa estimator at K*_4
};

// Closed-form leading-order MSE rates of the optimally tuned estimators.
inline double theoretical_mse(MseFormula which, const TheoryInputs& in) {
    in.validate();
    const double s2 = in.sigma2;
    const double sigma = std::sqrt(s2);
    const double n = static_cast<double>(in.n);
    switch (which) {
        case MseFormula::SigmaSparseAtOptimum:
            return std::pow(2.0, 4.0 / 3.0) * std::cbrt(3.0) *
                       std::pow(in.m2_eps, 2.0 / 3.0) * std::pow(sigma, 8.0 / 3.0) *
                       std::pow(in.T, -2.0 / 3.0) +
                   3.0 * in.kappa * s2 * s2 / in.T;
        case MseFormula::SigmaUnbiasedAtOptimum:
            return std::pow(2.0, 4.0 / 3.0) * std::cbrt(3.0) *
                   std::cbrt(in.m4_eps + in.m2_eps * in.m2_eps) * std::pow(sigma, 8.0 / 3.0) *
                   std::pow(n, -1.0 / 3.0) * std::pow(in.T, -2.0 / 3.0);
        case MseFormula::KappaSparseAtOptimum:
            return 4.0 * std::pow(5.0, 0.6) * std::pow(3.0, -0.6) *
                   std::pow(in.m4_diff, 1.2) * std::pow(sigma, -24.0 / 5.0) *
                   std::pow(in.T, -0.4);
        case MseFormula::KappaUnbiasedAtOptimum:
            return std::pow(2.0, 13.0 / 5.0) * std::pow(5.0, 0.6) * std::pow(3.0, -1.8) *
                   std::pow(in.e_eps, 0.6) * std::pow(sigma, -24.0 / 5.0) *
                   std::pow(n, -0.6) * std::pow(in.T, -0.4);
    }
    throw std::invalid_argument("theoretical_mse: unknown formula");
}

enum class SigmaVariant { Sparse = 1, Unbiased = 2, UnbiasedOpt = 3 };
enum class KappaVariant { Sparse = 1, Unbiased = 2, UnbiasedOpt = 3 };

struct PluginStage {
    std::string label;
    std::size_t K = 1;
    double sigma2 = 0.0;  // raw estimate feeding the stage output (may be < 0)
    double value = 0.0;   // reported estimate (sigma or kappa)
    bool clamped = false; // sigma2 was clamped before feeding a K* formula
};

struct PluginTrace {
    std::vector<PluginStage> stages;
    NoiseMoments noise;
    double sigma0 = 0.0;

    const PluginStage& prime() const { return stages.front(); }
    const PluginStage& final() const { return stages.back(); }
    double prime_value() const { return stages.front().value; }
    double final_value() const { return stages.back().value; }
};

namespace detail {

inline TheoryInputs theory_from(const IncrementSeries& series, const NoiseMoments& m,
                                double sigma2) {
    TheoryInputs in;
    in.n = series.values.size();
    in.T = series.scheme.T;
    in.sigma2 = sigma2;
    in.m2_eps = m.m2_eps;
    in.m4_eps = m.m4_eps;
    in.m4_diff = m.m4_diff;
    in.e_eps = m.e_eps;
    return in;
}

// Negative intermediate sigma^2 estimates are clamped to the estimated
// noise variance before they feed a K* formula.
inline double sigma2_for_kstar(double sigma2, const NoiseMoments& m, bool& clamped) {
    if (sigma2 > 0.0) return sigma2;
    clamped = true;
    return std::max(m.m2_eps, kMomentFloor);
}

}  // namespace detail

// Two-stage plug-in procedure for sigma. Stage one computes K from the
// variant's K* formula with sigma0, stage two recomputes K with the stage
// one estimate. Variant 1: sparse estimator with K*_1; variant 2: unbiased
// estimator with K*_1; variant 3: unbiased estimator with K*_2.
inline PluginTrace plugin_sigma(const IncrementSeries& series, double sigma0,
                                SigmaVariant variant) {
    if (!(sigma0 > 0.0)) throw std::invalid_argument("plugin_sigma: sigma0 must be > 0");
    PluginTrace trace;
    trace.sigma0 = sigma0;
    trace.noise = estimate_noise_moments(series);

    const int v = static_cast<int>(variant);
    const auto kstar = [&](double sigma2, bool& clamped) {
        auto in = detail::theory_from(series, trace.noise,
                                      detail::sigma2_for_kstar(sigma2, trace.noise, clamped));
        return v == 3 ? k_star_2(in) : k_star_1(in);
    };
    const auto estimate = [&](std::size_t K) {
        return v == 1 ? tsrv_sigma2(series, K) : tsrv_sigma2_unbiased(series, K);
    };

    const std::string tag = "sigma" + std::to_string(v);
    bool clamped = false;
    const std::size_t K1 = kstar(sigma0 * sigma0, clamped);
    const double s2_prime = estimate(K1);
    trace.stages.push_back({tag + "_prime", K1, s2_prime,
                            std::sqrt(std::max(s2_prime, 0.0)), clamped});

    clamped = false;
    const std::size_t K2 = kstar(s2_prime, clamped);
    const double s2_final = estimate(K2);
    trace.stages.push_back({tag + "_final", K2, s2_final,
                            std::sqrt(std::max(s2_final, 0.0)), clamped});
    return trace;
}

// Plug-in procedure for kappa: obtains sigma from the variant-3 sigma
// chain, then runs the chosen kappa estimator with its K* rule. Variant 1:
// sparse kappa with K*_3; variant 2: unbiased kappa with K*_3; variant 3:
// unbiased kappa with K*_4.
inline PluginTrace plugin_kappa(const IncrementSeries& series, double sigma0,
                                KappaVariant variant) {
    PluginTrace trace = plugin_sigma(series, sigma0, SigmaVariant::UnbiasedOpt);
    const double sigma2 = trace.final().sigma2;
    if (!(sigma2 > 0.0))
        throw std::domain_error("plugin_kappa: non-positive sigma^2 plug-in");

    const int v = static_cast<int>(variant);
    const auto in = detail::theory_from(series, trace.noise, sigma2);
    const std::size_t K = v == 3 ? k_star_4(in) : k_star_3(in);
    const double value = v == 1 ? ts_kappa(series, K, sigma2)
                                : ts_kappa_unbiased(series, K, sigma2);
    trace.stages.push_back({"kappa" + std::to_string(v), K, sigma2, value, false});
    return trace;
}

}  // namespace sbm
