#pragma once

// Reference implementations for the tests, written independently of the
// library: direct enumeration instead of prefix sums, brute-force search
// instead of closed forms, moment products instead of cumulant formulas.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

// Averaged sparse variation by explicit subgrid enumeration over the
// cumulative path anchored at zero.
inline double averaged_sparse_variation(const std::vector<double>& increments, double delta,
                                        std::size_t K, int ell) {
    const std::size_t n = increments.size();
    std::vector<double> x(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) x[i + 1] = x[i] + increments[i];
    double total = 0.0;
    for (std::size_t i = 1; i <= K; ++i) {
        const std::size_t ni = (n - i + 1) / K;
        if (ni == 0) continue;
        double rv = 0.0;
        for (std::size_t j = 0; j < ni; ++j) {
            const std::size_t lo = (i - 1) + j * K;
            rv += std::pow(std::fabs(x[lo + K] - x[lo]), ell);
        }
        total += rv / (static_cast<double>(K) * delta * static_cast<double>(ni));
    }
    return total / static_cast<double>(K);
}

// Integer minimizer of an objective over K in [2, max(2, n/2)].
inline std::size_t brute_force_k(const std::function<double(double)>& objective,
                                 std::size_t n) {
    const std::size_t hi = std::max<std::size_t>(2, n / 2);
    std::size_t best = 2;
    double best_val = std::numeric_limits<double>::infinity();
    for (std::size_t K = 2; K <= hi; ++K) {
        const double val = objective(static_cast<double>(K));
        if (val < best_val) {
            best_val = val;
            best = K;
        }
    }
    return best;
}

// Raw moments of a Gamma(shape = delta/kappa, scale = kappa) variable:
// E tau^k = kappa^k * prod_{j<k} (delta/kappa + j).
inline double gamma_clock_moment(int k, double delta, double kappa) {
    double m = 1.0;
    for (int j = 0; j < k; ++j) m *= kappa * (delta / kappa + j);
    return m;
}

// Even moments of sigma * sqrt(tau) * Z at unit time:
// E X^{2k} = (2k-1)!! sigma^{2k} E tau^k.
inline double vg_even_moment(int two_k, double sigma, double kappa) {
    double dfact = 1.0;
    for (int j = two_k - 1; j >= 1; j -= 2) dfact *= j;
    return dfact * std::pow(sigma, two_k) * gamma_clock_moment(two_k / 2, 1.0, kappa);
}

// Cumulants of a symmetric distribution from its even raw moments.
inline double vg_cumulant_from_moments(int k, double sigma, double kappa) {
    const double m2 = vg_even_moment(2, sigma, kappa);
    const double m4 = vg_even_moment(4, sigma, kappa);
    const double m6 = vg_even_moment(6, sigma, kappa);
    const double m8 = vg_even_moment(8, sigma, kappa);
    switch (k) {
        case 2: return m2;
        case 4: return m4 - 3.0 * m2 * m2;
        case 6: return m6 - 15.0 * m4 * m2 + 30.0 * m2 * m2 * m2;
        case 8:
            return m8 - 28.0 * m6 * m2 - 35.0 * m4 * m4 + 420.0 * m4 * m2 * m2 -
                   630.0 * m2 * m2 * m2 * m2;
        default: return std::numeric_limits<double>::quiet_NaN();
    }
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double sample_variance(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

inline double raw_moment(const std::vector<double>& v, int k) {
    double s = 0.0;
    for (double x : v) s += std::pow(x, k);
    return s / static_cast<double>(v.size());
}

}  // namespace oracle
