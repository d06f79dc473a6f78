#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "sbm/types.hpp"

namespace sbm {

namespace detail {

// Kahan-compensated accumulator; Monte Carlo tolerances are tighter than
// naive accumulation error at n ~ 10^6 terms.
struct Accumulator {
    double sum = 0.0;
    double comp = 0.0;
    void add(double x) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

inline double abs_pow(double x, int ell) {
    switch (ell) {
        case 1: return std::fabs(x);
        case 2: return x * x;
        case 3: return std::fabs(x) * x * x;
        case 4: {
            const double x2 = x * x;
            return x2 * x2;
        }
        case 8: {
            const double x2 = x * x;
            const double x4 = x2 * x2;
            return x4 * x4;
        }
        default: return std::pow(std::fabs(x), ell);
    }
}

}  // namespace detail

// The K mutually exclusive regular subgrids of the full grid {t_0,...,t_n}:
// subgrid i holds observation indices {i-1, i-1+K, ..., i-1+n_i*K} with
// n_i = floor((n-i+1)/K); its span is K * delta * n_i.
struct GridPartition {
    std::size_t n = 0;
    std::size_t K = 0;
    std::vector<std::vector<std::size_t>> subgrids;
    std::vector<std::size_t> counts;  // n_i
    std::vector<double> spans;        // T_{i,K} = K * delta * n_i
};

inline GridPartition subgrid_partition(std::size_t n, std::size_t K, double delta = 1.0) {
    if (K == 0) throw std::invalid_argument("subgrid_partition: K must be >= 1");
    if (K > n) throw std::invalid_argument("subgrid_partition: K must be <= n");
    GridPartition p;
    p.n = n;
    p.K = K;
    p.subgrids.resize(K);
    p.counts.resize(K);
    p.spans.resize(K);
    for (std::size_t i = 1; i <= K; ++i) {
        const std::size_t ni = (n - i + 1) / K;
        p.counts[i - 1] = ni;
        p.spans[i - 1] = static_cast<double>(K) * delta * static_cast<double>(ni);
        auto& g = p.subgrids[i - 1];
        g.reserve(ni + 1);
        for (std::size_t j = 0; j <= ni; ++j) g.push_back(i - 1 + j * K);
    }
    return p;
}

// l-th order realized power variation of cumulative observations:
// sum over consecutive pairs of |difference|^ell.
inline double realized_variation(const std::vector<double>& values, int ell) {
    if (values.size() < 2)
        throw std::invalid_argument("realized_variation: need at least 2 observations");
    if (ell < 1) throw std::invalid_argument("realized_variation: ell must be >= 1");
    detail::Accumulator acc;
    for (std::size_t i = 1; i < values.size(); ++i)
        acc.add(detail::abs_pow(values[i] - values[i - 1], ell));
    return acc.sum;
}

// Full-grid realized variation computed directly from increments.
inline double full_grid_variation(const IncrementSeries& series, int ell) {
    if (series.values.empty()) throw std::invalid_argument("full_grid_variation: empty series");
    if (ell < 1) throw std::invalid_argument("full_grid_variation: ell must be >= 1");
    detail::Accumulator acc;
    for (double v : series.values) acc.add(detail::abs_pow(v, ell));
    return acc.sum;
}

// Sparse-subgrid average (1/K) sum_i (1/T_{i,K}) [X,X]_ell over subgrid i.
// Subgrid differences are sums of K consecutive raw increments; the
// cumulative path is anchored at X_0 = 0, which is harmless by base-point
// invariance of the variation.
inline double averaged_sparse_variation(const IncrementSeries& series, std::size_t K, int ell) {
    const std::size_t n = series.values.size();
    if (n == 0) throw std::invalid_argument("averaged_sparse_variation: empty series");
    if (K == 0 || K > n) throw std::invalid_argument("averaged_sparse_variation: K out of range");
    if (ell < 1) throw std::invalid_argument("averaged_sparse_variation: ell must be >= 1");
    const double delta = series.scheme.delta();
    const double* v = series.values.data();

    // Window m covers increments [m, m+K) and belongs to subgrid (m mod K)+1;
    // its sum is a prefix-sum difference, so every window costs O(1).
    std::vector<double> prefix(n + 1);
    {
        detail::Accumulator run;
        prefix[0] = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            run.add(v[i]);
            prefix[i + 1] = run.sum;
        }
    }
    std::vector<detail::Accumulator> acc(K);
    std::vector<std::size_t> counts(K);
    for (std::size_t i = 0; i < K; ++i) counts[i] = (n - i) / K;
    for (std::size_t m = 0; m + K <= n; ++m)
        acc[m % K].add(detail::abs_pow(prefix[m + K] - prefix[m], ell));
    detail::Accumulator total;
    for (std::size_t i = 0; i < K; ++i) {
        if (counts[i] == 0) continue;
        const double span = static_cast<double>(K) * delta * static_cast<double>(counts[i]);
        total.add(acc[i].sum / span);
    }
    return total.sum / static_cast<double>(K);
}

}  // namespace sbm
