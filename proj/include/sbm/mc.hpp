#pragma once

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "sbm/estimators.hpp"
#include "sbm/simulate.hpp"
#include "sbm/tuning.hpp"
#include "sbm/types.hpp"
#include "sbm/variations.hpp"

namespace sbm {

struct MCConfig {
    ModelParams model;
    NoiseSpec noise;
    double T_days = 252.0;
    std::vector<double> frequencies_seconds;
    std::size_t replications = 200;
    std::uint64_t master_seed = 20240612;
    std::vector<std::string> estimators;
    double sigma0 = 1.0 / 15.874507866387544;  // annualized volatility 1: 1/sqrt(252)
    double day_seconds = kDefaultDaySeconds;
    unsigned threads = 0;  // 0 = all available cores

    void validate() const {
        model.validate();
        noise.validate();
        if (replications < 2) throw std::invalid_argument("MCConfig: replications must be >= 2");
        if (frequencies_seconds.empty())
            throw std::invalid_argument("MCConfig: frequencies must be nonempty");
        if (!(T_days > 0.0)) throw std::invalid_argument("MCConfig: T_days must be > 0");
    }
};

// One table cell: an estimator column at one sampling frequency.
struct MCCell {
    double freq_seconds = 0.0;
    std::string column;
    double truth = 0.0;
    double mean = 0.0;
    double sd = 0.0;
    double mse = 0.0;
    std::size_t failures = 0;
    std::size_t reps = 0;
    std::vector<double> values;  // per-replicate estimates, NaN on failure
};

struct MCSummary {
    std::vector<MCCell> cells;

    const MCCell& cell(double freq_seconds, const std::string& column) const {
        for (const auto& c : cells)
            if (c.freq_seconds == freq_seconds && c.column == column) return c;
        throw std::out_of_range("MCSummary: no such cell " + column);
    }
};

namespace detail {

// Replications are pre-assigned to slots; the reduction below runs in a
// fixed order, so the result does not depend on thread count.
template <class F>
void parallel_for(std::size_t count, unsigned threads, F&& body) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    if (threads <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t per = (count + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t lo = t * per;
        const std::size_t hi = std::min(count, lo + per);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

struct ColumnSpec {
    enum class Kind { MmeSigma, MmeKappa, SigmaPrime, SigmaFinal, Kappa };
    std::string name;
    Kind kind;
    int variant = 0;
    double truth = 0.0;
};

inline std::vector<ColumnSpec> expand_columns(const std::vector<std::string>& ids,
                                              const ModelParams& model) {
    using Kind = ColumnSpec::Kind;
    std::vector<ColumnSpec> cols;
    for (const auto& id : ids) {
        if (id == "mme-sigma") {
            cols.push_back({"mme_sigma", Kind::MmeSigma, 0, model.sigma});
        } else if (id == "mme-kappa") {
            cols.push_back({"mme_kappa", Kind::MmeKappa, 0, model.kappa});
        } else if (id == "sigma1" || id == "sigma2" || id == "sigma3") {
            const int v = id.back() - '0';
            cols.push_back({id + "_prime", Kind::SigmaPrime, v, model.sigma});
            cols.push_back({id + "_final", Kind::SigmaFinal, v, model.sigma});
        } else if (id == "kappa1" || id == "kappa2" || id == "kappa3") {
            cols.push_back({id, Kind::Kappa, id.back() - '0', model.kappa});
        } else {
            throw std::invalid_argument("unknown estimator id: " + id);
        }
    }
    return cols;
}

inline void summarize(MCCell& cell, double truth) {
    Accumulator sum;
    std::size_t ok = 0;
    for (double v : cell.values) {
        if (std::isnan(v)) continue;
        sum.add(v);
        ++ok;
    }
    cell.failures = cell.values.size() - ok;
    cell.reps = cell.values.size();
    cell.truth = truth;
    if (ok == 0) {
        cell.mean = cell.sd = cell.mse = std::numeric_limits<double>::quiet_NaN();
        return;
    }
    cell.mean = sum.sum / static_cast<double>(ok);
    Accumulator var, mse;
    for (double v : cell.values) {
        if (std::isnan(v)) continue;
        var.add((v - cell.mean) * (v - cell.mean));
        mse.add((v - truth) * (v - truth));
    }
    cell.sd = ok > 1 ? std::sqrt(var.sum / static_cast<double>(ok - 1)) : 0.0;
    cell.mse = mse.sum / static_cast<double>(ok);
}

}  // namespace detail

// Monte Carlo table: for each frequency and estimator column, the sample
// mean, standard deviation and MSE against the true parameter over R
// independent replications. Replicate r of frequency f draws its stream
// deterministically from (master_seed, f, r).
inline MCSummary run_table(const MCConfig& config) {
    config.validate();
    const auto cols = detail::expand_columns(config.estimators, config.model);
    if (cols.empty()) throw std::invalid_argument("run_table: no estimators requested");
    MCSummary summary;
    for (std::size_t fi = 0; fi < config.frequencies_seconds.size(); ++fi) {
        const double freq = config.frequencies_seconds[fi];
        const auto scheme =
            SamplingScheme::from_frequency(config.T_days, freq, config.day_seconds);
        std::vector<std::vector<double>> values(
            cols.size(), std::vector<double>(config.replications,
                                             std::numeric_limits<double>::quiet_NaN()));
        detail::parallel_for(config.replications, config.threads, [&](std::size_t r) {
            auto rng = make_stream(config.master_seed, fi, r);
            const auto series = simulate_increments(config.model, scheme, config.noise, rng);
            using Kind = detail::ColumnSpec::Kind;
            for (std::size_t c = 0; c < cols.size(); ++c) {
                try {
                    switch (cols[c].kind) {
                        case Kind::MmeSigma:
                            values[c][r] = std::sqrt(mme_sigma2(series));
                            break;
                        case Kind::MmeKappa:
                            values[c][r] = mme_kappa(series);
                            break;
                        case Kind::SigmaPrime:
                        case Kind::SigmaFinal: {
                            const auto trace = plugin_sigma(
                                series, config.sigma0,
                                static_cast<SigmaVariant>(cols[c].variant));
                            values[c][r] = cols[c].kind == Kind::SigmaPrime
                                               ? trace.prime_value()
                                               : trace.final_value();
                            // the matching prime/final column shares the trace
                            if (c + 1 < cols.size() &&
                                cols[c + 1].variant == cols[c].variant &&
                                cols[c + 1].kind == Kind::SigmaFinal) {
                                values[c + 1][r] = trace.final_value();
                                ++c;
                            }
                            break;
                        }
                        case Kind::Kappa: {
                            const auto trace = plugin_kappa(
                                series, config.sigma0,
                                static_cast<KappaVariant>(cols[c].variant));
                            values[c][r] = trace.final_value();
                            break;
                        }
                    }
                } catch (const std::exception&) {
                    // recorded as a per-cell failure
                }
            }
        });
        for (std::size_t c = 0; c < cols.size(); ++c) {
            MCCell cell;
            cell.freq_seconds = freq;
            cell.column = cols[c].name;
            cell.values = std::move(values[c]);
            detail::summarize(cell, cols[c].truth);
            summary.cells.push_back(std::move(cell));
        }
    }
    return summary;
}

// Exact moments of centered Gaussian white noise with std dev rho, for
// oracle-K tuning: E eps~^(2k) = (2k-1)!! (2 rho^2)^k for the differenced
// noise eps~ = eps_2 - eps_1.
inline NoiseMoments gaussian_noise_moments(double rho) {
    const double r2 = rho * rho;
    const double r4 = r2 * r2;
    const double r8 = r4 * r4;
    NoiseMoments m;
    m.m2_eps = r2;
    m.m4_eps = 3.0 * r4;
    m.m4_diff = 12.0 * r4;
    m.m8_diff = 1680.0 * r8;
    m.e_eps = std::max(1536.0 * r8, kMomentFloor);
    return m;
}

struct LogLogFit {
    double slope = 0.0;
    double intercept = 0.0;
    double half_width = 0.0;  // 95% CI half-width for the slope
    double r2 = 1.0;
};

// OLS fit of y on x with a t-interval for the slope (n-2 dof).
inline LogLogFit fit_log_log(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t N = x.size();
    if (N != y.size() || N < 3) throw std::invalid_argument("fit_log_log: need >= 3 points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= N;
    my /= N;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_log_log: degenerate x values");
    LogLogFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double resid = y[i] - fit.intercept - fit.slope * x[i];
        sse += resid * resid;
    }
    fit.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    const double dof = static_cast<double>(N - 2);
    const double se = std::sqrt(std::max(sse, 0.0) / dof / sxx);
    const boost::math::students_t dist(dof);
    fit.half_width = boost::math::quantile(dist, 0.975) * se;
    return fit;
}

enum class RateEstimator {
    SigmaUnbiasedOracle,  // unbiased sigma estimator, K*_2 from true moments
    SigmaPlugin3,         // data-driven sigma variant 3
    KappaUnbiasedOracle,  // unbiased kappa estimator, K*_4 from true moments
    KappaPlugin3,         // data-driven kappa variant 3
};

struct RatePoint {
    double T_days = 0.0;
    double variance = 0.0;
    double log_T = 0.0;
    double log_var = 0.0;
    std::size_t reps = 0;
    bool dropped = false;
};

struct RateRegressionResult {
    LogLogFit fit;
    std::vector<RatePoint> points;
    std::size_t dropped = 0;
};

// Monte Carlo variance of the chosen estimator across horizons, then an
// OLS fit of log variance against log horizon.
inline RateRegressionResult rate_regression(const MCConfig& base, double freq_seconds,
                                            const std::vector<double>& T_list,
                                            RateEstimator which) {
    if (T_list.size() < 3) throw std::invalid_argument("rate_regression: need >= 3 horizons");
    MCConfig config = base;
    config.frequencies_seconds = {freq_seconds};
    config.validate();
    const auto true_moments = gaussian_noise_moments(config.noise.rho);
    const double sigma2_true = config.model.sigma * config.model.sigma;

    RateRegressionResult result;
    for (std::size_t ti = 0; ti < T_list.size(); ++ti) {
        const double T = T_list[ti];
        const auto scheme = SamplingScheme::from_frequency(T, freq_seconds, config.day_seconds);
        TheoryInputs in;
        in.n = scheme.n;
        in.T = T;
        in.sigma2 = sigma2_true;
        in.kappa = config.model.kappa;
        in.m2_eps = true_moments.m2_eps;
        in.m4_eps = true_moments.m4_eps;
        in.m4_diff = true_moments.m4_diff;
        in.e_eps = true_moments.e_eps;

        std::vector<double> values(config.replications,
                                   std::numeric_limits<double>::quiet_NaN());
        detail::parallel_for(config.replications, config.threads, [&](std::size_t r) {
            // common random numbers across horizons: replicate r draws from
            // one stream for every T, so per-horizon variance estimation
            // errors are correlated and perturb the fitted slope far less
            auto rng = make_stream(config.master_seed, 1000, r);
            const auto series = simulate_increments(config.model, scheme, config.noise, rng);
            try {
                switch (which) {
                    case RateEstimator::SigmaUnbiasedOracle: {
                        const double s2 = tsrv_sigma2_unbiased(series, k_star_2(in));
                        values[r] = std::sqrt(std::max(s2, 0.0));
                        break;
                    }
                    case RateEstimator::SigmaPlugin3:
                        values[r] =
                            plugin_sigma(series, config.sigma0, SigmaVariant::UnbiasedOpt)
                                .final_value();
                        break;
                    case RateEstimator::KappaUnbiasedOracle:
                        values[r] = ts_kappa_unbiased(series, k_star_4(in), sigma2_true);
                        break;
                    case RateEstimator::KappaPlugin3:
                        values[r] =
                            plugin_kappa(series, config.sigma0, KappaVariant::UnbiasedOpt)
                                .final_value();
                        break;
                }
            } catch (const std::exception&) {
            }
        });
        double mean = 0.0;
        std::size_t ok = 0;
        for (double v : values)
            if (!std::isnan(v)) {
                mean += v;
                ++ok;
            }
        RatePoint point;
        point.T_days = T;
        point.reps = ok;
        if (ok >= 2) {
            mean /= ok;
            double var = 0.0;
            for (double v : values)
                if (!std::isnan(v)) var += (v - mean) * (v - mean);
            point.variance = var / static_cast<double>(ok - 1);
        }
        if (!(point.variance > 0.0)) {
            point.dropped = true;
            ++result.dropped;
        } else {
            point.log_T = std::log(T);
            point.log_var = std::log(point.variance);
        }
        result.points.push_back(point);
    }
    std::vector<double> xs, ys;
    for (const auto& p : result.points)
        if (!p.dropped) {
            xs.push_back(p.log_T);
            ys.push_back(p.log_var);
        }
    result.fit = fit_log_log(xs, ys);
    return result;
}

// Cumulants of the symmetric Variance Gamma process at unit time, from the
// log characteristic function -(1/kappa) log(1 + kappa sigma^2 u^2 / 2).
inline double vg_cumulant(int k, double sigma, double kappa) {
    const double s2 = sigma * sigma;
    switch (k) {
        case 2: return s2;
        case 4: return 3.0 * kappa * s2 * s2;
        case 6: return 30.0 * kappa * kappa * s2 * s2 * s2;
        case 8: return 630.0 * kappa * kappa * kappa * s2 * s2 * s2 * s2;
        default: throw std::invalid_argument("vg_cumulant: unsupported order");
    }
}

struct NoiseLimitPoint {
    double freq_seconds = 0.0;
    double delta = 0.0;
    double mean_delta_sigma2 = 0.0;   // target 2 rho^2 as delta -> 0
    double mean_kappa_over_delta = 0.0;  // target 1 for Gaussian noise
};

// Noise-dominated limits of the plain MMEs over shrinking grid spacings.
inline std::vector<NoiseLimitPoint> noise_limit_scan(const MCConfig& config) {
    config.validate();
    std::vector<NoiseLimitPoint> out;
    for (std::size_t fi = 0; fi < config.frequencies_seconds.size(); ++fi) {
        const double freq = config.frequencies_seconds[fi];
        const auto scheme =
            SamplingScheme::from_frequency(config.T_days, freq, config.day_seconds);
        const double delta = scheme.delta();
        std::vector<double> s2(config.replications), kap(config.replications);
        detail::parallel_for(config.replications, config.threads, [&](std::size_t r) {
            auto rng = make_stream(config.master_seed, 2000 + fi, r);
            const auto series = simulate_increments(config.model, scheme, config.noise, rng);
            s2[r] = delta * mme_sigma2(series);
            kap[r] = mme_kappa(series) / delta;
        });
        NoiseLimitPoint p;
        p.freq_seconds = freq;
        p.delta = delta;
        for (std::size_t r = 0; r < config.replications; ++r) {
            p.mean_delta_sigma2 += s2[r];
            p.mean_kappa_over_delta += kap[r];
        }
        p.mean_delta_sigma2 /= config.replications;
        p.mean_kappa_over_delta /= config.replications;
        out.push_back(p);
    }
    return out;
}

struct KappaExpansionCheck {
    double mc_mean = 0.0;
    double mc_sd = 0.0;
    double mc_mse = 0.0;
    double predicted_mean = 0.0;
    double predicted_mse = 0.0;
};

// Finite-horizon expansion of the noise-free fine-grid kurtosis MME: the
// Monte Carlo mean should track kappa + (3 c4^2 - 2 c6 c2)/(3 c2^4) / T and
// the MSE (c8 c2 - 4 c4 c6 + 4 c4^2 c2)/(9 c2^5) / T.
inline KappaExpansionCheck kappa_expansion_check(const MCConfig& config, double freq_seconds) {
    config.validate();
    const auto scheme =
        SamplingScheme::from_frequency(config.T_days, freq_seconds, config.day_seconds);
    std::vector<double> values(config.replications);
    const NoiseSpec no_noise{0.0};
    detail::parallel_for(config.replications, config.threads, [&](std::size_t r) {
        auto rng = make_stream(config.master_seed, 3000, r);
        const auto series = simulate_increments(config.model, scheme, no_noise, rng);
        values[r] = mme_kappa(series);
    });
    const double sigma = config.model.sigma;
    const double kappa = config.model.kappa;
    const double c2 = vg_cumulant(2, sigma, kappa);
    const double c4 = vg_cumulant(4, sigma, kappa);
    const double c6 = vg_cumulant(6, sigma, kappa);
    const double c8 = vg_cumulant(8, sigma, kappa);
    KappaExpansionCheck check;
    check.predicted_mean =
        kappa + (3.0 * c4 * c4 - 2.0 * c6 * c2) / (3.0 * c2 * c2 * c2 * c2) / config.T_days;
    check.predicted_mse = (c8 * c2 - 4.0 * c4 * c6 + 4.0 * c4 * c4 * c2) /
                          (9.0 * c2 * c2 * c2 * c2 * c2) / config.T_days;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= values.size();
    double var = 0.0, mse = 0.0;
    for (double v : values) {
        var += (v - mean) * (v - mean);
        mse += (v - kappa) * (v - kappa);
    }
    check.mc_mean = mean;
    check.mc_sd = std::sqrt(var / (values.size() - 1));
    check.mc_mse = mse / values.size();
    return check;
}

}  // namespace sbm
