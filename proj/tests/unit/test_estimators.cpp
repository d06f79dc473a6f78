#include <catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "sbm/estimators.hpp"
#include "sbm/simulate.hpp"

using namespace sbm;

namespace {

IncrementSeries series_of(std::vector<double> values, double delta) {
    IncrementSeries s;
    s.scheme.n = values.size();
    s.scheme.T = delta * static_cast<double>(values.size());
    s.values = std::move(values);
    return s;
}

}  // namespace

TEST_CASE("constant increments give closed-form moment estimates", "[estimators]") {
    const double c = 0.3, delta = 0.5;
    const auto s = series_of(std::vector<double>(10, c), delta);
    // [X,X]_2 = n c^2, so sigma2 = n c^2 / (n delta) = c^2 / delta = 2 c^2
    CHECK(mme_sigma2(s) == Catch::Approx(2.0 * c * c));
    // kappa = (T/3) n c^4 / (n c^2)^2 = delta / 3
    CHECK(mme_kappa(s) == Catch::Approx(delta / 3.0));
    // centered variants see zero variance
    CHECK(mme_sigma2_centered(s) == Catch::Approx(0.0).margin(1e-18));
    CHECK_THROWS_AS(mme_kappa_centered(s), std::domain_error);
}

TEST_CASE("skewness diagnostic hand values", "[estimators]") {
    // increments 0,0,3: mu2 = 2, mu3 = 2 -> 2*4/(delta*2) - 1 = 4/delta - 1
    const auto s = series_of({0.0, 0.0, 3.0}, 1.0);
    CHECK(skewness_diagnostic(s) == Catch::Approx(3.0));
    const auto sym = series_of({-1.0, 1.0}, 1.0);
    CHECK(std::isinf(skewness_diagnostic(sym)));
}

TEST_CASE("K=1 two-scale estimators reduce to the plain MMEs", "[estimators]") {
    auto series = simulate_increments(ModelParams{}, SamplingScheme{2000, 8.0}, NoiseSpec{0.003},
                                      2024ULL);
    CHECK(tsrv_sigma2(series, 1) == Catch::Approx(mme_sigma2(series)).epsilon(1e-13));
    const double s2 = mme_sigma2(series);
    // ts_kappa at K=1 equals the MME rewritten with the sigma plug-in
    const double rv4 = full_grid_variation(series, 4);
    CHECK(ts_kappa(series, 1, s2) ==
          Catch::Approx(rv4 / (series.scheme.T * 3.0 * s2 * s2) - series.scheme.delta())
              .epsilon(1e-12));
}

TEST_CASE("all-zero series hits the deterministic estimator offsets", "[estimators]") {
    const double delta = 0.25;
    const auto s = series_of(std::vector<double>(40, 0.0), delta);
    CHECK(tsrv_sigma2(s, 5) == 0.0);
    CHECK(tsrv_sigma2_unbiased(s, 5) == 0.0);
    CHECK(ts_kappa(s, 5, 1.0) == Catch::Approx(-5.0 * delta));
    CHECK(ts_kappa_unbiased(s, 5, 1.0) == Catch::Approx(-4.0 * delta));
}

TEST_CASE("noise-adjusted and unbiased sigma estimators satisfy the exact identity",
          "[estimators]") {
    auto series = simulate_increments(ModelParams{}, SamplingScheme{5000, 20.0},
                                      NoiseSpec{0.004}, 55ULL);
    for (std::size_t K : {2, 5, 10}) {
        const double Kd = static_cast<double>(K);
        // unbiased = K/(K-1) * noise-adjusted, since the adjustment removes
        // exactly a 1/K share of the sparse estimator's expectation
        CHECK(tsrv_sigma2_unbiased(series, K) ==
              Catch::Approx(Kd / (Kd - 1.0) * tsrv_sigma2_noise_adjusted(series, K))
                  .epsilon(1e-10));
    }
    CHECK_THROWS_AS(tsrv_sigma2_unbiased(series, 1), std::invalid_argument);
    CHECK_THROWS_AS(ts_kappa_unbiased(series, 1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(ts_kappa(series, 2, 0.0), std::invalid_argument);
}

TEST_CASE("unbiased kappa estimator matches its four-term definition by hand",
          "[estimators]") {
    const std::vector<double> incr{0.1, -0.2, 0.05, 0.3, -0.1, 0.15};
    const double delta = 0.5;
    const auto s = series_of(incr, delta);
    const std::size_t K = 2;
    const double s2 = 0.04;
    const double T = s.scheme.T;
    const double sparse4 = oracle::averaged_sparse_variation(incr, delta, K, 4);
    double full4 = 0.0, full2 = 0.0;
    for (double v : incr) {
        full2 += v * v;
        full4 += v * v * v * v;
    }
    const double want = 2.0 * sparse4 / (3.0 * s2 * s2) - full4 / (3.0 * s2 * s2 * T) -
                        2.0 / (6.0 * s2) * full2 - delta;
    CHECK(ts_kappa_unbiased(s, K, s2) == Catch::Approx(want).epsilon(1e-12));
}

TEST_CASE("noise moment estimates on tiny series by hand", "[estimators]") {
    const auto s = series_of({0.1, -0.2}, 1.0);
    const auto m = estimate_noise_moments(s);
    const double rv2 = 0.01 + 0.04;
    const double rv4 = 1e-4 + 16e-4;
    CHECK(m.m2_eps == Catch::Approx(rv2 / 4.0));
    CHECK(m.m4_diff == Catch::Approx(rv4 / 2.0));
    CHECK(m.m4_eps == Catch::Approx(rv4 / 4.0 - 3.0 * (rv2 / 4.0) * (rv2 / 4.0)));
    CHECK(m.e_eps >= kMomentFloor);
    CHECK_THROWS_AS(estimate_noise_moments(series_of({0.1}, 1.0)), std::invalid_argument);
}

TEST_CASE("noise moments recover Gaussian white noise moments", "[estimators]") {
    ModelParams params;
    params.sigma = 0.0;  // pure noise observation
    const double rho = 0.01;
    const std::size_t n = 300000;
    const auto series =
        simulate_increments(params, SamplingScheme{n, 1.0}, NoiseSpec{rho}, 314ULL);
    const auto m = estimate_noise_moments(series);
    const double r2 = rho * rho, r4 = r2 * r2, r8 = r4 * r4;
    CHECK(m.m2_eps == Catch::Approx(r2).epsilon(0.02));
    CHECK(m.m4_eps == Catch::Approx(3.0 * r4).epsilon(0.10));
    CHECK(m.m4_diff == Catch::Approx(12.0 * r4).epsilon(0.05));
    CHECK(m.m8_diff == Catch::Approx(1680.0 * r8).epsilon(0.15));
    CHECK(m.e_eps == Catch::Approx(1536.0 * r8).epsilon(0.20));
}

TEST_CASE("two-scale sigma estimator is unbiased on pure Brownian input", "[estimators]") {
    // sigma^2 = 1, no noise: sparse estimator already unbiased, and the
    // unbiased variant agrees in expectation; single long path, K modest
    ModelParams params;
    params.sigma = 1.0;
    params.kappa = 1e-4;  // nearly Brownian clock
    const std::size_t n = 200000;
    const auto series =
        simulate_increments(params, SamplingScheme{n, 200.0}, NoiseSpec{0.0}, 404ULL);
    CHECK(tsrv_sigma2(series, 10) == Catch::Approx(1.0).epsilon(0.05));
    CHECK(tsrv_sigma2_unbiased(series, 10) == Catch::Approx(1.0).epsilon(0.05));
}
