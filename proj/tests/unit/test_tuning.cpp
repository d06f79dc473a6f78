#include <catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "sbm/simulate.hpp"
#include "sbm/tuning.hpp"

using namespace sbm;

namespace {

// Benchmark design: one trading year at one-minute sampling with
// sigma = 0.02, kappa = 0.3, rho = 0.005 and exact Gaussian noise moments.
TheoryInputs design_inputs() {
    TheoryInputs in;
    in.n = 98280;  // 252 days * 390 one-minute increments
    in.T = 252.0;
    in.sigma2 = 0.02 * 0.02;
    in.kappa = 0.3;
    const double r2 = 0.005 * 0.005;
    in.m2_eps = r2;
    in.m4_eps = 3.0 * r2 * r2;
    in.m4_diff = 12.0 * r2 * r2;
    in.e_eps = 1536.0 * r2 * r2 * r2 * r2;
    return in;
}

}  // namespace

TEST_CASE("optimal K formulas reproduce the benchmark design values", "[tuning]") {
    const auto in = design_inputs();
    CHECK(k_star_1(in) == 705);
    CHECK(k_star_2(in) == 24);
    CHECK(k_star_3(in) == 192);
    CHECK(k_star_4(in) == 23);
}

TEST_CASE("each closed form minimizes its two-term objective", "[tuning]") {
    const auto in = design_inputs();
    const auto check = [&](std::size_t closed, const std::function<double(double)>& obj) {
        const std::size_t brute = oracle::brute_force_k(obj, in.n);
        const long diff = static_cast<long>(closed) - static_cast<long>(brute);
        CHECK(std::labs(diff) <= 1);
    };
    check(k_star_1(in), [&](double K) { return mse_objective_sigma_sparse(in, K); });
    check(k_star_2(in), [&](double K) { return mse_objective_sigma_unbiased(in, K); });
    check(k_star_3(in), [&](double K) { return mse_objective_kappa_sparse(in, K); });
    check(k_star_4(in), [&](double K) { return mse_objective_kappa_unbiased(in, K); });
}

TEST_CASE("term balance at the continuous optimum", "[tuning]") {
    const auto in = design_inputs();
    const double s4 = in.sigma2 * in.sigma2;
    const double n = static_cast<double>(in.n);
    // K + 1/K^2 objectives: first term is exactly twice the second at K*
    const double k1 = n * std::cbrt(6.0 * in.m2_eps * in.m2_eps / (in.T * in.T * s4));
    const double first = 4.0 * s4 * k1 / (3.0 * n);
    const double second = 4.0 * n * n * in.m2_eps * in.m2_eps / (in.T * in.T * k1 * k1);
    CHECK(first == Catch::Approx(2.0 * second).epsilon(1e-10));
    // K^3 + 1/K^2 objectives: ratio 2:3 at K*
    const double s8 = s4 * s4;
    const double T4 = in.T * in.T * in.T * in.T;
    const double k3 = n * std::pow(5.0 * in.m4_diff * in.m4_diff / (96.0 * T4 * s8), 0.2);
    const double cubic = 64.0 / 5.0 * in.T * in.T * k3 * k3 * k3 / (n * n * n);
    const double inv = n * n * in.m4_diff * in.m4_diff / (in.T * in.T * k3 * k3 * s8);
    CHECK(cubic == Catch::Approx(2.0 / 3.0 * inv).epsilon(1e-10));
}

TEST_CASE("K results are clamped to [2, n/2]", "[tuning]") {
    auto in = design_inputs();
    in.m2_eps = 0.0;
    in.m4_eps = 0.0;
    CHECK(k_star_1(in) == 2);  // no noise: smallest admissible K
    in.m2_eps = 1.0;           // absurdly large noise: cap at n/2
    CHECK(k_star_1(in) == in.n / 2);
    in.n = 5;
    in.m2_eps = 1e-6;
    CHECK(k_star_1(in) >= 2);
    CHECK(k_star_1(in) <= 2);  // n/2 = 2
    in.n = 1;
    CHECK_THROWS_AS(k_star_1(in), std::invalid_argument);
    auto bad = design_inputs();
    bad.sigma2 = 0.0;
    CHECK_THROWS_AS(k_star_2(bad), std::invalid_argument);
}

TEST_CASE("K formulas scale with the design constants", "[tuning]") {
    const auto base = design_inputs();
    auto scaled = base;
    scaled.T = 2.0 * base.T;
    // K*_2 is proportional to T^{-2/3}
    CHECK(static_cast<double>(k_star_2(scaled)) ==
          Catch::Approx(std::pow(2.0, -2.0 / 3.0) * static_cast<double>(k_star_2(base)))
              .margin(1.0));
    scaled = base;
    scaled.sigma2 = 4.0 * base.sigma2;  // sigma doubled: K*_3 scales by 2^{-8/5}
    CHECK(static_cast<double>(k_star_3(scaled)) ==
          Catch::Approx(std::pow(2.0, -8.0 / 5.0) * static_cast<double>(k_star_3(base)))
              .margin(1.0));
    scaled = base;
    scaled.n = base.n * 32;  // K*_4 scales as n^{4/5}: factor 16
    CHECK(static_cast<double>(k_star_4(scaled)) ==
          Catch::Approx(16.0 * static_cast<double>(k_star_4(base))).margin(16.0));
}

TEST_CASE("theoretical MSE has the noise-free limit 3 kappa sigma^4 / T", "[tuning]") {
    auto in = design_inputs();
    in.m2_eps = 0.0;
    const double want = 3.0 * in.kappa * in.sigma2 * in.sigma2 / in.T;
    CHECK(theoretical_mse(MseFormula::SigmaSparseAtOptimum, in) == Catch::Approx(want));
    // and the noisy value strictly exceeds it
    CHECK(theoretical_mse(MseFormula::SigmaSparseAtOptimum, design_inputs()) > want);
}

TEST_CASE("theoretical MSE matches the objective evaluated at the continuous optimum",
          "[tuning]") {
    const auto in = design_inputs();
    const double s4 = in.sigma2 * in.sigma2;
    const double n = static_cast<double>(in.n);
    const double k2 = std::pow(n, 2.0 / 3.0) *
                      std::cbrt(6.0 * (in.m4_eps + in.m2_eps * in.m2_eps) / (in.T * in.T * s4));
    CHECK(theoretical_mse(MseFormula::SigmaUnbiasedAtOptimum, in) ==
          Catch::Approx(mse_objective_sigma_unbiased(in, k2)).epsilon(1e-10));
    const double s8 = s4 * s4;
    const double T4 = in.T * in.T * in.T * in.T;
    const double k4 = std::pow(n, 0.8) * std::pow(5.0 * in.e_eps / (432.0 * T4 * s8), 0.2);
    CHECK(theoretical_mse(MseFormula::KappaUnbiasedAtOptimum, in) ==
          Catch::Approx(mse_objective_kappa_unbiased(in, k4)).epsilon(1e-10));
}

TEST_CASE("plug-in chains are deterministic and two-stage", "[tuning]") {
    ModelParams params;
    const auto scheme = SamplingScheme::from_frequency(42.0, 300.0);
    const auto series = simulate_increments(params, scheme, NoiseSpec{0.005}, 2468ULL);
    const auto a = plugin_sigma(series, 0.063, SigmaVariant::UnbiasedOpt);
    const auto b = plugin_sigma(series, 0.063, SigmaVariant::UnbiasedOpt);
    REQUIRE(a.stages.size() == 2);
    CHECK(a.stages[0].label == "sigma3_prime");
    CHECK(a.stages[1].label == "sigma3_final");
    CHECK(a.prime_value() == b.prime_value());
    CHECK(a.final_value() == b.final_value());
    CHECK(a.final().K >= 2);

    const auto k = plugin_kappa(series, 0.063, KappaVariant::UnbiasedOpt);
    REQUIRE(k.stages.size() == 3);
    CHECK(k.stages[2].label == "kappa3");
    CHECK(k.stages[2].sigma2 == a.final().sigma2);
    CHECK_THROWS_AS(plugin_sigma(series, 0.0, SigmaVariant::Sparse), std::invalid_argument);
}

TEST_CASE("plug-in sigma recovers the truth on a clean long sample", "[tuning]") {
    ModelParams params;  // sigma = 0.02, kappa = 0.3
    const auto scheme = SamplingScheme::from_frequency(252.0, 60.0);
    const auto series = simulate_increments(params, scheme, NoiseSpec{0.005}, 13579ULL);
    for (auto variant : {SigmaVariant::Sparse, SigmaVariant::Unbiased,
                         SigmaVariant::UnbiasedOpt}) {
        const auto trace = plugin_sigma(series, 0.063, variant);
        CHECK(trace.final_value() == Catch::Approx(0.02).epsilon(0.15));
    }
    const auto kap = plugin_kappa(series, 0.063, KappaVariant::UnbiasedOpt);
    CHECK(kap.final_value() == Catch::Approx(0.3).epsilon(0.5));
}
