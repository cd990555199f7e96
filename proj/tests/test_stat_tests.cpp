#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "copmix/rng.hpp"
#include "copmix/stat_tests.hpp"
#include "oracles.hpp"

using namespace copmix;

TEST_CASE("kolmogorov survival function hits tabulated critical values") {
    // P(K > c) = alpha at the classical critical points
    CHECK(kolmogorov_sf(1.358) == Catch::Approx(0.05).margin(0.002));
    CHECK(kolmogorov_sf(1.224) == Catch::Approx(0.10).margin(0.002));
    CHECK(kolmogorov_sf(1.628) == Catch::Approx(0.01).margin(0.002));
    CHECK(kolmogorov_sf(0.0) == 1.0);
    CHECK(kolmogorov_sf(10.0) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("limiting cvm distribution hits tabulated critical values") {
    CHECK(detail::cvm_limit_cdf(0.46136) == Catch::Approx(0.95).margin(0.002));
    CHECK(detail::cvm_limit_cdf(0.74346) == Catch::Approx(0.99).margin(0.002));
    CHECK(detail::cvm_limit_cdf(0.34730) == Catch::Approx(0.90).margin(0.002));
    CHECK(detail::cvm_limit_cdf(0.0) == 0.0);
    CHECK(detail::cvm_limit_cdf(50.0) == 1.0);
}

TEST_CASE("p-values decrease as statistics increase") {
    double prev = 1.0;
    for (double lam = 0.2; lam < 3.0; lam += 0.1) {
        double p = kolmogorov_sf(lam);
        CHECK(p <= prev + 1e-12);
        prev = p;
    }
    prev = 1.0;
    for (double x = 0.02; x < 2.0; x += 0.05) {
        double p = 1.0 - detail::cvm_limit_cdf(x);
        CHECK(p <= prev + 1e-12);
        prev = p;
    }
}

TEST_CASE("ks statistic matches a brute-force scan") {
    Rng rng(21);
    auto cdf = [](double x) { return oracle::Phi(x); };
    std::vector<double> v(200);
    for (auto& x : v) x = rng.normal();
    TestResult r = ks_test(v, cdf);
    // direct evaluation of both one-sided gaps at every sample point
    std::vector<double> s = v;
    std::sort(s.begin(), s.end());
    double d = 0.0;
    const double n = s.size();
    for (std::size_t i = 0; i < s.size(); ++i) {
        d = std::max(d, std::abs((i + 1) / n - cdf(s[i])));
        d = std::max(d, std::abs(cdf(s[i]) - i / n));
    }
    CHECK(r.statistic == Catch::Approx(d).margin(1e-14));
    CHECK(r.pvalue == Catch::Approx(kolmogorov_sf(std::sqrt(n) * d)));
}

TEST_CASE("tests accept samples from their own distribution") {
    auto cdf = [](double x) { return oracle::Phi(x); };
    int ks_ok = 0, cvm_ok = 0;
    for (int seed = 0; seed < 20; ++seed) {
        Rng rng(100 + seed);
        std::vector<double> v(500);
        for (auto& x : v) x = rng.normal();
        if (ks_test(v, cdf).pvalue > 0.05) ++ks_ok;
        if (cvm_test(v, cdf).pvalue > 0.05) ++cvm_ok;
    }
    CHECK(ks_ok >= 17); // 5% level, 20 tries
    CHECK(cvm_ok >= 17);
}

TEST_CASE("tests reject a wrong distribution") {
    Rng rng(3);
    std::vector<double> v(2000);
    for (auto& x : v) x = 0.5 + rng.normal(); // shifted
    auto cdf = [](double x) { return oracle::Phi(x); };
    CHECK(ks_test(v, cdf).pvalue < 1e-4);
    CHECK(cvm_test(v, cdf).pvalue < 1e-4);
}

TEST_CASE("cvm statistic formula") {
    // n=1, u=0.5: w2 = 1/12 + (0.5 - 0.5)^2 = 1/12
    TestResult r = cvm_test({0.0}, [](double) { return 0.5; });
    CHECK(r.statistic == Catch::Approx(1.0 / 12.0));
    CHECK_THROWS_AS(ks_test({}, [](double) { return 0.5; }), std::invalid_argument);
    CHECK_THROWS_AS(cvm_test({}, [](double) { return 0.5; }), std::invalid_argument);
}

TEST_CASE("density error report on constructed functions") {
    // fhat - f_true == 1 on [0,2] -> ISE = 2, RMSE = 1
    auto rep = density_errors([](int) { return [](double) { return 1.0; }; },
                              [](double) { return 0.0; }, 0.0, 2.0, 3);
    CHECK(rep.amise == Catch::Approx(2.0).margin(1e-9));
    CHECK(rep.rmse == Catch::Approx(1.0).margin(1e-9));
    CHECK(rep.mean_time_ms >= 0.0);
    CHECK(rep.std_time_ms >= 0.0);

    auto zero = density_errors([](int) { return [](double x) { return x; }; },
                               [](double x) { return x; }, 0.0, 1.0, 1);
    CHECK(zero.amise == Catch::Approx(0.0).margin(1e-15));
    CHECK_THROWS_AS(density_errors([](int) { return [](double) { return 0.0; }; },
                                   [](double) { return 0.0; }, 0.0, 1.0, 0),
                    std::invalid_argument);
}
