#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "copmix/optim.hpp"
#include "copmix/rng.hpp"

using namespace copmix;

namespace {
Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double t : v) x[i++] = t;
    return x;
}
} // namespace

TEST_CASE("unconstrained interior maximum of a concave quadratic") {
    auto f = [](const Eigen::VectorXd& x) {
        return -(x[0] - 1.5) * (x[0] - 1.5) - 2.0 * (x[1] + 0.5) * (x[1] + 0.5);
    };
    auto r = maximize_box(f, vec({0.0, 0.0}), vec({-10.0, -10.0}), vec({10.0, 10.0}));
    CHECK(r.x[0] == Catch::Approx(1.5).margin(1e-5));
    CHECK(r.x[1] == Catch::Approx(-0.5).margin(1e-5));
    CHECK(r.f == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("maximum clipped to the active bound") {
    auto f = [](const Eigen::VectorXd& x) { return -(x[0] - 5.0) * (x[0] - 5.0); };
    auto r = maximize_box(f, vec({0.5}), vec({0.0}), vec({2.0}));
    CHECK(r.x[0] == Catch::Approx(2.0).margin(1e-8));
}

TEST_CASE("result never undercuts the starting value") {
    Rng rng(17);
    for (int rep = 0; rep < 20; ++rep) {
        double a = rng.uniform(0.2, 4.0), c = rng.uniform(-3.0, 3.0);
        auto f = [&](const Eigen::VectorXd& x) {
            return -a * std::pow(x[0] - c, 4) + std::sin(3.0 * x[0]);
        };
        Eigen::VectorXd x0 = vec({rng.uniform(-2.0, 2.0)});
        double f0 = f(x0);
        auto r = maximize_box(f, x0, vec({-5.0}), vec({5.0}));
        CHECK(r.f >= f0 - 1e-12);
    }
}

TEST_CASE("log-concave one-dimensional objective") {
    // weighted log-likelihood-like shape: n log(theta) - theta * s
    const double s = 4.0, n = 10.0;
    auto f = [&](const Eigen::VectorXd& x) { return n * std::log(x[0]) - x[0] * s; };
    auto r = maximize_box(f, vec({0.5}), vec({1e-4}), vec({50.0}));
    CHECK(r.x[0] == Catch::Approx(n / s).margin(1e-4));
}

TEST_CASE("input validation") {
    auto f = [](const Eigen::VectorXd& x) { return -x.squaredNorm(); };
    CHECK_THROWS_AS(maximize_box(f, vec({0.0, 0.0}), vec({0.0}), vec({1.0})),
                    std::invalid_argument);
    auto bad = [](const Eigen::VectorXd&) {
        return std::numeric_limits<double>::quiet_NaN();
    };
    CHECK_THROWS_AS(maximize_box(bad, vec({0.0}), vec({-1.0}), vec({1.0})),
                    std::runtime_error);
}
