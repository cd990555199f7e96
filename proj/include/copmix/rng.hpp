#ifndef COPMIX_RNG_HPP
#define COPMIX_RNG_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>

#include "copmix/normal.hpp"

namespace copmix {

/// Seeded random source. All variates are derived from mt19937_64 uniforms
/// so that a seed pins the output exactly, independent of the standard
/// library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform on (0,1), endpoints excluded.
    double uniform() {
        // 53-bit mantissa draw shifted off both endpoints.
        double u = (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
        return u;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::uint64_t integer(std::uint64_t n) { // in [0, n)
        // rejection to avoid modulo bias
        std::uint64_t lim = std::numeric_limits<std::uint64_t>::max() -
                            std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t v;
        do { v = gen_(); } while (v >= lim);
        return v % n;
    }

    double normal() { return norm_quantile(uniform()); }
    double normal(double mu, double sigma) { return mu + sigma * normal(); }

    double exponential(double rate = 1.0) { return -std::log(uniform()) / rate; }

    /// Gamma(shape, scale) via Marsaglia-Tsang, boosted for shape < 1.
    double gamma(double shape, double scale = 1.0) {
        if (shape <= 0.0 || scale <= 0.0)
            throw std::domain_error("gamma: shape and scale must be positive");
        if (shape < 1.0) {
            double u = uniform();
            return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
        }
        double d = shape - 1.0 / 3.0;
        double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
        }
    }

    /// Logarithmic-series variate with parameter c in (0,1), Kemp's method.
    std::uint64_t log_series(double c) {
        if (!(c > 0.0 && c < 1.0))
            throw std::domain_error("log_series: parameter must be in (0,1)");
        double v = uniform();
        if (v >= c) return 1;
        double u = uniform();
        double q = 1.0 - std::exp(u * std::log1p(-c));
        if (v <= q * q) {
            double k = 1.0 + std::log(v) / std::log(q);
            return static_cast<std::uint64_t>(std::floor(k));
        }
        return (v <= q) ? 2 : 1;
    }

    /// Positive stable variate with Laplace transform exp(-t^alpha),
    /// 0 < alpha < 1 (Chambers-Mallows-Stuck).
    double positive_stable(double alpha) {
        if (!(alpha > 0.0 && alpha < 1.0))
            throw std::domain_error("positive_stable: alpha must be in (0,1)");
        double theta = uniform(0.0, M_PI);
        double w = exponential();
        double num = std::sin(alpha * theta);
        double a = std::pow(std::sin((1.0 - alpha) * theta) / w, (1.0 - alpha) / alpha);
        return a * num / std::pow(std::sin(theta), 1.0 / alpha);
    }

    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

} // namespace copmix

#endif
