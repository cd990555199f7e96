#ifndef COPMIX_MESH_ECDF_HPP
#define COPMIX_MESH_ECDF_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace copmix {

/// Uniform knot scaffold on [a,b] with N subintervals of step h.
struct UniformMesh {
    double a = 0.0;
    double b = 1.0;
    int N = 2;
    double h = 0.5;

    double point(int j) const { return a + j * h; }

    void validate() const {
        if (!(a < b)) throw std::invalid_argument("UniformMesh: requires a < b");
        if (N < 2) throw std::invalid_argument("UniformMesh: requires N >= 2");
        if (!(h > 0.0)) throw std::invalid_argument("UniformMesh: requires h > 0");
        if (std::abs(h * N - (b - a)) > 1e-12 * (b - a))
            throw std::invalid_argument("UniformMesh: h*N must equal b-a");
    }
};

/// Rule mapping sample size to the number of mesh subintervals.
struct BinsRule {
    enum class Kind { Rice, CubeRoot, Explicit };
    Kind kind = Kind::Rice;
    int explicit_bins = 0;

    static BinsRule rice() { return {Kind::Rice, 0}; }
    static BinsRule cube_root() { return {Kind::CubeRoot, 0}; }
    static BinsRule fixed(int n) { return {Kind::Explicit, n}; }

    int bins(std::size_t n) const {
        auto ceil_cbrt = [](std::size_t m) {
            return static_cast<int>(std::ceil(std::cbrt(static_cast<double>(m)) - 1e-9));
        };
        int N = 2;
        switch (kind) {
        case Kind::Rice: N = 2 * ceil_cbrt(n); break;
        case Kind::CubeRoot: N = ceil_cbrt(n); break;
        case Kind::Explicit: N = explicit_bins; break;
        }
        return std::max(N, 2);
    }
};

/// Observations with per-observation nonnegative weights.
struct WeightedSample {
    std::vector<double> values;
    std::vector<double> weights;

    WeightedSample(std::vector<double> v, std::vector<double> w)
        : values(std::move(v)), weights(std::move(w)) {
        if (values.empty()) throw std::invalid_argument("WeightedSample: empty sample");
        if (values.size() != weights.size())
            throw std::invalid_argument("WeightedSample: values/weights length mismatch");
        double wsum = 0.0;
        for (double w_i : weights) {
            if (w_i < 0.0) throw std::invalid_argument("WeightedSample: negative weight");
            wsum += w_i;
        }
        if (!(wsum > 0.0)) throw std::invalid_argument("WeightedSample: zero total weight");
    }

    static WeightedSample unweighted(std::vector<double> v) {
        std::vector<double> w(v.size(), 1.0);
        return WeightedSample(std::move(v), std::move(w));
    }

    double total_weight() const {
        return std::accumulate(weights.begin(), weights.end(), 0.0);
    }
};

/// Weighted ECDF sampled at the mesh points, with the finite-difference
/// first and second derivative estimates used by the BSHQI coefficients.
struct EcdfGrid {
    UniformMesh mesh;
    std::vector<double> F;   // F_h(x_j),  j = 0..N
    std::vector<double> Fp;  // F'_{h,j}
    std::vector<double> Fpp; // F''_{h,j}
};

inline UniformMesh build_mesh(std::span<const double> values, BinsRule rule,
                              double padding = 0.0) {
    if (values.empty()) throw std::invalid_argument("build_mesh: empty sample");
    if (padding < 0.0) throw std::invalid_argument("build_mesh: negative padding");
    auto [mn_it, mx_it] = std::minmax_element(values.begin(), values.end());
    double mn = *mn_it, mx = *mx_it;
    double range = mx - mn;
    if (range == 0.0) {
        if (padding == 0.0)
            throw std::invalid_argument("build_mesh: degenerate support");
        range = 1.0;
    }
    UniformMesh m;
    m.a = mn - padding * range;
    m.b = mx + padding * range;
    m.N = rule.bins(values.size());
    m.h = (m.b - m.a) / m.N;
    m.validate();
    return m;
}

inline EcdfGrid weighted_ecdf(const WeightedSample& sample, const UniformMesh& mesh) {
    mesh.validate();
    const std::size_t n = sample.values.size();
    for (std::size_t i = 0; i < n; ++i) {
        double x = sample.values[i];
        if (x < mesh.a || x > mesh.b)
            throw std::invalid_argument("weighted_ecdf: value at index " +
                                        std::to_string(i) + " outside [a,b]");
    }

    // Sort (value, weight) pairs once, then prefix-sum the weights.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return sample.values[i] < sample.values[j];
    });
    std::vector<double> sorted(n), cumw(n);
    double acc = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        sorted[r] = sample.values[order[r]];
        acc += sample.weights[order[r]];
        cumw[r] = acc;
    }
    const double W = acc;

    const int N = mesh.N;
    EcdfGrid g;
    g.mesh = mesh;
    g.F.resize(N + 1);
    for (int j = 0; j <= N; ++j) {
        double xj = (j == N) ? mesh.b : mesh.point(j);
        auto it = std::upper_bound(sorted.begin(), sorted.end(), xj);
        g.F[j] = (it == sorted.begin()) ? 0.0 : cumw[it - sorted.begin() - 1] / W;
    }
    g.F[N] = 1.0; // all mass counted; pin exactly

    const double h = mesh.h;
    g.Fp.resize(N + 1);
    g.Fpp.assign(N + 1, 0.0);
    g.Fp[0] = (g.F[1] - g.F[0]) / h;
    g.Fp[N] = (g.F[N] - g.F[N - 1]) / h;
    for (int j = 1; j < N; ++j) {
        g.Fp[j] = (g.F[j + 1] - g.F[j - 1]) / (2.0 * h);
        g.Fpp[j] = (g.F[j + 1] - 2.0 * g.F[j] + g.F[j - 1]) / (h * h);
    }
    return g;
}

} // namespace copmix

#endif
