#ifndef COPMIX_BSHQI_HPP
#define COPMIX_BSHQI_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "copmix/mesh_ecdf.hpp"

namespace copmix {

/// Quadratic B-spline basis on a uniform mesh with coincident auxiliary
/// knots at both ends. The N+2 basis functions are indexed j = -2..N-1;
/// on cell i the active ones are j = i-2, i-1, i. Their restrictions to a
/// cell are quadratic polynomials in the local coordinate t in [0,1],
/// evaluated here in closed form.
class BSplineBasis2 {
public:
    explicit BSplineBasis2(UniformMesh mesh) : mesh_(std::move(mesh)) {
        mesh_.validate();
        // tau_{-2} .. tau_{N+2}, boundary knots collapsed to a and b
        knots_.resize(mesh_.N + 5);
        for (int k = -2; k <= mesh_.N + 2; ++k) {
            int j = std::clamp(k, 0, mesh_.N);
            knots_[k + 2] = (j == mesh_.N) ? mesh_.b : mesh_.point(j);
        }
    }

    const UniformMesh& mesh() const { return mesh_; }
    int count() const { return mesh_.N + 2; } // basis functions, j = -2..N-1
    double knot(int j) const { return knots_[j + 2]; } // j = -2..N+2

    /// exact integral of B_j over its support
    double integral(int j) const { return (knot(j + 3) - knot(j)) / 3.0; }

    /// Values of the three active basis functions on cell i at local t:
    /// out = { B_{i-2}(x), B_{i-1}(x), B_i(x) }.
    std::array<double, 3> values(int cell, double t) const {
        return {piece(cell - 2, cell, t), piece(cell - 1, cell, t), piece(cell, cell, t)};
    }

    /// Antiderivatives int_0^t of the same three local pieces.
    std::array<double, 3> antiderivatives(int cell, double t) const {
        return {piece_int(cell - 2, cell, t), piece_int(cell - 1, cell, t),
                piece_int(cell, cell, t)};
    }

private:
    // B_j restricted to cell i (i in [j, j+2] intersected with [0, N-1]).
    double piece(int j, int i, double t) const {
        const int N = mesh_.N;
        if (j == -2) return (1.0 - t) * (1.0 - t);           // cell 0 only
        if (j == -1) return (i == 0) ? t * (2.0 - 1.5 * t)   // 2t - 1.5t^2
                                     : 0.5 * (1.0 - t) * (1.0 - t);
        if (j == N - 1) return t * t;                        // cell N-1 only
        if (j == N - 2) return (i == j) ? 0.5 * t * t
                                        : 0.5 + t - 1.5 * t * t;
        switch (i - j) { // fully interior support of length 3h
        case 0: return 0.5 * t * t;
        case 1: return 0.5 * (1.0 + 2.0 * t - 2.0 * t * t);
        default: return 0.5 * (1.0 - t) * (1.0 - t);
        }
    }

    double piece_int(int j, int i, double t) const {
        const int N = mesh_.N;
        double t2 = t * t, t3 = t2 * t;
        if (j == -2) return t - t2 + t3 / 3.0;
        if (j == -1) return (i == 0) ? t2 - 0.5 * t3
                                     : 0.5 * (t - t2 + t3 / 3.0);
        if (j == N - 1) return t3 / 3.0;
        if (j == N - 2) return (i == j) ? t3 / 6.0
                                        : 0.5 * t + 0.5 * t2 - 0.5 * t3;
        switch (i - j) {
        case 0: return t3 / 6.0;
        case 1: return 0.5 * (t + t2 - (2.0 / 3.0) * t3);
        default: return 0.5 * (t - t2 + t3 / 3.0);
        }
    }

    UniformMesh mesh_;
    std::vector<double> knots_;
};

/// BSHQI coefficients from ECDF derivative estimates (Hermite form).
/// Index m in the returned vector corresponds to j = m - 2.
inline std::vector<double> coefficients_hermite(const EcdfGrid& g) {
    const int N = g.mesh.N;
    if (N < 2) throw std::invalid_argument("coefficients_hermite: N < 2");
    if (g.F.size() != static_cast<std::size_t>(N + 1) ||
        g.Fp.size() != static_cast<std::size_t>(N + 1) ||
        g.Fpp.size() != static_cast<std::size_t>(N + 1))
        throw std::invalid_argument("coefficients_hermite: inconsistent grid");
    const double h = g.mesh.h;
    std::vector<double> lam(N + 2);
    lam[0] = g.Fp[0];
    for (int j = -1; j <= N - 2; ++j)
        lam[j + 2] = 0.5 * (g.Fp[j + 1] + g.Fp[j + 2]) -
                     0.25 * h * (-g.Fpp[j + 1] + g.Fpp[j + 2]);
    lam[N + 1] = g.Fp[N];
    // in exact arithmetic each coefficient is a nonnegative ECDF increment;
    // clamp the ~1e-19 cancellation noise the three-term form can leave
    for (double& l : lam) l = std::max(l, 0.0);
    return lam;
}

/// Equivalent simplified form: lambda_j = (F[j+2]-F[j+1])/h with the end
/// coefficients duplicated.
inline std::vector<double> coefficients_simplified(const EcdfGrid& g) {
    const int N = g.mesh.N;
    if (N < 2) throw std::invalid_argument("coefficients_simplified: N < 2");
    if (g.F.size() != static_cast<std::size_t>(N + 1))
        throw std::invalid_argument("coefficients_simplified: inconsistent grid");
    const double h = g.mesh.h;
    std::vector<double> lam(N + 2);
    for (int j = -1; j <= N - 2; ++j)
        lam[j + 2] = (g.F[j + 2] - g.F[j + 1]) / h;
    lam[0] = lam[1];
    lam[N + 1] = lam[N];
    return lam;
}

/// Fitted BSHQI density: quadratic spline with nonnegative coefficients,
/// zero outside [a,b]. The CDF is the exact piecewise-cubic antiderivative.
class BshqiDensity {
public:
    BshqiDensity(UniformMesh mesh, std::vector<double> lambda)
        : basis_(std::move(mesh)), lambda_(std::move(lambda)) {
        const int N = basis_.mesh().N;
        if (lambda_.size() != static_cast<std::size_t>(N + 2))
            throw std::invalid_argument("BshqiDensity: coefficient count must be N+2");
        // cumulative integral up to each knot
        knot_cum_.assign(N + 1, 0.0);
        const double h = basis_.mesh().h;
        for (int i = 0; i < N; ++i) {
            auto A = basis_.antiderivatives(i, 1.0);
            double cell = 0.0;
            for (int k = 0; k < 3; ++k) cell += coef(i - 2 + k) * A[k];
            knot_cum_[i + 1] = knot_cum_[i] + h * cell;
        }
    }

    static BshqiDensity fit(const EcdfGrid& grid) {
        return BshqiDensity(grid.mesh, coefficients_hermite(grid));
    }

    static BshqiDensity fit(const WeightedSample& sample, BinsRule rule,
                            double padding = 0.0) {
        UniformMesh m = build_mesh(sample.values, rule, padding);
        return fit(weighted_ecdf(sample, m));
    }

    const UniformMesh& mesh() const { return basis_.mesh(); }
    const BSplineBasis2& basis() const { return basis_; }
    const std::vector<double>& lambda() const { return lambda_; }
    double coef(int j) const { return lambda_[j + 2]; } // j = -2..N-1

    double pdf(double x) const {
        const auto& m = basis_.mesh();
        if (x < m.a || x > m.b) return 0.0;
        auto [cell, t] = locate(x);
        auto B = basis_.values(cell, t);
        double f = 0.0;
        for (int k = 0; k < 3; ++k) f += coef(cell - 2 + k) * B[k];
        return f;
    }

    double cdf(double x) const {
        const auto& m = basis_.mesh();
        if (x <= m.a) return 0.0;
        if (x >= m.b) return knot_cum_[m.N];
        auto [cell, t] = locate(x);
        auto A = basis_.antiderivatives(cell, t);
        double part = 0.0;
        for (int k = 0; k < 3; ++k) part += coef(cell - 2 + k) * A[k];
        return knot_cum_[cell] + m.h * part;
    }

    /// total mass (equals 1 when F[0]=0 and F[N]=1 on the fitting grid)
    double mass() const { return knot_cum_[basis_.mesh().N]; }

private:
    std::pair<int, double> locate(double x) const {
        const auto& m = basis_.mesh();
        int cell = static_cast<int>((x - m.a) / m.h);
        cell = std::clamp(cell, 0, m.N - 1);
        double t = (x - m.a) / m.h - cell;
        t = std::clamp(t, 0.0, 1.0);
        return {cell, t};
    }

    BSplineBasis2 basis_;
    std::vector<double> lambda_;
    std::vector<double> knot_cum_;
};

/// Uniform ("naive") kernel density estimate with bandwidth h.
inline double naive_kernel_pdf(const WeightedSample& sample, double h, double x) {
    if (!(h > 0.0)) throw std::invalid_argument("naive_kernel_pdf: h must be positive");
    double hits = 0.0;
    for (std::size_t i = 0; i < sample.values.size(); ++i) {
        double s = (sample.values[i] - x) / h;
        if (s >= -0.5 && s <= 0.5) hits += sample.weights[i];
    }
    return hits / (sample.total_weight() * h);
}

/// Bandwidth minimizing the leading MSE bound h^2 S1^2 + S0/(nh).
inline double optimal_bandwidth(double S0, double S1, long n) {
    if (!(S0 > 0.0) || !(S1 > 0.0))
        throw std::invalid_argument("optimal_bandwidth: bounds must be positive");
    if (n < 1) throw std::invalid_argument("optimal_bandwidth: n must be >= 1");
    return std::cbrt(S0 / (2.0 * static_cast<double>(n) * S1 * S1));
}

} // namespace copmix

#endif
