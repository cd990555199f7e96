#ifndef COPMIX_COPULAS_HPP
#define COPMIX_COPULAS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "copmix/normal.hpp"
#include "copmix/optim.hpp"
#include "copmix/rng.hpp"

namespace copmix {

enum class CopulaFamily { Gaussian, Clayton, Gumbel, Frank };

inline const char* family_name(CopulaFamily f) {
    switch (f) {
    case CopulaFamily::Gaussian: return "gaussian";
    case CopulaFamily::Clayton: return "clayton";
    case CopulaFamily::Gumbel: return "gumbel";
    default: return "frank";
    }
}

inline CopulaFamily family_from_name(const std::string& s) {
    if (s == "gaussian") return CopulaFamily::Gaussian;
    if (s == "clayton") return CopulaFamily::Clayton;
    if (s == "gumbel") return CopulaFamily::Gumbel;
    if (s == "frank") return CopulaFamily::Frank;
    throw std::invalid_argument("unknown copula family: " + s);
}

/// Copula family plus its parameters: a correlation matrix for the
/// Gaussian family, a scalar theta for the Archimedean ones.
struct CopulaSpec {
    CopulaFamily family = CopulaFamily::Gaussian;
    double theta = 0.0;        // Archimedean parameter
    Eigen::MatrixXd corr;      // Gaussian correlation matrix

    static CopulaSpec gaussian(Eigen::MatrixXd P) {
        CopulaSpec s;
        s.family = CopulaFamily::Gaussian;
        s.corr = std::move(P);
        return s;
    }
    static CopulaSpec archimedean(CopulaFamily f, double theta) {
        CopulaSpec s;
        s.family = f;
        s.theta = theta;
        return s;
    }
    static CopulaSpec clayton(double t) { return archimedean(CopulaFamily::Clayton, t); }
    static CopulaSpec gumbel(double t) { return archimedean(CopulaFamily::Gumbel, t); }
    static CopulaSpec frank(double t) { return archimedean(CopulaFamily::Frank, t); }

    void validate(int D) const {
        if (D < 2) throw std::invalid_argument("CopulaSpec: dimension must be >= 2");
        switch (family) {
        case CopulaFamily::Gaussian: {
            if (corr.rows() != D || corr.cols() != D)
                throw std::invalid_argument("CopulaSpec: correlation matrix size mismatch");
            if (!corr.isApprox(corr.transpose(), 1e-10))
                throw std::invalid_argument("CopulaSpec: correlation matrix not symmetric");
            for (int i = 0; i < D; ++i)
                if (std::abs(corr(i, i) - 1.0) > 1e-10)
                    throw std::invalid_argument("CopulaSpec: correlation diagonal must be 1");
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(corr);
            if (es.eigenvalues().minCoeff() < 1e-8 * 0.999)
                throw std::invalid_argument("CopulaSpec: correlation matrix not positive definite");
            break;
        }
        case CopulaFamily::Clayton:
            if (!(theta > 0.0)) throw std::invalid_argument("CopulaSpec: Clayton needs theta > 0");
            break;
        case CopulaFamily::Gumbel:
            if (!(theta >= 1.0)) throw std::invalid_argument("CopulaSpec: Gumbel needs theta >= 1");
            break;
        case CopulaFamily::Frank:
            if (theta == 0.0) throw std::invalid_argument("CopulaSpec: Frank needs theta != 0");
            if (D > 2 && !(theta > 0.0))
                throw std::invalid_argument("CopulaSpec: Frank needs theta > 0 when D > 2");
            break;
        }
    }
};

/// Clamp pseudo-observations into the open cube (eps, 1-eps).
inline Eigen::MatrixXd clamp_unit(Eigen::MatrixXd U, double eps = 1e-10) {
    for (Eigen::Index i = 0; i < U.size(); ++i)
        U.data()[i] = std::clamp(U.data()[i], eps, 1.0 - eps);
    return U;
}

namespace detail {

inline void check_open_cube(const Eigen::VectorXd& u) {
    for (Eigen::Index j = 0; j < u.size(); ++j)
        if (!(u[j] > 0.0 && u[j] < 1.0))
            throw std::invalid_argument("copula density: u component on or outside (0,1)");
}

inline double logsumexp(const std::vector<double>& a) {
    double m = *std::max_element(a.begin(), a.end());
    double s = 0.0;
    for (double v : a) s += std::exp(v - m);
    return m + std::log(s);
}

inline double gaussian_log_density(const Eigen::MatrixXd& P, const Eigen::VectorXd& u) {
    Eigen::VectorXd y(u.size());
    for (Eigen::Index j = 0; j < u.size(); ++j) y[j] = norm_quantile(u[j]);
    Eigen::LLT<Eigen::MatrixXd> llt(P);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("gaussian copula: correlation matrix not positive definite");
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < P.rows(); ++i)
        logdet += 2.0 * std::log(llt.matrixL()(i, i));
    Eigen::VectorXd Pinv_y = llt.solve(y);
    return -0.5 * logdet - 0.5 * (y.dot(Pinv_y) - y.squaredNorm());
}

// log S with S = sum_j u_j^{-theta} - (D-1), computed without overflow
inline double clayton_log_s(double theta, const Eigen::VectorXd& u) {
    const Eigen::Index D = u.size();
    double m = 0.0;
    std::vector<double> a(D);
    for (Eigen::Index j = 0; j < D; ++j) {
        a[j] = -theta * std::log(u[j]);
        m = std::max(m, a[j]);
    }
    double s = 0.0;
    for (double v : a) s += std::exp(v - m);
    s -= (static_cast<double>(D) - 1.0) * std::exp(-m);
    return m + std::log(s);
}

inline double clayton_log_density(double theta, const Eigen::VectorXd& u) {
    const Eigen::Index D = u.size();
    double logc = 0.0;
    for (Eigen::Index k = 1; k < D; ++k) logc += std::log1p(k * theta);
    logc -= (1.0 / theta + static_cast<double>(D)) * clayton_log_s(theta, u);
    for (Eigen::Index j = 0; j < D; ++j) logc -= (theta + 1.0) * std::log(u[j]);
    return logc;
}

inline double gumbel_log_density(double theta, const Eigen::VectorXd& u) {
    const Eigen::Index D = u.size();
    const double alpha = 1.0 / theta;
    // s = sum_j (-log u_j)^theta, log-space accumulation
    std::vector<double> a(D);
    for (Eigen::Index j = 0; j < D; ++j) a[j] = theta * std::log(-std::log(u[j]));
    double logs = logsumexp(a);
    double x = std::exp(alpha * logs); // s^{1/theta}

    // P_n(x) with psi^{(n)}(s) = psi(s) s^{-n} P_n(x); sign of P_D is (-1)^D
    std::vector<double> P(D + 1);
    std::vector<double> c(D + 1); // c_m = prod_{i<m} (alpha - i)
    c[0] = 1.0;
    for (Eigen::Index m = 1; m <= D; ++m) c[m] = c[m - 1] * (alpha - (m - 1));
    P[0] = 1.0;
    std::vector<std::vector<double>> binom(D + 1, std::vector<double>(D + 1, 0.0));
    for (Eigen::Index i = 0; i <= D; ++i) {
        binom[i][0] = 1.0;
        for (Eigen::Index k = 1; k <= i; ++k)
            binom[i][k] = (k == i) ? 1.0 : binom[i - 1][k - 1] + binom[i - 1][k];
    }
    for (Eigen::Index n = 1; n <= D; ++n) {
        double acc = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) acc += binom[n - 1][k] * c[n - k] * P[k];
        P[n] = -x * acc;
    }
    double logc = -x - static_cast<double>(D) * logs + std::log(std::abs(P[D]));
    for (Eigen::Index j = 0; j < D; ++j) {
        double lu = -std::log(u[j]);
        logc += std::log(theta) + (theta - 1.0) * std::log(lu) - std::log(u[j]);
    }
    return logc;
}

inline double frank_log_density(double theta, const Eigen::VectorXd& u) {
    const Eigen::Index D = u.size();
    if (D == 2) {
        // closed form valid for any theta != 0
        double e = std::expm1(-theta); // e^{-theta} - 1
        double eu = std::expm1(-theta * u[0]);
        double ev = std::expm1(-theta * u[1]);
        double denom = e + eu * ev; // always same sign as e
        double val = -theta * e * std::exp(-theta * (u[0] + u[1])) / (denom * denom);
        if (!(val > 0.0)) return -std::numeric_limits<double>::infinity();
        return std::log(val);
    }
    if (!(theta > 0.0))
        throw std::invalid_argument("frank copula: theta must be positive for D > 2");
    // w = prod_j (1 - e^{-theta u_j}) / c^{D-1}, c = 1 - e^{-theta}
    double logc_ = std::log(-std::expm1(-theta));
    double logw = -(static_cast<double>(D) - 1.0) * logc_;
    double sum_log_den = 0.0; // sum log(e^{theta u_j} - 1)
    for (Eigen::Index j = 0; j < D; ++j) {
        logw += std::log(-std::expm1(-theta * u[j]));
        sum_log_den += theta * u[j] + std::log(-std::expm1(-theta * u[j]));
    }
    double w = std::exp(logw);
    // Eulerian polynomial A_{D-1}(w)
    std::vector<std::vector<double>> A(D, std::vector<double>(D, 0.0));
    A[0][0] = 1.0;
    for (Eigen::Index m = 1; m < D; ++m)
        for (Eigen::Index k = 0; k <= m; ++k) {
            double left = (k > 0) ? (m - k) * A[m - 1][k - 1] : 0.0;
            double right = (k < m) ? (k + 1.0) * A[m - 1][k] : 0.0;
            A[m][k] = left + right;
        }
    double poly = 0.0;
    for (Eigen::Index k = D - 1; k >= 0; --k) poly = poly * w + A[D - 1][k];
    return (static_cast<double>(D) - 1.0) * std::log(theta) + logw + std::log(poly) -
           static_cast<double>(D) * std::log1p(-w) - sum_log_den;
}

// Archimedean generator inverse phi^{-1}(u) and generator psi(t).
inline double arch_gen_inv(CopulaFamily f, double theta, double u) {
    switch (f) {
    case CopulaFamily::Clayton: return (std::pow(u, -theta) - 1.0) / theta;
    case CopulaFamily::Gumbel: return std::pow(-std::log(u), theta);
    case CopulaFamily::Frank:
        return -std::log(std::expm1(-theta * u) / std::expm1(-theta));
    default: throw std::invalid_argument("arch_gen_inv: not Archimedean");
    }
}

inline double arch_gen(CopulaFamily f, double theta, double t) {
    switch (f) {
    case CopulaFamily::Clayton: return std::pow(1.0 + theta * t, -1.0 / theta);
    case CopulaFamily::Gumbel: return std::exp(-std::pow(t, 1.0 / theta));
    case CopulaFamily::Frank:
        return -std::log1p(std::expm1(-theta) * std::exp(-t)) / theta;
    default: throw std::invalid_argument("arch_gen: not Archimedean");
    }
}

} // namespace detail

/// log copula density at an interior point u of the unit cube.
inline double log_density(const CopulaSpec& spec, const Eigen::VectorXd& u) {
    const int D = static_cast<int>(u.size());
    if (D < 2) throw std::invalid_argument("log_density: dimension must be >= 2");
    // parameter checks kept cheap; this sits in the EM hot path
    switch (spec.family) {
    case CopulaFamily::Gaussian:
        if (spec.corr.rows() != D || spec.corr.cols() != D)
            throw std::invalid_argument("log_density: correlation matrix size mismatch");
        break;
    case CopulaFamily::Clayton:
        if (!(spec.theta > 0.0)) throw std::invalid_argument("log_density: invalid Clayton theta");
        break;
    case CopulaFamily::Gumbel:
        if (!(spec.theta >= 1.0)) throw std::invalid_argument("log_density: invalid Gumbel theta");
        break;
    case CopulaFamily::Frank:
        if (spec.theta == 0.0 || (D > 2 && !(spec.theta > 0.0)))
            throw std::invalid_argument("log_density: invalid Frank theta");
        break;
    }
    detail::check_open_cube(u);
    switch (spec.family) {
    case CopulaFamily::Gaussian: return detail::gaussian_log_density(spec.corr, u);
    case CopulaFamily::Clayton: return detail::clayton_log_density(spec.theta, u);
    case CopulaFamily::Gumbel: return detail::gumbel_log_density(spec.theta, u);
    default: return detail::frank_log_density(spec.theta, u);
    }
}

/// Archimedean copula CDF, C(u) = psi(sum_j phi^{-1}(u_j)).
inline double archimedean_cdf(const CopulaSpec& spec, const Eigen::VectorXd& u) {
    if (spec.family == CopulaFamily::Gaussian)
        throw std::invalid_argument("archimedean_cdf: Gaussian family not supported here");
    double s = 0.0;
    for (Eigen::Index j = 0; j < u.size(); ++j)
        s += detail::arch_gen_inv(spec.family, spec.theta, u[j]);
    return detail::arch_gen(spec.family, spec.theta, s);
}

/// Sample Kendall's tau of two columns (O(n^2) pair counting).
inline double kendall_tau(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const Eigen::Index n = x.size();
    if (n < 2 || y.size() != n) throw std::invalid_argument("kendall_tau: bad input");
    long long conc = 0, disc = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double p = (x[i] - x[j]) * (y[i] - y[j]);
            if (p > 0) ++conc;
            else if (p < 0) ++disc;
        }
    double total = 0.5 * static_cast<double>(n) * (static_cast<double>(n) - 1.0);
    return (static_cast<double>(conc) - static_cast<double>(disc)) / total;
}

namespace detail {

/// Debye function D_1(x) = (1/x) int_0^x t/(e^t - 1) dt.
inline double debye1(double x) {
    int n = 400;
    double h = x / n, s = 0.0;
    for (int i = 0; i <= n; ++i) {
        double t = i * h;
        double f = (t < 1e-8) ? 1.0 - t / 2.0 : t / std::expm1(t);
        double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s += w * f;
    }
    return s * h / (3.0 * x);
}

inline double frank_tau(double theta) { return 1.0 - 4.0 / theta * (1.0 - debye1(theta)); }

/// Invert the family's tau(theta) relation for a starting parameter value.
inline double theta_from_tau(CopulaFamily f, double tau, double lo, double hi) {
    switch (f) {
    case CopulaFamily::Clayton: {
        double t = (tau < 0.99 && tau > 0.0) ? 2.0 * tau / (1.0 - tau) : 1.0;
        return std::clamp(t, lo, hi);
    }
    case CopulaFamily::Gumbel: {
        double t = (tau < 0.99 && tau > 0.0) ? 1.0 / (1.0 - tau) : 1.5;
        return std::clamp(t, lo, hi);
    }
    case CopulaFamily::Frank: {
        if (tau <= 0.005) return std::clamp(1.0, lo, hi);
        double a = lo, b = hi;
        if (frank_tau(b) < tau) return b;
        for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (a + b);
            (frank_tau(mid) < tau ? a : b) = mid;
        }
        return 0.5 * (a + b);
    }
    default: throw std::invalid_argument("theta_from_tau: not Archimedean");
    }
}

/// mean pairwise Kendall tau on a deterministic row subsample
inline double mean_tau(const Eigen::MatrixXd& U, Eigen::Index max_rows = 400) {
    Eigen::Index n = U.rows(), D = U.cols();
    Eigen::Index stride = std::max<Eigen::Index>(1, n / max_rows);
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < n; i += stride) rows.push_back(i);
    Eigen::Index m = static_cast<Eigen::Index>(rows.size());
    double acc = 0.0;
    int pairs = 0;
    for (Eigen::Index c1 = 0; c1 < D; ++c1)
        for (Eigen::Index c2 = c1 + 1; c2 < D; ++c2) {
            Eigen::VectorXd x(m), y(m);
            for (Eigen::Index r = 0; r < m; ++r) {
                x[r] = U(rows[r], c1);
                y[r] = U(rows[r], c2);
            }
            acc += kendall_tau(x, y);
            ++pairs;
        }
    return acc / pairs;
}

} // namespace detail

struct FitResult {
    CopulaSpec spec;
    double loglik = -std::numeric_limits<double>::infinity();
    double start_loglik = -std::numeric_limits<double>::infinity(); // at the search start
};

/// Weighted maximum-likelihood fit of one family to pseudo-observations.
/// Archimedean parameters are found with the bounded quasi-Newton search;
/// the Gaussian correlation has the closed-form normal-scores estimate,
/// projected back to a valid correlation matrix.
inline FitResult fit_weighted(CopulaFamily family, const Eigen::MatrixXd& U,
                              const Eigen::VectorXd& weights) {
    const Eigen::Index n = U.rows(), D = U.cols();
    if (weights.size() != n) throw std::invalid_argument("fit_weighted: weight length mismatch");
    double wsum = weights.sum();
    if (!(wsum > 0.0)) throw std::invalid_argument("fit_weighted: zero total weight");

    if (family == CopulaFamily::Gaussian) {
        Eigen::MatrixXd Y(n, D);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < D; ++j) Y(i, j) = norm_quantile(U(i, j));
        Eigen::MatrixXd S = Eigen::MatrixXd::Zero(D, D);
        for (Eigen::Index i = 0; i < n; ++i)
            S += weights[i] * Y.row(i).transpose() * Y.row(i);
        S /= wsum;
        // normalize to unit diagonal
        Eigen::VectorXd d = S.diagonal().cwiseSqrt();
        Eigen::MatrixXd P = S;
        for (Eigen::Index i = 0; i < D; ++i)
            for (Eigen::Index j = 0; j < D; ++j) P(i, j) /= d[i] * d[j];
        // eigenvalue floor, then renormalize
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
        Eigen::VectorXd ev = es.eigenvalues().cwiseMax(1e-8);
        P = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
        Eigen::VectorXd d2 = P.diagonal().cwiseSqrt();
        for (Eigen::Index i = 0; i < D; ++i)
            for (Eigen::Index j = 0; j < D; ++j) P(i, j) /= d2[i] * d2[j];
        P = 0.5 * (P + P.transpose());
        P.diagonal().setOnes();
        CopulaSpec spec = CopulaSpec::gaussian(P);
        double ll = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            if (weights[i] > 0.0) ll += weights[i] * log_density(spec, U.row(i).transpose());
        // closed-form estimate; reference point is independence (ll = 0).
        // The normal-scores estimate can only lose to independence in
        // degenerate samples; keep independence then so the substep never
        // goes below its start.
        if (!(ll >= 0.0))
            return {CopulaSpec::gaussian(Eigen::MatrixXd::Identity(D, D)), 0.0, 0.0};
        return {spec, ll, 0.0};
    }

    double lo = 1e-4, hi = 50.0;
    if (family == CopulaFamily::Gumbel) lo = 1.0 + 1e-4;

    auto objective = [&](const Eigen::VectorXd& th) {
        CopulaSpec spec = CopulaSpec::archimedean(family, th[0]);
        double ll = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (weights[i] <= 0.0) continue;
            double ld = log_density(spec, U.row(i).transpose());
            if (!std::isfinite(ld)) return -std::numeric_limits<double>::infinity();
            ll += weights[i] * ld;
        }
        return ll;
    };

    double tau = detail::mean_tau(U);
    std::vector<double> starts{detail::theta_from_tau(family, tau, lo, hi)};
    for (double s : {1.5, 3.0, 8.0}) starts.push_back(std::clamp(s, lo, hi));

    Eigen::VectorXd vlo(1), vhi(1);
    vlo << lo;
    vhi << hi;
    for (double s0 : starts) {
        Eigen::VectorXd x0(1);
        x0 << s0;
        double f0 = objective(x0);
        if (!std::isfinite(f0)) continue;
        auto res = maximize_box(objective, x0, vlo, vhi);
        return {CopulaSpec::archimedean(family, res.x[0]), res.f, f0};
    }
    throw std::runtime_error(std::string("fit failed: no finite objective for ") +
                             family_name(family));
}

/// Fit every candidate family and keep the highest weighted log-likelihood;
/// ties resolve to the earlier family in the fixed order
/// Gaussian < Clayton < Gumbel < Frank.
inline FitResult best_fit(const std::vector<CopulaFamily>& families,
                          const Eigen::MatrixXd& U, const Eigen::VectorXd& weights) {
    if (families.empty()) throw std::invalid_argument("best_fit: no families given");
    std::vector<CopulaFamily> ordered{CopulaFamily::Gaussian, CopulaFamily::Clayton,
                                      CopulaFamily::Gumbel, CopulaFamily::Frank};
    FitResult best;
    bool any = false;
    for (CopulaFamily f : ordered) {
        if (std::find(families.begin(), families.end(), f) == families.end()) continue;
        try {
            FitResult r = fit_weighted(f, U, weights);
            if (!any || r.loglik > best.loglik) {
                best = std::move(r);
                any = true;
            }
        } catch (const std::runtime_error&) {
            // family failed to fit; others may still succeed
        }
    }
    if (!any) throw std::runtime_error("best_fit: all copula fits failed");
    return best;
}

/// Exact sampling with uniform marginals and the requested dependence.
inline Eigen::MatrixXd sample(const CopulaSpec& spec, int D, long n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
    spec.validate(D);
    Rng rng(seed);
    Eigen::MatrixXd U(n, D);
    switch (spec.family) {
    case CopulaFamily::Gaussian: {
        Eigen::LLT<Eigen::MatrixXd> llt(spec.corr);
        if (llt.info() != Eigen::Success)
            throw std::invalid_argument("sample: correlation matrix not positive definite");
        Eigen::MatrixXd L = llt.matrixL();
        Eigen::VectorXd z(D);
        for (long i = 0; i < n; ++i) {
            for (int j = 0; j < D; ++j) z[j] = rng.normal();
            Eigen::VectorXd x = L * z;
            for (int j = 0; j < D; ++j) U(i, j) = norm_cdf(x[j]);
        }
        break;
    }
    case CopulaFamily::Clayton: {
        for (long i = 0; i < n; ++i) {
            double v = rng.gamma(1.0 / spec.theta, spec.theta);
            for (int j = 0; j < D; ++j)
                U(i, j) = detail::arch_gen(spec.family, spec.theta, rng.exponential() / v);
        }
        break;
    }
    case CopulaFamily::Gumbel: {
        for (long i = 0; i < n; ++i) {
            double v = (spec.theta == 1.0) ? 1.0 : rng.positive_stable(1.0 / spec.theta);
            for (int j = 0; j < D; ++j)
                U(i, j) = detail::arch_gen(spec.family, spec.theta, rng.exponential() / v);
        }
        break;
    }
    case CopulaFamily::Frank: {
        if (!(spec.theta > 0.0)) {
            // negative dependence exists only at D=2 (guaranteed by
            // validate); invert the conditional CDF in closed form
            const double th = spec.theta;
            for (long i = 0; i < n; ++i) {
                double u1 = rng.uniform(), v = rng.uniform();
                double a = std::expm1(-th * u1); // e^{-th u1} - 1
                double u2 = -std::log1p(-v * std::expm1(-th) /
                                        (v * a - (a + 1.0))) / th;
                U(i, 0) = u1;
                U(i, 1) = u2;
            }
            break;
        }
        double c = -std::expm1(-spec.theta);
        for (long i = 0; i < n; ++i) {
            double v = static_cast<double>(rng.log_series(c));
            for (int j = 0; j < D; ++j)
                U(i, j) = detail::arch_gen(spec.family, spec.theta, rng.exponential() / v);
        }
        break;
    }
    }
    return clamp_unit(std::move(U));
}

} // namespace copmix

#endif
