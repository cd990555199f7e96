#ifndef COPMIX_MIXTURE_HPP
#define COPMIX_MIXTURE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "copmix/bshqi.hpp"
#include "copmix/copulas.hpp"
#include "copmix/mesh_ecdf.hpp"
#include "copmix/rng.hpp"

namespace copmix {

/// Uniform-kernel marginal estimate, the baseline alternative to BSHQI.
class UniformKernelDensity {
public:
    UniformKernelDensity(WeightedSample sample, double h)
        : h_(h), total_(sample.total_weight()) {
        if (!(h > 0.0)) throw std::invalid_argument("UniformKernelDensity: h must be positive");
        const std::size_t n = sample.values.size();
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
            return sample.values[i] < sample.values[j];
        });
        values_.resize(n);
        cumw_.resize(n);
        double acc = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            values_[r] = sample.values[order[r]];
            weights_.push_back(sample.weights[order[r]]);
            acc += weights_.back();
            cumw_[r] = acc;
        }
    }

    double pdf(double x) const {
        auto lo = std::lower_bound(values_.begin(), values_.end(), x - 0.5 * h_);
        auto hi = std::upper_bound(values_.begin(), values_.end(), x + 0.5 * h_);
        double w = 0.0;
        for (auto it = lo; it != hi; ++it) w += weights_[it - values_.begin()];
        return w / (total_ * h_);
    }

    double cdf(double x) const {
        // integral of the box-kernel mixture: each point contributes a ramp
        double acc = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i)
            acc += weights_[i] * std::clamp((x - values_[i]) / h_ + 0.5, 0.0, 1.0);
        return acc / total_;
    }

    double bandwidth() const { return h_; }

private:
    double h_;
    double total_;
    std::vector<double> values_, weights_, cumw_;
};

enum class MarginalMethod { Bshqi, KernelBaseline };

/// One fitted marginal: BSHQI spline or the kernel baseline.
class MarginalDensity {
public:
    MarginalDensity(BshqiDensity d) : impl_(std::move(d)) {}
    MarginalDensity(UniformKernelDensity d) : impl_(std::move(d)) {}

    double pdf(double x) const {
        return std::visit([&](const auto& m) { return m.pdf(x); }, impl_);
    }
    double cdf(double x) const {
        return std::visit([&](const auto& m) { return m.cdf(x); }, impl_);
    }
    bool is_bshqi() const { return std::holds_alternative<BshqiDensity>(impl_); }
    const BshqiDensity& bshqi() const { return std::get<BshqiDensity>(impl_); }

private:
    std::variant<BshqiDensity, UniformKernelDensity> impl_;
};

struct MixtureComponent {
    double pi = 1.0;
    CopulaSpec copula;
    std::vector<MarginalDensity> marginals; // one per dimension
};

struct Responsibilities {
    Eigen::MatrixXd gamma; // n x K, rows sum to 1
};

enum class InitMethod { Random, KMeans };

struct MixtureConfig {
    int K = 1;
    std::vector<CopulaFamily> families{CopulaFamily::Gaussian, CopulaFamily::Clayton,
                                       CopulaFamily::Gumbel, CopulaFamily::Frank};
    BinsRule bins_rule = BinsRule::rice();
    double padding = 0.05;
    MarginalMethod marginal_method = MarginalMethod::Bshqi;
    InitMethod init = InitMethod::Random;
    int restarts = 5;
    double tol = 1e-4;
    int max_iter = 200;
    double clamp_eps = 1e-10;
    std::uint64_t seed = 0;
};

/// Per-iteration EM diagnostics recorded for verification.
struct EmDiagnostics {
    std::vector<double> pi_sum_err;           // |sum_k pi_k - 1| after each M-step
    std::vector<double> gamma_row_err;        // max row-sum error after each E-step
    std::vector<double> copula_substep_gain;  // min over clusters of (new - initial) weighted copula ll
};

struct MixtureModel {
    std::vector<MixtureComponent> components;
    std::vector<double> loglik_trace;
    int n_iter = 0;
    bool converged = false;
    MixtureConfig config;
    EmDiagnostics diagnostics;

    int K() const { return static_cast<int>(components.size()); }
    int dim() const {
        return components.empty() ? 0 : static_cast<int>(components.front().marginals.size());
    }
};

/// cluster weight too small to refit marginals and a copula
struct ClusterCollapse : std::runtime_error {
    explicit ClusterCollapse(int k)
        : std::runtime_error("cluster collapse: effective weight of cluster " +
                             std::to_string(k) + " below D+1") {}
};

inline double component_log_density(const MixtureComponent& comp, const Eigen::VectorXd& x,
                                    double clamp_eps = 1e-10) {
    const int D = static_cast<int>(comp.marginals.size());
    Eigen::VectorXd u(D);
    double marg = 0.0;
    for (int j = 0; j < D; ++j) {
        u[j] = std::clamp(comp.marginals[j].cdf(x[j]), clamp_eps, 1.0 - clamp_eps);
        marg += std::log(std::max(comp.marginals[j].pdf(x[j]), 1e-300));
    }
    return log_density(comp.copula, u) + marg;
}

inline Responsibilities e_step(const std::vector<MixtureComponent>& components,
                               const Eigen::MatrixXd& X, double clamp_eps = 1e-10) {
    const Eigen::Index n = X.rows();
    const int K = static_cast<int>(components.size());
    Eigen::MatrixXd gamma(n, K);
    for (Eigen::Index i = 0; i < n; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < K; ++k) {
            double v = std::log(components[k].pi) +
                       component_log_density(components[k], X.row(i).transpose(), clamp_eps);
            gamma(i, k) = v;
            mx = std::max(mx, v);
        }
        if (!std::isfinite(mx))
            throw std::runtime_error("e_step: all components underflow at row " +
                                     std::to_string(i));
        double denom = 0.0;
        for (int k = 0; k < K; ++k) denom += std::exp(gamma(i, k) - mx);
        for (int k = 0; k < K; ++k) gamma(i, k) = std::exp(gamma(i, k) - mx) / denom;
    }
    return {std::move(gamma)};
}

namespace detail {

inline MarginalDensity fit_marginal(const Eigen::VectorXd& column,
                                    const Eigen::VectorXd& weights,
                                    const MixtureConfig& cfg) {
    std::vector<double> v(column.data(), column.data() + column.size());
    std::vector<double> w(weights.data(), weights.data() + weights.size());
    WeightedSample sample(std::move(v), std::move(w));
    if (cfg.marginal_method == MarginalMethod::Bshqi)
        return MarginalDensity(BshqiDensity::fit(sample, cfg.bins_rule, cfg.padding));
    UniformMesh m = build_mesh(sample.values, cfg.bins_rule, cfg.padding);
    return MarginalDensity(UniformKernelDensity(std::move(sample), m.h));
}

struct MStepOutcome {
    std::vector<MixtureComponent> components;
    double min_copula_gain = std::numeric_limits<double>::infinity();
};

inline MStepOutcome m_step_impl(const Eigen::MatrixXd& X, const Eigen::MatrixXd& gamma,
                                const MixtureConfig& cfg) {
    const Eigen::Index n = X.rows(), D = X.cols();
    const int K = static_cast<int>(gamma.cols());
    MStepOutcome out;
    out.components.reserve(K);
    for (int k = 0; k < K; ++k) {
        Eigen::VectorXd w = gamma.col(k);
        double wk = w.sum();
        if (wk < static_cast<double>(D) + 1.0) throw ClusterCollapse(k);

        MixtureComponent comp;
        comp.pi = wk / static_cast<double>(n);
        for (Eigen::Index j = 0; j < D; ++j)
            comp.marginals.push_back(fit_marginal(X.col(j), w, cfg));

        Eigen::MatrixXd U(n, D);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < D; ++j) U(i, j) = comp.marginals[j].cdf(X(i, j));
        U = clamp_unit(std::move(U), cfg.clamp_eps);

        FitResult fr = best_fit(cfg.families, U, w);
        comp.copula = fr.spec;
        out.components.push_back(std::move(comp));
        // gain of the winning family's parameter search over its own start
        out.min_copula_gain = std::min(out.min_copula_gain, fr.loglik - fr.start_loglik);
    }
    // normalize pi exactly
    double psum = 0.0;
    for (auto& c : out.components) psum += c.pi;
    for (auto& c : out.components) c.pi /= psum;
    return out;
}

} // namespace detail

inline std::vector<MixtureComponent> m_step(const Eigen::MatrixXd& X,
                                            const Responsibilities& gamma,
                                            const MixtureConfig& cfg) {
    return detail::m_step_impl(X, gamma.gamma, cfg).components;
}

inline double log_likelihood(const std::vector<MixtureComponent>& components,
                             const Eigen::MatrixXd& X, double clamp_eps = 1e-10) {
    const Eigen::Index n = X.rows();
    const int K = static_cast<int>(components.size());
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        std::vector<double> v(K);
        for (int k = 0; k < K; ++k) {
            v[k] = std::log(components[k].pi) +
                   component_log_density(components[k], X.row(i).transpose(), clamp_eps);
            mx = std::max(mx, v[k]);
        }
        double s = 0.0;
        for (double t : v) s += std::exp(t - mx);
        total += mx + std::log(s);
    }
    return total;
}

inline std::vector<int> predict(const MixtureModel& model, const Eigen::MatrixXd& X) {
    Responsibilities r = e_step(model.components, X, model.config.clamp_eps);
    std::vector<int> labels(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        int arg = 0;
        for (int k = 1; k < model.K(); ++k)
            if (r.gamma(i, k) > r.gamma(i, arg)) arg = k;
        labels[i] = arg;
    }
    return labels;
}

namespace detail {

inline Eigen::MatrixXd one_hot(const std::vector<int>& labels, int K) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(labels.size(), K);
    for (std::size_t i = 0; i < labels.size(); ++i) g(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
    return g;
}

/// Random clustering partition: K randomly chosen observations act as
/// anchors and every point joins its nearest anchor. Unlike uniform label
/// assignment this produces spatially coherent clusters, so restarts start
/// from genuinely different (and non-symmetric) configurations.
inline std::vector<int> random_partition(const Eigen::MatrixXd& X, int K, int min_count,
                                         Rng& rng) {
    const Eigen::Index n = X.rows();
    for (int attempt = 0; attempt < 200; ++attempt) {
        std::vector<Eigen::Index> anchors(K);
        for (int k = 0; k < K; ++k) anchors[k] = static_cast<Eigen::Index>(rng.integer(n));
        std::vector<int> labels(n);
        std::vector<int> counts(K, 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            int arg = 0;
            double bd = (X.row(i) - X.row(anchors[0])).squaredNorm();
            for (int k = 1; k < K; ++k) {
                double d = (X.row(i) - X.row(anchors[k])).squaredNorm();
                if (d < bd) { bd = d; arg = k; }
            }
            labels[i] = arg;
            ++counts[arg];
        }
        if (*std::min_element(counts.begin(), counts.end()) >= min_count) return labels;
    }
    throw std::runtime_error("random_partition: could not produce a usable partition");
}

/// plain Lloyd's K-Means (Euclidean), seeded random starting centers
inline std::vector<int> kmeans_partition(const Eigen::MatrixXd& X, int K, Rng& rng) {
    const Eigen::Index n = X.rows(), D = X.cols();
    Eigen::MatrixXd centers(K, D);
    for (int k = 0; k < K; ++k) centers.row(k) = X.row(rng.integer(n));
    std::vector<int> labels(n, 0);
    for (int it = 0; it < 100; ++it) {
        bool changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            int arg = 0;
            double bd = (X.row(i) - centers.row(0)).squaredNorm();
            for (int k = 1; k < K; ++k) {
                double d = (X.row(i) - centers.row(k)).squaredNorm();
                if (d < bd) { bd = d; arg = k; }
            }
            if (arg != labels[i]) { labels[i] = arg; changed = true; }
        }
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(K, D);
        std::vector<int> counts(K, 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            sums.row(labels[i]) += X.row(i);
            ++counts[labels[i]];
        }
        for (int k = 0; k < K; ++k)
            if (counts[k] > 0) centers.row(k) = sums.row(k) / counts[k];
        if (!changed) break;
    }
    return labels;
}

} // namespace detail

/// Full EM fit: multi-restart initialization (best initial log-likelihood
/// wins), then alternating E/M steps under the relative log-likelihood
/// stopping rule. Cluster collapse triggers a fresh start, up to 3 rescues.
inline MixtureModel fit(const Eigen::MatrixXd& X, const MixtureConfig& cfg) {
    const Eigen::Index n = X.rows(), D = X.cols();
    if (D < 2) throw std::invalid_argument("fit: data must have at least 2 dimensions");
    if (cfg.K < 1) throw std::invalid_argument("fit: K must be >= 1");
    if (n < static_cast<Eigen::Index>(cfg.K) * (D + 1))
        throw std::invalid_argument("fit: need n >= K*(D+1)");
    if (cfg.restarts < 1) throw std::invalid_argument("fit: restarts must be >= 1");
    if (!(cfg.tol > 0.0)) throw std::invalid_argument("fit: tol must be positive");

    Rng rng(cfg.seed);
    const int min_count = static_cast<int>(D) + 1;

    auto initialize = [&]() {
        std::vector<MixtureComponent> best;
        double best_ll = -std::numeric_limits<double>::infinity();
        for (int r = 0; r < cfg.restarts; ++r) {
            for (int tries = 0; tries < 5; ++tries) {
                try {
                    std::vector<int> labels =
                        (cfg.init == InitMethod::KMeans)
                            ? detail::kmeans_partition(X, cfg.K, rng)
                            : detail::random_partition(X, cfg.K, min_count, rng);
                    Eigen::MatrixXd g = detail::one_hot(labels, cfg.K);
                    auto out = detail::m_step_impl(X, g, cfg);
                    double ll = log_likelihood(out.components, X, cfg.clamp_eps);
                    if (ll > best_ll) {
                        best_ll = ll;
                        best = std::move(out.components);
                    }
                    break;
                } catch (const ClusterCollapse&) {
                    // degenerate partition; draw another
                }
            }
        }
        if (best.empty()) throw std::runtime_error("fit: initialization failed");
        return std::pair{std::move(best), best_ll};
    };

    MixtureModel model;
    model.config = cfg;

    int rescues = 0;
    auto [components, ll0] = initialize();
    model.loglik_trace.push_back(ll0);

    while (true) {
        try {
            for (int it = 0; it < cfg.max_iter; ++it) {
                Responsibilities gamma = e_step(components, X, cfg.clamp_eps);
                double row_err = 0.0;
                for (Eigen::Index i = 0; i < n; ++i)
                    row_err = std::max(row_err, std::abs(gamma.gamma.row(i).sum() - 1.0));
                model.diagnostics.gamma_row_err.push_back(row_err);

                auto out = detail::m_step_impl(X, gamma.gamma, cfg);
                components = std::move(out.components);
                model.diagnostics.copula_substep_gain.push_back(out.min_copula_gain);
                double psum = 0.0;
                for (const auto& c : components) psum += c.pi;
                model.diagnostics.pi_sum_err.push_back(std::abs(psum - 1.0));

                double ll = log_likelihood(components, X, cfg.clamp_eps);
                double prev = model.loglik_trace.back();
                model.loglik_trace.push_back(ll);
                model.n_iter = it + 1;
                if (std::abs(ll - prev) / (1.0 + std::abs(ll)) < cfg.tol) {
                    model.converged = true;
                    break;
                }
            }
            break;
        } catch (const ClusterCollapse&) {
            if (++rescues > 3) throw;
            auto [fresh, fresh_ll] = initialize();
            components = std::move(fresh);
            model.loglik_trace.clear();
            model.loglik_trace.push_back(fresh_ll);
            model.diagnostics = {};
            model.n_iter = 0;
            model.converged = false;
        }
    }

    model.components = std::move(components);
    return model;
}

} // namespace copmix

#endif
