#ifndef COPMIX_DATAGEN_HPP
#define COPMIX_DATAGEN_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "copmix/copulas.hpp"
#include "copmix/normal.hpp"
#include "copmix/rng.hpp"

namespace copmix {

// ---- univariate test distributions ----------------------------------------

struct NormalDist {
    double mu = 0.0;
    double var = 1.0;
};
struct ExponentialDist {
    double lambda = 1.0;
};
struct GaussianMixtureDist {
    std::vector<double> weights, means, sds;
};

inline std::vector<double> gen_univariate(const NormalDist& d, long n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("gen_univariate: n must be >= 1");
    if (!(d.var > 0.0)) throw std::invalid_argument("gen_univariate: variance must be positive");
    Rng rng(seed);
    std::vector<double> out(n);
    double sd = std::sqrt(d.var);
    for (auto& x : out) x = d.mu + sd * rng.normal();
    return out;
}

inline std::vector<double> gen_univariate(const ExponentialDist& d, long n,
                                          std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("gen_univariate: n must be >= 1");
    if (!(d.lambda > 0.0)) throw std::invalid_argument("gen_univariate: lambda must be positive");
    Rng rng(seed);
    std::vector<double> out(n);
    for (auto& x : out) x = rng.exponential(d.lambda);
    return out;
}

inline std::vector<double> gen_univariate(const GaussianMixtureDist& d, long n,
                                          std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("gen_univariate: n must be >= 1");
    const std::size_t K = d.weights.size();
    if (K == 0 || d.means.size() != K || d.sds.size() != K)
        throw std::invalid_argument("gen_univariate: inconsistent mixture spec");
    double wsum = 0.0;
    for (double w : d.weights) {
        if (!(w > 0.0)) throw std::invalid_argument("gen_univariate: weights must be positive");
        wsum += w;
    }
    for (double s : d.sds)
        if (!(s > 0.0)) throw std::invalid_argument("gen_univariate: sds must be positive");
    Rng rng(seed);
    std::vector<double> out(n);
    for (auto& x : out) {
        double u = rng.uniform() * wsum, acc = 0.0;
        std::size_t k = 0;
        for (; k + 1 < K; ++k) {
            acc += d.weights[k];
            if (u < acc) break;
        }
        x = d.means[k] + d.sds[k] * rng.normal();
    }
    return out;
}

inline double pdf(const NormalDist& d, double x) {
    return norm_pdf((x - d.mu) / std::sqrt(d.var)) / std::sqrt(d.var);
}
inline double cdf(const NormalDist& d, double x) {
    return norm_cdf((x - d.mu) / std::sqrt(d.var));
}
inline double pdf(const ExponentialDist& d, double x) {
    return x < 0.0 ? 0.0 : d.lambda * std::exp(-d.lambda * x);
}
inline double cdf(const ExponentialDist& d, double x) {
    return x < 0.0 ? 0.0 : -std::expm1(-d.lambda * x);
}
inline double pdf(const GaussianMixtureDist& d, double x) {
    double wsum = 0.0, f = 0.0;
    for (std::size_t k = 0; k < d.weights.size(); ++k) {
        wsum += d.weights[k];
        f += d.weights[k] * norm_pdf((x - d.means[k]) / d.sds[k]) / d.sds[k];
    }
    return f / wsum;
}
inline double cdf(const GaussianMixtureDist& d, double x) {
    double wsum = 0.0, F = 0.0;
    for (std::size_t k = 0; k < d.weights.size(); ++k) {
        wsum += d.weights[k];
        F += d.weights[k] * norm_cdf((x - d.means[k]) / d.sds[k]);
    }
    return F / wsum;
}

// ---- labeled synthetic datasets -------------------------------------------

/// One cluster of a synthetic dataset: copula sample pushed through normal
/// quantiles, then shifted and scaled per dimension.
struct ClusterRecipe {
    long size = 0;
    CopulaSpec copula;
    std::vector<double> loc, scale; // per dimension
};

struct DatasetRecipe {
    std::string name;
    int dim = 0;
    std::vector<ClusterRecipe> clusters;
};

struct LabeledDataset {
    Eigen::MatrixXd X;
    std::vector<int> labels;
    std::uint64_t seed = 0;
    DatasetRecipe recipe;
};

/// Materialize a recipe: cluster k gets the sub-seed seed*1000003 + k so
/// clusters are independent and the whole dataset is reproducible from
/// (recipe, seed) alone.
inline LabeledDataset generate(const DatasetRecipe& recipe, std::uint64_t seed) {
    if (recipe.dim < 2) throw std::invalid_argument("generate: recipe dim must be >= 2");
    long total = 0;
    for (const auto& c : recipe.clusters) {
        if (c.size < 1) throw std::invalid_argument("generate: cluster size must be >= 1");
        if (c.loc.size() != static_cast<std::size_t>(recipe.dim) ||
            c.scale.size() != static_cast<std::size_t>(recipe.dim))
            throw std::invalid_argument("generate: loc/scale dimension mismatch");
        total += c.size;
    }
    LabeledDataset ds;
    ds.seed = seed;
    ds.recipe = recipe;
    ds.X.resize(total, recipe.dim);
    ds.labels.resize(total);
    long row = 0;
    for (std::size_t k = 0; k < recipe.clusters.size(); ++k) {
        const auto& c = recipe.clusters[k];
        Eigen::MatrixXd U = sample(c.copula, recipe.dim, c.size,
                                   seed * 1000003ull + static_cast<std::uint64_t>(k));
        for (long i = 0; i < c.size; ++i) {
            for (int j = 0; j < recipe.dim; ++j)
                ds.X(row, j) = c.loc[j] + c.scale[j] * norm_quantile(U(i, j));
            ds.labels[row] = static_cast<int>(k);
            ++row;
        }
    }
    return ds;
}

enum class SyntheticId { X1, X2, X3, X4 };

inline SyntheticId synthetic_from_name(const std::string& s) {
    if (s == "x1" || s == "X1") return SyntheticId::X1;
    if (s == "x2" || s == "X2") return SyntheticId::X2;
    if (s == "x3" || s == "X3") return SyntheticId::X3;
    if (s == "x4" || s == "X4") return SyntheticId::X4;
    throw std::invalid_argument("unknown dataset: " + s);
}

inline const char* synthetic_name(SyntheticId id) {
    switch (id) {
    case SyntheticId::X1: return "x1";
    case SyntheticId::X2: return "x2";
    case SyntheticId::X3: return "x3";
    default: return "x4";
    }
}

/// Default recipes. Cluster sizes are fixed; copula parameters and the
/// per-cluster shifts are defaults recorded in the recipe (and serialized
/// alongside every generated dataset).
inline DatasetRecipe default_recipe(SyntheticId id) {
    auto cl = [](long n, CopulaSpec spec, std::vector<double> loc,
                 std::vector<double> scale) {
        return ClusterRecipe{n, std::move(spec), std::move(loc), std::move(scale)};
    };
    DatasetRecipe r;
    switch (id) {
    case SyntheticId::X1:
        r.name = "x1";
        r.dim = 2;
        r.clusters = {
            cl(500, CopulaSpec::clayton(4.0), {0.0, 0.0}, {1.0, 1.0}),
            cl(500, CopulaSpec::clayton(6.0), {6.0, 0.0}, {1.0, 1.0}),
            cl(300, CopulaSpec::frank(10.0), {0.0, 6.0}, {1.0, 1.0}),
            cl(200, CopulaSpec::gumbel(3.0), {6.0, 6.0}, {1.0, 1.0}),
        };
        return r;
    case SyntheticId::X2:
        r.name = "x2";
        r.dim = 2;
        r.clusters = {
            cl(1013, CopulaSpec::clayton(5.0), {0.0, 0.0}, {1.0, 1.0}),
            cl(1014, CopulaSpec::clayton(9.0), {7.0, 0.0}, {1.0, 1.0}),
            cl(985, CopulaSpec::gumbel(4.0), {0.0, 7.0}, {1.0, 1.0}),
            cl(988, CopulaSpec::gumbel(6.0), {7.0, 7.0}, {1.0, 1.0}),
        };
        return r;
    case SyntheticId::X3:
        r.name = "x3";
        r.dim = 2;
        r.clusters = {
            cl(700, CopulaSpec::frank(8.0), {0.0, 0.0}, {1.0, 1.0}),
            cl(1000, CopulaSpec::frank(12.0), {6.0, 0.0}, {1.0, 1.0}),
            cl(1000, CopulaSpec::frank(16.0), {3.0, 5.5}, {1.0, 1.0}),
        };
        return r;
    default: { // X4: two overlapping 3-D clusters
        r.name = "x4";
        r.dim = 3;
        Eigen::MatrixXd P(3, 3);
        P << 1.0, 0.5, 0.5, 0.5, 1.0, 0.5, 0.5, 0.5, 1.0;
        r.clusters = {
            cl(1000, CopulaSpec::gaussian(P), {0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}),
            cl(1000, CopulaSpec::gaussian(P), {2.4, 2.4, 2.4}, {1.0, 1.0, 1.0}),
        };
        return r;
    }
    }
}

inline LabeledDataset gen_synthetic(SyntheticId id, std::uint64_t seed) {
    return generate(default_recipe(id), seed);
}

} // namespace copmix

#endif
