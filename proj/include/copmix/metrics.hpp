#ifndef COPMIX_METRICS_HPP
#define COPMIX_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace copmix {

struct ClusteringReport {
    double silhouette = 0.0;
    double calinski_harabasz = 0.0;
    double davies_bouldin = 0.0;
    std::optional<double> adjusted_rand;
    std::optional<double> rand;
    std::optional<double> homogeneity;
    std::optional<double> completeness;
    std::optional<double> misclassification;
};

namespace detail {

/// map arbitrary label values to 0..K-1, preserving order of first value
inline std::vector<int> compress_labels(const std::vector<int>& labels, int& K) {
    std::map<int, int> ids;
    for (int l : labels) ids.emplace(l, 0);
    int next = 0;
    for (auto& [l, id] : ids) id = next++;
    K = next;
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) out[i] = ids[labels[i]];
    return out;
}

inline Eigen::MatrixXd contingency(const std::vector<int>& a, const std::vector<int>& b,
                                   int Ka, int Kb) {
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(Ka, Kb);
    for (std::size_t i = 0; i < a.size(); ++i) C(a[i], b[i]) += 1.0;
    return C;
}

inline double comb2(double m) { return m * (m - 1.0) / 2.0; }

/// Minimum-cost perfect assignment on a square cost matrix (Hungarian
/// algorithm with potentials). Returns the chosen column for each row.
inline std::vector<int> min_cost_assignment(const Eigen::MatrixXd& cost) {
    const int n = static_cast<int>(cost.rows());
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    const double inf = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, false);
        do {
            used[j0] = true;
            int i0 = p[j0], j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) { minv[j] = cur; way[j] = j0; }
                if (minv[j] < delta) { delta = minv[j]; j1 = j; }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) { u[p[j]] += delta; v[j] -= delta; }
                else minv[j] -= delta;
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> match(n);
    for (int j = 1; j <= n; ++j) match[p[j] - 1] = j - 1;
    return match;
}

} // namespace detail

struct InternalMetrics {
    double silhouette = 0.0;
    double calinski_harabasz = 0.0;
    double davies_bouldin = 0.0;
};

/// Euclidean-distance internal quality measures: mean silhouette,
/// Calinski-Harabasz variance ratio, Davies-Bouldin worst-pair average.
inline InternalMetrics internal_metrics(const Eigen::MatrixXd& X,
                                        const std::vector<int>& labels) {
    const Eigen::Index n = X.rows(), D = X.cols();
    if (static_cast<Eigen::Index>(labels.size()) != n)
        throw std::invalid_argument("internal_metrics: label length mismatch");
    int K = 0;
    std::vector<int> lab = detail::compress_labels(labels, K);
    if (K < 2) throw std::invalid_argument("internal_metrics: need at least 2 clusters");

    std::vector<int> counts(K, 0);
    for (int l : lab) ++counts[l];

    Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(K, D);
    for (Eigen::Index i = 0; i < n; ++i) centers.row(lab[i]) += X.row(i);
    for (int k = 0; k < K; ++k) centers.row(k) /= counts[k];
    Eigen::RowVectorXd grand = X.colwise().mean();

    // Calinski-Harabasz
    double between = 0.0, within = 0.0;
    for (int k = 0; k < K; ++k)
        between += counts[k] * (centers.row(k) - grand).squaredNorm();
    for (Eigen::Index i = 0; i < n; ++i)
        within += (X.row(i) - centers.row(lab[i])).squaredNorm();
    double ch = (between / (K - 1)) / (within / (static_cast<double>(n) - K));

    // Davies-Bouldin
    std::vector<double> scatter(K, 0.0);
    for (Eigen::Index i = 0; i < n; ++i)
        scatter[lab[i]] += (X.row(i) - centers.row(lab[i])).norm();
    for (int k = 0; k < K; ++k) scatter[k] /= counts[k];
    double db = 0.0;
    for (int i = 0; i < K; ++i) {
        double worst = 0.0;
        for (int j = 0; j < K; ++j) {
            if (j == i) continue;
            double d = (centers.row(i) - centers.row(j)).norm();
            worst = std::max(worst, (scatter[i] + scatter[j]) / d);
        }
        db += worst;
    }
    db /= K;

    // silhouette: mean over cluster distances per point
    double sil = 0.0;
    std::vector<double> dsum(K);
    for (Eigen::Index i = 0; i < n; ++i) {
        std::fill(dsum.begin(), dsum.end(), 0.0);
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i) dsum[lab[j]] += (X.row(i) - X.row(j)).norm();
        int own = lab[i];
        if (counts[own] <= 1) continue; // s(i) = 0 by convention
        double a = dsum[own] / (counts[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int k = 0; k < K; ++k)
            if (k != own && counts[k] > 0) b = std::min(b, dsum[k] / counts[k]);
        sil += (b - a) / std::max(a, b);
    }
    sil /= static_cast<double>(n);

    return {sil, ch, db};
}

struct ExternalMetrics {
    double adjusted_rand = 0.0;
    double rand = 0.0;
    double homogeneity = 0.0;
    double completeness = 0.0;
};

/// Contingency-table agreement measures between two labelings.
inline ExternalMetrics external_metrics(const std::vector<int>& true_labels,
                                        const std::vector<int>& pred_labels) {
    if (true_labels.size() != pred_labels.size())
        throw std::invalid_argument("external_metrics: length mismatch");
    const double n = static_cast<double>(true_labels.size());
    if (true_labels.empty()) throw std::invalid_argument("external_metrics: empty labels");
    int Kt = 0, Kp = 0;
    std::vector<int> t = detail::compress_labels(true_labels, Kt);
    std::vector<int> p = detail::compress_labels(pred_labels, Kp);
    Eigen::MatrixXd C = detail::contingency(t, p, Kt, Kp);
    Eigen::VectorXd rows = C.rowwise().sum(), cols = C.colwise().sum();

    double idx = 0.0;
    for (int i = 0; i < Kt; ++i)
        for (int j = 0; j < Kp; ++j) idx += detail::comb2(C(i, j));
    double ra = 0.0, cb = 0.0;
    for (int i = 0; i < Kt; ++i) ra += detail::comb2(rows[i]);
    for (int j = 0; j < Kp; ++j) cb += detail::comb2(cols[j]);
    double total = detail::comb2(n);

    ExternalMetrics m;
    m.rand = (total + 2.0 * idx - ra - cb) / total;
    double expected = ra * cb / total;
    double mx = 0.5 * (ra + cb);
    m.adjusted_rand = (mx == expected) ? 1.0 : (idx - expected) / (mx - expected);

    auto plogp = [](double q) { return q > 0.0 ? q * std::log(q) : 0.0; };
    double h_t = 0.0, h_p = 0.0, h_tp = 0.0, h_pt = 0.0;
    for (int i = 0; i < Kt; ++i) h_t -= plogp(rows[i] / n);
    for (int j = 0; j < Kp; ++j) h_p -= plogp(cols[j] / n);
    for (int i = 0; i < Kt; ++i)
        for (int j = 0; j < Kp; ++j) {
            if (C(i, j) == 0.0) continue;
            h_tp -= C(i, j) / n * std::log((C(i, j) / n) / (cols[j] / n)); // H(T|P)
            h_pt -= C(i, j) / n * std::log((C(i, j) / n) / (rows[i] / n)); // H(P|T)
        }
    m.homogeneity = (h_t == 0.0) ? 1.0 : 1.0 - h_tp / h_t;
    m.completeness = (h_p == 0.0) ? 1.0 : 1.0 - h_pt / h_p;
    return m;
}

/// Fraction of points misassigned under the best bijection between
/// predicted and true label names (exact optimal assignment).
inline double misclassification_rate(const std::vector<int>& true_labels,
                                     const std::vector<int>& pred_labels) {
    if (true_labels.size() != pred_labels.size())
        throw std::invalid_argument("misclassification_rate: length mismatch");
    if (true_labels.empty())
        throw std::invalid_argument("misclassification_rate: empty labels");
    int Kt = 0, Kp = 0;
    std::vector<int> t = detail::compress_labels(true_labels, Kt);
    std::vector<int> p = detail::compress_labels(pred_labels, Kp);
    if (Kp > Kt)
        throw std::invalid_argument("misclassification_rate: more predicted labels than true");
    int K = std::max(Kt, Kp);
    if (K > 12) throw std::invalid_argument("misclassification_rate: more than 12 labels");
    // maximize matched count = minimize negated counts on a square matrix
    Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(K, K);
    Eigen::MatrixXd C = detail::contingency(t, p, Kt, Kp);
    cost.topLeftCorner(Kt, Kp) = -C;
    std::vector<int> match = detail::min_cost_assignment(cost);
    double hit = 0.0;
    for (int i = 0; i < Kt; ++i)
        if (match[i] < Kp) hit += C(i, match[i]);
    return 1.0 - hit / static_cast<double>(true_labels.size());
}

/// One-call report used by the CLI: internal measures always, external
/// measures when ground truth is given.
inline ClusteringReport clustering_report(const Eigen::MatrixXd& X,
                                          const std::vector<int>& pred_labels,
                                          const std::vector<int>* true_labels = nullptr) {
    ClusteringReport r;
    InternalMetrics im = internal_metrics(X, pred_labels);
    r.silhouette = im.silhouette;
    r.calinski_harabasz = im.calinski_harabasz;
    r.davies_bouldin = im.davies_bouldin;
    if (true_labels) {
        ExternalMetrics em = external_metrics(*true_labels, pred_labels);
        r.adjusted_rand = em.adjusted_rand;
        r.rand = em.rand;
        r.homogeneity = em.homogeneity;
        r.completeness = em.completeness;
        try {
            r.misclassification = misclassification_rate(*true_labels, pred_labels);
        } catch (const std::invalid_argument&) {
            // left unset when no label bijection exists (K mismatch) or K > 12
        }
    }
    return r;
}

} // namespace copmix

#endif
