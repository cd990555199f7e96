#ifndef COPMIX_SERIALIZE_HPP
#define COPMIX_SERIALIZE_HPP

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "copmix/bshqi.hpp"
#include "copmix/copulas.hpp"
#include "copmix/datagen.hpp"
#include "copmix/metrics.hpp"
#include "copmix/mixture.hpp"
#include "copmix/stat_tests.hpp"

namespace copmix {

using json = nlohmann::json;

// ---- density model ----------------------------------------------------------

inline json to_json(const BshqiDensity& d) {
    const auto& m = d.mesh();
    return json{{"a", m.a}, {"b", m.b}, {"N", m.N}, {"lambda", d.lambda()}};
}

inline BshqiDensity bshqi_from_json(const json& j) {
    double a = j.at("a").get<double>(), b = j.at("b").get<double>();
    int N = j.at("N").get<int>();
    std::vector<double> lam = j.at("lambda").get<std::vector<double>>();
    UniformMesh mesh{a, b, N, (b - a) / N};
    return BshqiDensity(mesh, std::move(lam));
}

// ---- copula spec ------------------------------------------------------------

inline json to_json(const CopulaSpec& s) {
    if (s.family == CopulaFamily::Gaussian) {
        std::vector<std::vector<double>> P(s.corr.rows());
        for (Eigen::Index i = 0; i < s.corr.rows(); ++i) {
            P[i].resize(s.corr.cols());
            for (Eigen::Index j = 0; j < s.corr.cols(); ++j) P[i][j] = s.corr(i, j);
        }
        return json{{"family", "gaussian"}, {"P", P}};
    }
    return json{{"family", family_name(s.family)}, {"theta", s.theta}};
}

inline CopulaSpec copula_from_json(const json& j) {
    CopulaFamily f = family_from_name(j.at("family").get<std::string>());
    if (f == CopulaFamily::Gaussian) {
        auto P = j.at("P").get<std::vector<std::vector<double>>>();
        Eigen::Index D = static_cast<Eigen::Index>(P.size());
        Eigen::MatrixXd M(D, D);
        for (Eigen::Index i = 0; i < D; ++i) {
            if (P[i].size() != static_cast<std::size_t>(D))
                throw std::invalid_argument("copula_from_json: P is not square");
            for (Eigen::Index k = 0; k < D; ++k) M(i, k) = P[i][k];
        }
        return CopulaSpec::gaussian(M);
    }
    return CopulaSpec::archimedean(f, j.at("theta").get<double>());
}

// ---- mixture model ----------------------------------------------------------

inline const char* bins_rule_name(const BinsRule& r) {
    switch (r.kind) {
    case BinsRule::Kind::Rice: return "rice";
    case BinsRule::Kind::CubeRoot: return "cuberoot";
    default: return "explicit";
    }
}

inline json to_json(const MixtureConfig& c) {
    std::vector<std::string> fams;
    for (auto f : c.families) fams.emplace_back(family_name(f));
    json j{{"K", c.K},
           {"families", fams},
           {"bins_rule", bins_rule_name(c.bins_rule)},
           {"padding", c.padding},
           {"marginal_method",
            c.marginal_method == MarginalMethod::Bshqi ? "bshqi" : "kernel"},
           {"init", c.init == InitMethod::KMeans ? "kmeans" : "random"},
           {"restarts", c.restarts},
           {"tol", c.tol},
           {"max_iter", c.max_iter},
           {"seed", c.seed}};
    if (c.bins_rule.kind == BinsRule::Kind::Explicit) j["bins"] = c.bins_rule.explicit_bins;
    return j;
}

inline json to_json(const MixtureModel& m) {
    json comps = json::array();
    for (const auto& c : m.components) {
        json marg = json::array();
        for (const auto& md : c.marginals) {
            if (!md.is_bshqi())
                throw std::runtime_error(
                    "to_json: kernel-baseline marginals are not serializable");
            marg.push_back(to_json(md.bshqi()));
        }
        comps.push_back(json{{"pi", c.pi}, {"copula", to_json(c.copula)},
                             {"marginals", std::move(marg)}});
    }
    return json{{"K", m.K()},
                {"components", std::move(comps)},
                {"loglik_trace", m.loglik_trace},
                {"seed", m.config.seed},
                {"config", to_json(m.config)}};
}

inline MixtureConfig config_from_json(const json& j) {
    MixtureConfig c;
    c.K = j.at("K").get<int>();
    c.families.clear();
    for (const auto& f : j.at("families")) c.families.push_back(family_from_name(f));
    std::string rule = j.at("bins_rule").get<std::string>();
    if (rule == "rice") c.bins_rule = BinsRule::rice();
    else if (rule == "cuberoot") c.bins_rule = BinsRule::cube_root();
    else c.bins_rule = BinsRule::fixed(j.at("bins").get<int>());
    c.padding = j.at("padding").get<double>();
    c.marginal_method = j.at("marginal_method").get<std::string>() == "kernel"
                            ? MarginalMethod::KernelBaseline
                            : MarginalMethod::Bshqi;
    c.init = j.at("init").get<std::string>() == "kmeans" ? InitMethod::KMeans
                                                         : InitMethod::Random;
    c.restarts = j.at("restarts").get<int>();
    c.tol = j.at("tol").get<double>();
    c.max_iter = j.at("max_iter").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

inline MixtureModel mixture_from_json(const json& j) {
    MixtureModel m;
    m.config = config_from_json(j.at("config"));
    for (const auto& cj : j.at("components")) {
        MixtureComponent c;
        c.pi = cj.at("pi").get<double>();
        c.copula = copula_from_json(cj.at("copula"));
        for (const auto& mj : cj.at("marginals"))
            c.marginals.emplace_back(bshqi_from_json(mj));
        m.components.push_back(std::move(c));
    }
    m.loglik_trace = j.at("loglik_trace").get<std::vector<double>>();
    return m;
}

// ---- reports ----------------------------------------------------------------

inline json to_json(const GofReport& r) {
    return json{{"ks_statistic", r.ks_statistic},   {"ks_pvalue", r.ks_pvalue},
                {"cvm_statistic", r.cvm_statistic}, {"cvm_pvalue", r.cvm_pvalue},
                {"amise", r.amise},                 {"rmse", r.rmse},
                {"mean_time_ms", r.mean_time_ms},   {"std_time_ms", r.std_time_ms}};
}

inline json to_json(const ClusteringReport& r) {
    json j{{"silhouette", r.silhouette},
           {"calinski_harabasz", r.calinski_harabasz},
           {"davies_bouldin", r.davies_bouldin}};
    if (r.adjusted_rand) j["adjusted_rand"] = *r.adjusted_rand;
    if (r.rand) j["rand"] = *r.rand;
    if (r.homogeneity) j["homogeneity"] = *r.homogeneity;
    if (r.completeness) j["completeness"] = *r.completeness;
    if (r.misclassification) j["misclassification"] = *r.misclassification;
    return j;
}

// ---- dataset recipes ----------------------------------------------------------

inline json to_json(const DatasetRecipe& r) {
    json clusters = json::array();
    for (const auto& c : r.clusters)
        clusters.push_back(json{{"size", c.size},
                                {"copula", to_json(c.copula)},
                                {"loc", c.loc},
                                {"scale", c.scale}});
    return json{{"name", r.name}, {"dim", r.dim}, {"clusters", std::move(clusters)}};
}

inline DatasetRecipe recipe_from_json(const json& j) {
    DatasetRecipe r;
    r.name = j.at("name").get<std::string>();
    r.dim = j.at("dim").get<int>();
    for (const auto& cj : j.at("clusters")) {
        ClusterRecipe c;
        c.size = cj.at("size").get<long>();
        c.copula = copula_from_json(cj.at("copula"));
        c.loc = cj.at("loc").get<std::vector<double>>();
        c.scale = cj.at("scale").get<std::vector<double>>();
        r.clusters.push_back(std::move(c));
    }
    return r;
}

// ---- CSV --------------------------------------------------------------------

struct CsvDataset {
    Eigen::MatrixXd X;
    std::optional<std::vector<int>> labels;
    std::vector<std::string> columns; // feature column names, excluding label
};

inline std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

inline void write_dataset_csv(std::ostream& out, const Eigen::MatrixXd& X,
                              const std::vector<int>* labels = nullptr) {
    const Eigen::Index n = X.rows(), D = X.cols();
    if (labels && static_cast<Eigen::Index>(labels->size()) != n)
        throw std::invalid_argument("write_dataset_csv: label length mismatch");
    for (Eigen::Index j = 0; j < D; ++j) out << (j ? ",x" : "x") << (j + 1);
    if (labels) out << ",label";
    out << "\n";
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < D; ++j) {
            if (j) out << ',';
            out << format_double(X(i, j));
        }
        if (labels) out << ',' << (*labels)[i];
        out << "\n";
    }
}

inline void write_dataset_csv(const std::string& path, const Eigen::MatrixXd& X,
                              const std::vector<int>* labels = nullptr) {
    std::ofstream f(path);
    if (!f) throw std::invalid_argument("cannot open for writing: " + path);
    write_dataset_csv(f, X, labels);
    if (!f) throw std::invalid_argument("write failed: " + path);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

inline CsvDataset read_dataset_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("csv: empty file");
    std::vector<std::string> header = split_csv_line(line);
    bool has_label = !header.empty() && header.back() == "label";
    std::size_t D = header.size() - (has_label ? 1 : 0);
    if (D < 1) throw std::invalid_argument("csv: no feature columns");

    CsvDataset ds;
    ds.columns.assign(header.begin(), header.begin() + D);
    if (has_label) ds.labels.emplace();
    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw std::invalid_argument("csv: row " + std::to_string(rows + 2) +
                                     " has " + std::to_string(cells.size()) +
                                     " fields, expected " + std::to_string(header.size()));
        try {
            for (std::size_t j = 0; j < D; ++j) values.push_back(std::stod(cells[j]));
            if (has_label) ds.labels->push_back(std::stoi(cells[D]));
        } catch (const std::exception&) {
            throw std::invalid_argument("csv: unparseable value in row " +
                                     std::to_string(rows + 2));
        }
        ++rows;
    }
    if (rows == 0) throw std::invalid_argument("csv: no data rows");
    ds.X.resize(rows, D);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < D; ++j) ds.X(i, j) = values[i * D + j];
    return ds;
}

inline CsvDataset read_dataset_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open: " + path);
    return read_dataset_csv(f);
}

inline void write_json_file(const std::string& path, const json& j) {
    std::ofstream f(path);
    if (!f) throw std::invalid_argument("cannot open for writing: " + path);
    f << j.dump(2) << "\n";
    if (!f) throw std::invalid_argument("write failed: " + path);
}

inline json read_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open: " + path);
    return json::parse(f);
}

} // namespace copmix

#endif
