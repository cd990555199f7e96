// copmix command-line tool: synthetic data generation, density estimation,
// copula-mixture clustering, and clustering metrics.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "copmix/datagen.hpp"
#include "copmix/metrics.hpp"
#include "copmix/mixture.hpp"
#include "copmix/serialize.hpp"
#include "copmix/stat_tests.hpp"

namespace {

using copmix::json;

// truth distribution spec: "normal:MU,VAR" | "exp:LAMBDA" | "mix:W,M,S;W,M,S;..."
struct TruthDist {
    std::function<double(double)> pdf, cdf;
};

std::vector<double> parse_numbers(const std::string& s, char sep) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, sep)) out.push_back(std::stod(tok));
    return out;
}

TruthDist parse_truth(const std::string& spec) {
    auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw CLI::ValidationError("--truth", "expected DIST:PARAMS, got '" + spec + "'");
    std::string kind = spec.substr(0, colon), params = spec.substr(colon + 1);
    try {
        if (kind == "normal") {
            auto v = parse_numbers(params, ',');
            if (v.size() != 2) throw std::invalid_argument("normal needs MU,VAR");
            copmix::NormalDist d{v[0], v[1]};
            return {[d](double x) { return pdf(d, x); }, [d](double x) { return cdf(d, x); }};
        }
        if (kind == "exp") {
            auto v = parse_numbers(params, ',');
            if (v.size() != 1) throw std::invalid_argument("exp needs LAMBDA");
            copmix::ExponentialDist d{v[0]};
            return {[d](double x) { return pdf(d, x); }, [d](double x) { return cdf(d, x); }};
        }
        if (kind == "mix") {
            copmix::GaussianMixtureDist d;
            std::stringstream ss(params);
            std::string comp;
            while (std::getline(ss, comp, ';')) {
                auto v = parse_numbers(comp, ',');
                if (v.size() != 3) throw std::invalid_argument("mix components are W,M,S");
                d.weights.push_back(v[0]);
                d.means.push_back(v[1]);
                d.sds.push_back(v[2]);
            }
            if (d.weights.empty()) throw std::invalid_argument("mix needs components");
            return {[d](double x) { return pdf(d, x); }, [d](double x) { return cdf(d, x); }};
        }
    } catch (const std::exception& e) {
        throw CLI::ValidationError("--truth", e.what());
    }
    throw CLI::ValidationError("--truth", "unknown distribution '" + kind + "'");
}

copmix::BinsRule parse_bins(const std::string& s) {
    if (s == "rice") return copmix::BinsRule::rice();
    if (s == "cuberoot") return copmix::BinsRule::cube_root();
    try {
        int n = std::stoi(s);
        if (n >= 2) return copmix::BinsRule::fixed(n);
    } catch (const std::exception&) {
    }
    throw CLI::ValidationError("--bins", "expected rice, cuberoot, or an integer >= 2");
}

std::string strip_csv_suffix(const std::string& path) {
    if (path.size() > 4 && path.substr(path.size() - 4) == ".csv")
        return path.substr(0, path.size() - 4);
    return path;
}

// pull defaults for unset flags from a JSON config file (flags win)
void apply_config(CLI::App* cmd, const std::string& config_path) {
    if (config_path.empty()) return;
    json cfg = copmix::read_json_file(config_path);
    for (auto& [key, value] : cfg.items()) {
        CLI::Option* opt = cmd->get_option_no_throw("--" + key);
        if (!opt || opt->count() > 0) continue;
        std::string text = value.is_string() ? value.get<std::string>() : value.dump();
        opt->add_result(text);
        opt->run_callback();
    }
}

int cmd_gendata(const std::string& which, std::uint64_t seed, const std::string& out,
                const std::string& recipe_path) {
    copmix::DatasetRecipe recipe =
        recipe_path.empty()
            ? copmix::default_recipe(copmix::synthetic_from_name(which))
            : copmix::recipe_from_json(copmix::read_json_file(recipe_path));
    copmix::LabeledDataset ds = copmix::generate(recipe, seed);
    std::string csv_path = out.empty() ? recipe.name + ".csv" : out;
    copmix::write_dataset_csv(csv_path, ds.X, &ds.labels);
    json rj = copmix::to_json(ds.recipe);
    rj["seed"] = seed;
    copmix::write_json_file(strip_csv_suffix(csv_path) + ".recipe.json", rj);
    std::cout << "wrote " << csv_path << " (" << ds.X.rows() << " rows, "
              << ds.X.cols() << " columns, " << recipe.clusters.size() << " clusters)\n";
    return 0;
}

int cmd_density(const std::string& in, int column, const std::string& bins,
                double padding, const std::string& truth, const std::string& out) {
    copmix::CsvDataset ds = copmix::read_dataset_csv(in);
    if (column < 1 || column > ds.X.cols())
        throw CLI::ValidationError("--column", "column out of range");
    Eigen::VectorXd col = ds.X.col(column - 1);
    std::vector<double> values(col.data(), col.data() + col.size());
    copmix::WeightedSample sample(values, std::vector<double>(values.size(), 1.0));
    copmix::BshqiDensity model =
        copmix::BshqiDensity::fit(sample, parse_bins(bins), padding);

    std::string prefix = out.empty() ? "density" : strip_csv_suffix(out);
    copmix::write_json_file(prefix + ".model.json", copmix::to_json(model));

    { // plot data: grid, pdf, cdf
        std::ofstream f(prefix + ".plot.csv");
        if (!f) throw std::runtime_error("cannot open for writing: " + prefix + ".plot.csv");
        f << "x,pdf,cdf\n";
        const auto& m = model.mesh();
        const int grid_n = 512;
        for (int i = 0; i <= grid_n; ++i) {
            double x = m.a + (m.b - m.a) * i / grid_n;
            f << copmix::format_double(x) << ',' << copmix::format_double(model.pdf(x))
              << ',' << copmix::format_double(model.cdf(x)) << "\n";
        }
    }

    if (!truth.empty()) {
        TruthDist td = parse_truth(truth);
        copmix::GofReport rep;
        auto ks = copmix::ks_test(values, [&](double x) { return model.cdf(x); });
        auto cvm = copmix::cvm_test(values, [&](double x) { return model.cdf(x); });
        rep.ks_statistic = ks.statistic;
        rep.ks_pvalue = ks.pvalue;
        rep.cvm_statistic = cvm.statistic;
        rep.cvm_pvalue = cvm.pvalue;
        auto err = copmix::density_errors(
            [&](int) { return [&](double x) { return model.pdf(x); }; }, td.pdf,
            model.mesh().a, model.mesh().b, 1);
        rep.amise = err.amise;
        rep.rmse = err.rmse;
        rep.mean_time_ms = err.mean_time_ms;
        rep.std_time_ms = err.std_time_ms;
        copmix::write_json_file(prefix + ".gof.json", copmix::to_json(rep));
        std::printf("%-14s %12s %12s\n", "test", "statistic", "p-value");
        std::printf("%-14s %12.6g %12.6g\n", "ks", rep.ks_statistic, rep.ks_pvalue);
        std::printf("%-14s %12.6g %12.6g\n", "cvm", rep.cvm_statistic, rep.cvm_pvalue);
        std::printf("%-14s %12.6g\n", "ise", rep.amise);
        std::printf("%-14s %12.6g\n", "rmse", rep.rmse);
    }
    std::cout << "wrote " << prefix << ".model.json and " << prefix << ".plot.csv\n";
    return 0;
}

int cmd_cluster(const std::string& in, const copmix::MixtureConfig& cfg,
                const std::string& out) {
    copmix::CsvDataset ds = copmix::read_dataset_csv(in);
    if (ds.X.rows() < static_cast<Eigen::Index>(cfg.K) * (ds.X.cols() + 1))
        throw CLI::ValidationError("--K", "K exceeds n/(D+1) for this dataset");

    copmix::MixtureModel model = copmix::fit(ds.X, cfg);
    std::vector<int> labels = copmix::predict(model, ds.X);
    double ll = model.loglik_trace.back();

    std::string prefix = out.empty() ? "cluster" : strip_csv_suffix(out);
    copmix::write_json_file(prefix + ".model.json", copmix::to_json(model));
    {
        std::ofstream f(prefix + ".labels.csv");
        if (!f) throw std::runtime_error("cannot open for writing: " + prefix + ".labels.csv");
        f << "label\n";
        for (int l : labels) f << l << "\n";
    }
    copmix::ClusteringReport report = copmix::clustering_report(
        ds.X, labels, ds.labels ? &*ds.labels : nullptr);
    copmix::write_json_file(prefix + ".report.json", copmix::to_json(report));

    // per-cluster selection table
    std::vector<long> counts(model.K(), 0);
    for (int l : labels) ++counts[l];
    std::printf("%-8s %-10s %-10s %s\n", "cluster", "points", "copula", "parameter");
    for (int k = 0; k < model.K(); ++k) {
        const auto& c = model.components[k];
        std::string param = c.copula.family == copmix::CopulaFamily::Gaussian
                                ? "P (" + std::to_string(ds.X.cols()) + "x" +
                                      std::to_string(ds.X.cols()) + ")"
                                : "theta=" + std::to_string(c.copula.theta);
        std::printf("%-8d %-10ld %-10s %s\n", k, counts[k],
                    copmix::family_name(c.copula.family), param.c_str());
    }
    std::printf("log-likelihood %.6g   iterations %d   %s\n", ll, model.n_iter,
                model.converged ? "converged" : "max-iter");
    std::cout << "wrote " << prefix << ".model.json, " << prefix << ".labels.csv, "
              << prefix << ".report.json\n";
    return 0;
}

int cmd_metrics(const std::string& data_path, const std::string& labels_path,
                const std::string& out) {
    copmix::CsvDataset ds = copmix::read_dataset_csv(data_path);
    std::vector<int> pred;
    {
        std::ifstream f(labels_path);
        if (!f) throw std::runtime_error("cannot open: " + labels_path);
        std::string line;
        if (!std::getline(f, line)) throw std::runtime_error("labels csv: empty file");
        while (std::getline(f, line)) {
            if (!line.empty()) pred.push_back(std::stoi(line));
        }
    }
    if (static_cast<Eigen::Index>(pred.size()) != ds.X.rows())
        throw CLI::ValidationError("--labels", "label count does not match data rows");
    copmix::ClusteringReport report =
        copmix::clustering_report(ds.X, pred, ds.labels ? &*ds.labels : nullptr);
    json j = copmix::to_json(report);
    if (!out.empty()) copmix::write_json_file(out, j);
    std::printf("%-20s %12s\n", "metric", "value");
    for (auto& [key, value] : j.items())
        std::printf("%-20s %12.6g\n", key.c_str(), value.get<double>());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"copula-mixture clustering and quadratic-spline density estimation"};
    app.require_subcommand(1);

    std::string config_path;

    // gendata
    auto* gen = app.add_subcommand("gendata", "generate a synthetic labeled dataset");
    std::string gen_which, gen_out, gen_recipe;
    std::uint64_t gen_seed = 0;
    gen->add_option("which", gen_which, "dataset id: x1, x2, x3, x4")->required();
    gen->add_option("--seed", gen_seed, "random seed");
    gen->add_option("--out,-o", gen_out, "output CSV path");
    gen->add_option("--recipe", gen_recipe, "generate from a recipe JSON instead of defaults");
    gen->add_option("--config", config_path, "JSON config file (flags win)");

    // density
    auto* den = app.add_subcommand("density", "fit the quadratic-spline density to one column");
    std::string den_in, den_bins = "rice", den_truth, den_out;
    int den_column = 1;
    double den_padding = 0.05;
    den->add_option("--in,-i", den_in, "input dataset CSV")->required();
    den->add_option("--column", den_column, "1-based feature column to fit");
    den->add_option("--bins", den_bins, "rice | cuberoot | explicit integer");
    den->add_option("--padding", den_padding, "support padding fraction");
    den->add_option("--truth", den_truth,
                    "true distribution (normal:MU,VAR | exp:LAMBDA | mix:W,M,S;...)");
    den->add_option("--out,-o", den_out, "output prefix");
    den->add_option("--config", config_path, "JSON config file (flags win)");

    // cluster
    auto* clu = app.add_subcommand("cluster", "fit the copula-mixture model");
    std::string clu_in, clu_out, clu_bins = "rice", clu_init = "random",
                clu_marginal = "bshqi";
    std::vector<std::string> clu_families;
    int clu_K = 1, clu_restarts = 5, clu_max_iter = 200;
    double clu_tol = 1e-4, clu_padding = 0.05;
    std::uint64_t clu_seed = 0;
    clu->add_option("--in,-i", clu_in, "input dataset CSV")->required();
    clu->add_option("--K,-K", clu_K, "number of clusters")->required();
    clu->add_option("--families", clu_families,
                    "candidate copula families (default: all four)");
    clu->add_option("--init", clu_init, "random | kmeans");
    clu->add_option("--restarts", clu_restarts, "initialization restarts");
    clu->add_option("--tol", clu_tol, "relative log-likelihood tolerance");
    clu->add_option("--max-iter", clu_max_iter, "iteration cap");
    clu->add_option("--bins", clu_bins, "rice | cuberoot | explicit integer");
    clu->add_option("--padding", clu_padding, "marginal support padding fraction");
    clu->add_option("--marginal", clu_marginal, "bshqi | kernel");
    clu->add_option("--seed", clu_seed, "random seed");
    clu->add_option("--out,-o", clu_out, "output prefix");
    clu->add_option("--config", config_path, "JSON config file (flags win)");

    // metrics
    auto* met = app.add_subcommand("metrics", "score a labeling of a dataset");
    std::string met_data, met_labels, met_out;
    met->add_option("--data", met_data, "dataset CSV (label column = ground truth)")
        ->required();
    met->add_option("--labels", met_labels, "predicted labels CSV (header `label`)")
        ->required();
    met->add_option("--out,-o", met_out, "report JSON path");
    met->add_option("--config", config_path, "JSON config file (flags win)");

    try {
        app.parse(argc, argv);
        for (auto* cmd : {gen, den, clu, met})
            if (cmd->parsed()) apply_config(cmd, config_path);

        if (gen->parsed()) return cmd_gendata(gen_which, gen_seed, gen_out, gen_recipe);
        if (den->parsed())
            return cmd_density(den_in, den_column, den_bins, den_padding, den_truth,
                               den_out);
        if (clu->parsed()) {
            copmix::MixtureConfig cfg;
            cfg.K = clu_K;
            if (!clu_families.empty()) {
                cfg.families.clear();
                for (const auto& f : clu_families)
                    cfg.families.push_back(copmix::family_from_name(f));
            }
            cfg.bins_rule = parse_bins(clu_bins);
            cfg.padding = clu_padding;
            if (clu_marginal == "kernel")
                cfg.marginal_method = copmix::MarginalMethod::KernelBaseline;
            else if (clu_marginal != "bshqi")
                throw CLI::ValidationError("--marginal", "expected bshqi or kernel");
            if (clu_init == "kmeans") cfg.init = copmix::InitMethod::KMeans;
            else if (clu_init != "random")
                throw CLI::ValidationError("--init", "expected random or kmeans");
            cfg.restarts = clu_restarts;
            cfg.tol = clu_tol;
            cfg.max_iter = clu_max_iter;
            cfg.seed = clu_seed;
            return cmd_cluster(clu_in, cfg, clu_out);
        }
        if (met->parsed()) return cmd_metrics(met_data, met_labels, met_out);
        return 2;
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2; // usage/validation problems → 2, --help → 0
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
