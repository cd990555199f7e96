#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <sstream>

#include "copmix/serialize.hpp"
#include "schema_check.hpp"

using namespace copmix;

namespace {

json load_schema(const std::string& name) {
    const char* dir = std::getenv("COPMIX_SCHEMAS");
    REQUIRE(dir != nullptr);
    return read_json_file(std::string(dir) + "/" + name);
}

} // namespace

TEST_CASE("density model round trip and schema") {
    std::vector<double> v = gen_univariate(NormalDist{5.0, 0.3}, 2000, 1);
    BshqiDensity d =
        BshqiDensity::fit(WeightedSample::unweighted(v), BinsRule::rice(), 0.05);
    json j = to_json(d);
    CHECK(schema_check::validate(load_schema("density_model.schema.json"), j));
    BshqiDensity back = bshqi_from_json(j);
    CHECK(back.mesh().N == d.mesh().N);
    for (double x : {4.2, 5.0, 5.7})
        CHECK(back.pdf(x) == Catch::Approx(d.pdf(x)).margin(1e-15));
}

TEST_CASE("copula spec round trip and schema") {
    json schema = load_schema("copula.schema.json");
    for (const auto& s : {CopulaSpec::clayton(2.5), CopulaSpec::gumbel(3.0),
                          CopulaSpec::frank(-4.0)}) {
        json j = to_json(s);
        CHECK(schema_check::validate(schema, j));
        CopulaSpec back = copula_from_json(j);
        CHECK(back.family == s.family);
        CHECK(back.theta == s.theta);
    }
    Eigen::MatrixXd P(2, 2);
    P << 1.0, 0.4, 0.4, 1.0;
    json j = to_json(CopulaSpec::gaussian(P));
    CHECK(schema_check::validate(schema, j));
    CopulaSpec back = copula_from_json(j);
    CHECK(back.corr(0, 1) == 0.4);
}

TEST_CASE("mixture model round trip and schema") {
    LabeledDataset ds = generate(
        DatasetRecipe{"toy", 2,
                      {ClusterRecipe{120, CopulaSpec::clayton(4.0), {0.0, 0.0}, {1.0, 1.0}},
                       ClusterRecipe{120, CopulaSpec::gumbel(3.0), {6.0, 6.0}, {1.0, 1.0}}}},
        3);
    MixtureConfig cfg;
    cfg.K = 2;
    cfg.restarts = 2;
    cfg.max_iter = 30;
    MixtureModel m = fit(ds.X, cfg);
    json j = to_json(m);
    std::string why;
    CHECK(schema_check::validate(load_schema("mixture_model.schema.json"), j, &why));
    INFO(why);

    MixtureModel back = mixture_from_json(j);
    CHECK(back.K() == m.K());
    CHECK(back.loglik_trace == m.loglik_trace);
    // reloaded model scores points identically up to serialization precision
    Eigen::VectorXd x = ds.X.row(0).transpose();
    CHECK(component_log_density(back.components[0], x) ==
          Catch::Approx(component_log_density(m.components[0], x)).margin(1e-9));
}

TEST_CASE("recipe round trip and schema") {
    DatasetRecipe r = default_recipe(SyntheticId::X1);
    json j = to_json(r);
    CHECK(schema_check::validate(load_schema("recipe.schema.json"), j));
    DatasetRecipe back = recipe_from_json(j);
    LabeledDataset a = generate(r, 11), b = generate(back, 11);
    CHECK((a.X - b.X).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("reports match their schemas") {
    GofReport g;
    g.ks_statistic = 0.02;
    g.ks_pvalue = 0.4;
    CHECK(schema_check::validate(load_schema("gof_report.schema.json"), to_json(g)));

    ClusteringReport c;
    c.silhouette = 0.5;
    c.adjusted_rand = 0.9;
    json j = to_json(c);
    CHECK(schema_check::validate(load_schema("clustering_report.schema.json"), j));
    CHECK(j.contains("adjusted_rand"));
    CHECK(!j.contains("rand"));
}

TEST_CASE("csv writer and reader round trip") {
    Eigen::MatrixXd X(3, 2);
    X << 1.5, -2.25, 1e-17, 3.0, 123456.789, 0.1;
    std::vector<int> labels{0, 1, 1};

    std::stringstream ss;
    write_dataset_csv(ss, X, &labels);
    CsvDataset ds = read_dataset_csv(ss);
    REQUIRE(ds.labels.has_value());
    CHECK(*ds.labels == labels);
    // 17 significant digits round-trip doubles exactly
    CHECK((ds.X - X).cwiseAbs().maxCoeff() == 0.0);
    CHECK(ds.columns == std::vector<std::string>{"x1", "x2"});

    std::stringstream nolabel;
    write_dataset_csv(nolabel, X);
    CsvDataset ds2 = read_dataset_csv(nolabel);
    CHECK(!ds2.labels.has_value());
    CHECK((ds2.X - X).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("csv reader rejects malformed input") {
    std::stringstream empty;
    CHECK_THROWS_AS(read_dataset_csv(empty), std::invalid_argument);
    std::stringstream ragged("x1,x2\n1.0,2.0\n3.0\n");
    CHECK_THROWS_AS(read_dataset_csv(ragged), std::invalid_argument);
    std::stringstream garbage("x1,x2\n1.0,abc\n");
    CHECK_THROWS_AS(read_dataset_csv(garbage), std::invalid_argument);
    std::stringstream headeronly("x1,x2\n");
    CHECK_THROWS_AS(read_dataset_csv(headeronly), std::invalid_argument);
}
