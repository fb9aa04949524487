#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "mutcausal/artifacts.hpp"
#include "mutcausal/errors.hpp"

using namespace mutcausal;
namespace fs = std::filesystem;

namespace {

PosteriorSamples random_samples(std::uint64_t seed) {
    const auto spec = make_model(ResearchQuestion::Rq2, 2);
    auto s = make_samples_shell(spec, {"a", "b"});
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    for (int c = 0; c < 3; ++c) {
        Eigen::MatrixXd m(20, spec.dimension());
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
        for (Eigen::Index j = 2; j < m.cols(); ++j) m.col(j) = m.col(j).array().exp();
        s.chains.push_back(m);
    }
    s.compute_diagnostics();
    return s;
}

fs::path scratch_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("mutcausal_test_" + name);
    fs::remove_all(dir);
    return dir;
}

} // namespace

TEST_CASE("FNV-1a reference vectors") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
    CHECK(content_hash("a") == "fnv1a64:af63dc4c8601ec8c");
}

TEST_CASE("format_double round trips") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> normal(0, 1e3);
    for (int i = 0; i < 1000; ++i) {
        const double v = normal(rng) * std::pow(10.0, i % 40 - 20);
        CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("write_atomic creates directories and replaces content") {
    const auto dir = scratch_dir("atomic");
    const auto path = dir / "nested" / "f.txt";
    write_atomic(path, "one");
    CHECK(read_file(path) == "one");
    write_atomic(path, "two");
    CHECK(read_file(path) == "two");
    CHECK_FALSE(fs::exists(path.string() + ".tmp"));
    CHECK(hash_file(path) == content_hash("two"));
    CHECK_THROWS_AS(read_file(dir / "missing"), ParseError);
    fs::remove_all(dir);
}

TEST_CASE("draws CSV round trip is exact") {
    const auto s = random_samples(4);
    std::ostringstream out;
    write_draws_csv(out, s);
    const std::string text = out.str();
    CHECK(text.rfind("chain,iteration,alpha[a],alpha[b],beta[a]", 0) == 0);
    std::istringstream in(text);
    const auto back = read_draws_csv(in, s.model_id, s.projects);
    REQUIRE(back.chain_count() == 3);
    for (std::size_t c = 0; c < 3; ++c) CHECK(back.chains[c] == s.chains[c]);
    CHECK(back.parameters[5].family == "gamma");
    CHECK(back.parameters[5].project == "b");
    CHECK(back.parameters[5].positive);
    CHECK(back.diagnostics[0].r_hat.value == s.diagnostics[0].r_hat.value);

    std::ostringstream again;
    write_draws_csv(again, back);
    CHECK(again.str() == text);
}

TEST_CASE("draws CSV rejects malformed input") {
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return read_draws_csv(in, "rq1", {"a"});
    };
    CHECK_THROWS_AS(parse(""), EmptyDataset);
    CHECK_THROWS_AS(parse("chain,iteration,alpha[a],gamma[a]\n1,1,0.1,0.2\n"), SchemaError);
    CHECK_THROWS_AS(parse("chain,iteration,alpha[a],beta[a]\n1,1,0.1\n"), ParseError);
    CHECK_THROWS_AS(parse("chain,iteration,alpha[a],beta[a]\n1,1,0.1,x\n"), ParseError);
    CHECK_THROWS_AS(parse("chain,iteration,alpha[a],beta[a]\n1,2,0.1,0.2\n"), ParseError);
    CHECK_THROWS_AS(parse("chain,iteration,alpha[a],beta[a]\n2,1,0.1,0.2\n1,1,0.1,0.2\n"), ParseError);
    CHECK_NOTHROW(parse("chain,iteration,alpha[a],beta[a]\n1,1,0.1,0.2\n1,2,0.3,0.4\n"));
}

TEST_CASE("diagnostics JSON") {
    auto s = random_samples(5);
    for (auto& chain : s.chains) chain.col(0).setConstant(1.0);
    s.compute_diagnostics();
    const auto j = diagnostics_to_json(s);
    CHECK(j["format_version"] == kFormatVersion);
    CHECK(j["model_id"] == "rq2");
    const auto& first = j["parameters"][0];
    CHECK(first["name"] == "alpha[a]");
    CHECK(first["r_hat"].is_null());
    const auto o = overview(s);
    CHECK(o.flagged >= 1);
    CHECK(std::isinf(o.max_r_hat));
}

TEST_CASE("manifest round trip") {
    RunManifest m;
    m.command = "fit";
    m.model_id = "rq3";
    m.inputs = {{"data.csv", content_hash("x")}};
    m.data_hash = content_hash("y");
    m.projects = {"a", "b"};
    m.has_chain_config = true;
    m.chain.seed = 77;
    m.chain.chains = 2;
    m.outputs = {{"draws.csv", content_hash("z")}};
    m.started = utc_timestamp();
    m.finished = utc_timestamp();
    const auto back = manifest_from_json(json::parse(manifest_to_json(m).dump()));
    CHECK(back.command == "fit");
    CHECK(back.model_id == "rq3");
    CHECK(back.inputs[0].hash == m.inputs[0].hash);
    CHECK(back.projects == m.projects);
    CHECK(back.has_chain_config);
    CHECK(back.chain.seed == 77);
    CHECK(back.chain.chains == 2);
    CHECK(back.outputs[0].path == "draws.csv");
    CHECK(back.started.size() == std::string("2026-01-01T00:00:00Z").size());

    auto bad = manifest_to_json(m);
    bad["format_version"] = 99;
    CHECK_THROWS_AS(manifest_from_json(bad), ManifestMismatch);
    CHECK_THROWS_AS(manifest_from_json(json::parse("{\"command\": 3}")), ManifestMismatch);
}

TEST_CASE("table CSV and JSON") {
    std::vector<CoefficientSummary> rows = {{"wire", 2.79, 0.08, 2.63, 2.95}};
    std::ostringstream out;
    write_table_csv(out, rows);
    CHECK(out.str() == "project,mean,se,q025,q975\nwire,2.79,0.080000000000000002,2.6299999999999999,2.9500000000000002\n");
    const auto j = table_to_json(rows);
    CHECK(j["rows"][0]["project"] == "wire");
    CHECK(j["rows"][0]["mean"].get<double>() == 2.79);
}

TEST_CASE("curve CSV leaves the companion columns empty when absent") {
    CounterfactualCurve curve{"p", Eigen::VectorXd::LinSpaced(2, 0, 1), {{0.5, 0.5, 0.4, 0.6}, {0.7, 0.7, 0.6, 0.8}}, {}};
    std::ostringstream out;
    write_curve_csv(out, curve);
    std::istringstream in(out.str());
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header.rfind("grid,causal_mean", 0) == 0);
    CHECK(row.find(",,,") != std::string::npos);
}

TEST_CASE("describe CSV writes NA for undefined skewness") {
    std::istringstream in("project,mutant_id,exec,cover,killed\np,a,1,1,1\np,b,2,1,0\n");
    const auto rows = summarize(read_csv(in));
    std::ostringstream out;
    write_describe_csv(out, rows);
    const auto text = out.str();
    CHECK(text.rfind("Subject,#Mutants,MS,Variable,Min,Q1,Median,Q3,Max,Skewness\n", 0) == 0);
    CHECK(text.find("p,2,0.5,Exec,") != std::string::npos);
    CHECK(text.find(",NA\n") != std::string::npos);
}

TEST_CASE("generator config from JSON") {
    const auto cfg = scm_config_from_json(json::parse(R"({
        "seed": 3, "mutants_per_project": 50, "law": "negative-binomial", "cover_mean": 5,
        "projects": [{"name": "a", "alpha": 0.1, "beta": 0.4, "gamma": 1.0, "nu": 0, "lambda": 0.7, "sigma": 0.5}]
    })"));
    CHECK(cfg.seed == 3);
    CHECK(cfg.mutants_per_project == 50);
    CHECK(cfg.law == CoverLaw::NegativeBinomial);
    CHECK(cfg.projects[0].lambda == 0.7);

    const auto drawn = scm_config_from_json(json::parse(R"({"project_names": ["x", "y"], "truth_seed": 2})"));
    CHECK(drawn.projects.size() == 2);
    CHECK(drawn.projects[1].beta == sample_truth({"x", "y"}, 2)[1].beta);

    CHECK_THROWS_AS(scm_config_from_json(json::parse(R"({"law": "poisson", "project_names": ["x"]})")), ConfigError);
    CHECK_THROWS_AS(scm_config_from_json(json::parse(R"({"seed": 1})")), ConfigError);

    const auto truth = truth_to_json(cfg.projects);
    CHECK(truth["projects"][0]["name"] == "a");
    CHECK(truth["projects"][0]["total_cover_effect"].get<double>() == doctest::Approx(1.0 + 0.7 * 0.4));
}

TEST_CASE("DAG report") {
    const auto dag = parse_edge_list("Cover -> Exec\nCover -> Killed\nExec -> Killed\n");
    const auto j = dag_report_to_json(dag, "Exec", "Killed");
    CHECK(j["treatment"] == "Exec");
    CHECK(j["minimal_adjustment_sets"][0][0] == "Cover");
    const auto text = dag_report_text(dag, "Exec", "Killed");
    CHECK(text.find("Cover") != std::string::npos);
}
