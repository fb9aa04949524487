#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "mutcausal/dataset.hpp"
#include "mutcausal/errors.hpp"

using namespace mutcausal;

namespace {

Dataset parse(const std::string& text, bool lenient = false, LoadReport* report = nullptr) {
    std::istringstream in(text);
    return read_csv(in, lenient, report);
}

const std::string kHeader = "project,mutant_id,exec,cover,killed\n";

// Adjusted Fisher-Pearson skewness, written out step by step.
double textbook_skewness(const std::vector<double>& x) {
    const double n = static_cast<double>(x.size());
    double mean = 0;
    for (double v : x) mean += v;
    mean /= n;
    double m2 = 0, m3 = 0;
    for (double v : x) {
        m2 += (v - mean) * (v - mean);
        m3 += (v - mean) * (v - mean) * (v - mean);
    }
    m2 /= n;
    m3 /= n;
    const double g1 = m3 / std::pow(m2, 1.5);
    return g1 * std::sqrt(n * (n - 1)) / (n - 2);
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

} // namespace

TEST_CASE("three well-formed rows make one project") {
    const auto ds = parse(kHeader + "wire,m1,4,2,1\nwire,m2,0,0,0\nwire,m3,10,3,1\n");
    CHECK(ds.project_count() == 1);
    CHECK(ds.size() == 3);
    CHECK(ds.project_size(0) == 3);
    CHECK(ds.records()[2].exec == 10);
}

TEST_CASE("projects are indexed in name order and grouped") {
    const auto ds = parse(kHeader + "zeta,a,1,1,1\nalpha,b,2,1,0\nzeta,c,3,1,1\nalpha,d,5,2,1\n");
    REQUIRE(ds.project_count() == 2);
    CHECK(ds.projects()[0] == "alpha");
    CHECK(ds.projects()[1] == "zeta");
    CHECK(ds.offset(1) == 2);
    CHECK(ds.records()[0].mutant_id == "b");
    CHECK(ds.records()[1].mutant_id == "d");
    CHECK(ds.project_index("zeta") == 1);
    CHECK_THROWS_AS(ds.project_index("nope"), UnknownProject);
}

TEST_CASE("strict mode rejects cover > exec with the row number") {
    try {
        parse(kHeader + "p,m1,3,1,1\np,m2,2,5,1\n");
        FAIL("expected InvariantViolation");
    } catch (const InvariantViolation& e) {
        CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    }
    CHECK_THROWS_AS(parse(kHeader + "p,m1,3,0,1\n"), InvariantViolation); // cover = 0 needs exec = 0
}

TEST_CASE("lenient mode keeps and reports violations") {
    LoadReport report;
    const auto ds = parse(kHeader + "p,m1,3,1,1\np,m2,2,5,1\n", true, &report);
    CHECK(ds.size() == 2);
    CHECK(ds.violations() == 1);
    CHECK(report.warnings.size() == 1);
}

TEST_CASE("malformed input") {
    CHECK_THROWS_AS(parse(kHeader), EmptyDataset);
    CHECK_THROWS_AS(parse(""), SchemaError);
    CHECK_THROWS_AS(parse("project,mutant,exec,cover,killed\np,m,1,1,1\n"), SchemaError);
    CHECK_THROWS_AS(parse(kHeader + "p,m1,abc,1,1\n"), ParseError);
    CHECK_THROWS_AS(parse(kHeader + "p,m1,-3,1,1\n"), ParseError);
    CHECK_THROWS_AS(parse(kHeader + "p,m1,3,1,2\n"), ParseError);
    CHECK_THROWS_AS(parse(kHeader + "p,m1,3,1\n"), ParseError);
    CHECK_THROWS_AS(parse(kHeader + "p,m1,99999999999999999999,1,1\n"), ParseError);
}

TEST_CASE("large counts, quoting, CRLF and a byte-order mark are accepted") {
    const auto ds = parse("\xEF\xBB\xBFproject,mutant_id,exec,cover,killed\r\n"
                          "\"open,nlp\",\"m \"\"1\"\"\",2569352493,9835,1\r\n");
    REQUIRE(ds.size() == 1);
    CHECK(ds.records()[0].project == "open,nlp");
    CHECK(ds.records()[0].mutant_id == "m \"1\"");
    CHECK(ds.records()[0].exec == 2569352493LL);
}

TEST_CASE("write_csv round trips") {
    const auto ds = parse(kHeader + "b,m1,4,2,1\na,\"x,y\",0,0,0\n");
    std::ostringstream out;
    write_csv(out, ds);
    const auto back = parse(out.str());
    REQUIRE(back.size() == ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(back.records()[i].project == ds.records()[i].project);
        CHECK(back.records()[i].mutant_id == ds.records()[i].mutant_id);
        CHECK(back.records()[i].exec == ds.records()[i].exec);
        CHECK(back.records()[i].killed == ds.records()[i].killed);
    }
}

TEST_CASE("summarize: mutation score and quartiles") {
    const auto ds = parse(kHeader + "p,a,1,1,1\np,b,2,1,1\np,c,3,1,1\np,d,4,2,1\np,e,5,3,1\n");
    const auto s = summarize(ds);
    REQUIRE(s.size() == 1);
    CHECK(s[0].mutants == 5);
    CHECK(s[0].mutation_score == 1.0);
    CHECK(s[0].exec.median == 3);
    CHECK(s[0].exec.q1 == 2);
    CHECK(s[0].exec.q3 == 4);
    CHECK(s[0].exec.min == 1);
    CHECK(s[0].exec.max == 5);
    CHECK(s[0].exec.skewness == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("skewness matches the direct formula") {
    CHECK(sample_skewness(vec({1, 2, 9})) == doctest::Approx(textbook_skewness({1, 2, 9})).epsilon(1e-12));
    CHECK(textbook_skewness({1, 2, 9}) == doctest::Approx(1.630059).epsilon(1e-6));
    CHECK(std::isnan(sample_skewness(vec({1, 2}))));
    CHECK(std::isnan(sample_skewness(vec({3, 3, 3}))));

    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 20; ++trial) {
        // symmetric sample: mirror every draw around 5
        std::vector<double> sym;
        for (int i = 0; i < 50; ++i) {
            const double d = normal(rng);
            sym.push_back(5 + d);
            sym.push_back(5 - d);
        }
        Eigen::VectorXd v = Eigen::Map<Eigen::VectorXd>(sym.data(), static_cast<Eigen::Index>(sym.size()));
        CHECK(std::abs(sample_skewness(v)) < 1e-12);

        // right-skewed: skewness sign follows mean - median
        std::lognormal_distribution<double> lognormal(0.0, 1.0);
        Eigen::VectorXd r(200);
        for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = lognormal(rng);
        const auto summary = summarize_variable(r);
        CHECK((sample_skewness(r) > 0) == (r.mean() - summary.median > 0));
    }
}

TEST_CASE("summarize is invariant to record order") {
    std::mt19937_64 rng(8);
    std::poisson_distribution<int> counts(6);
    std::vector<std::string> rows;
    for (int i = 0; i < 40; ++i) {
        const int cover = counts(rng);
        const int exec = cover == 0 ? 0 : cover + counts(rng);
        rows.push_back((i % 3 == 0 ? "a" : "b") + std::string(",m") + std::to_string(i) + "," + std::to_string(exec) +
                       "," + std::to_string(cover) + "," + std::to_string(i % 2) + "\n");
    }
    std::string text = kHeader;
    for (const auto& r : rows) text += r;
    const auto s1 = summarize(parse(text));
    std::shuffle(rows.begin(), rows.end(), rng);
    text = kHeader;
    for (const auto& r : rows) text += r;
    const auto s2 = summarize(parse(text));
    REQUIRE(s1.size() == s2.size());
    for (std::size_t p = 0; p < s1.size(); ++p) {
        CHECK(s1[p].mutation_score == s2[p].mutation_score);
        CHECK(s1[p].exec.median == s2[p].exec.median);
        CHECK(s1[p].cover.q3 == s2[p].cover.q3);
        CHECK(s1[p].exec.skewness == doctest::Approx(s2[p].exec.skewness).epsilon(1e-12));
    }
}

TEST_CASE("preprocess: log1p then per-project standardization") {
    const auto ds = parse(kHeader + "p,a,0,0,0\np,b,3,1,1\np,c,20,4,1\np,d,7,2,0\nq,a,1,1,1\nq,b,2,2,0\nq,c,9,3,1\n");
    const auto td = preprocess(ds);
    td.validate();
    REQUIRE(td.project_count() == 2);
    for (std::size_t p = 0; p < 2; ++p) {
        const auto ez = td.exec_z.segment(td.project_begin(p), td.project_size(p));
        const auto cz = td.cover_z.segment(td.project_begin(p), td.project_size(p));
        CHECK(std::abs(ez.mean()) < 1e-10);
        CHECK(std::abs(cz.mean()) < 1e-10);
        const double sd = std::sqrt((ez.array() - ez.mean()).square().sum() / static_cast<double>(ez.size() - 1));
        CHECK(sd == doctest::Approx(1.0).epsilon(1e-12));
    }
    // exec = 0 contributes log1p(0) = 0 before centering
    const auto& tp = td.transforms[0].exec;
    CHECK(td.exec_z(0) == doctest::Approx((0.0 - tp.mean) / tp.sd));
    // round trip back to raw counts
    for (Eigen::Index i = 0; i < td.size(); ++i) {
        const auto p = i < 4 ? 0u : 1u;
        const double raw = static_cast<double>(ds.records()[static_cast<std::size_t>(i)].exec);
        const double back = unstandardize(td.exec_z(i), td.transforms[p].exec);
        CHECK(std::abs(back - raw) <= 1e-9 * std::max(1.0, raw));
    }
}

TEST_CASE("preprocess hand computation: exec 0, 1, 3 gives z = -1, 0, 1") {
    // log1p values 0, ln 2, 2 ln 2: mean ln 2 and sample sd ln 2
    const auto td = preprocess(parse(kHeader + "p,a,0,0,0\np,b,1,1,1\np,c,3,2,1\n"));
    CHECK(td.exec_z(0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(std::abs(td.exec_z(1)) < 1e-14);
    CHECK(td.exec_z(2) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(td.transforms[0].exec.mean == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(td.transforms[0].exec.sd == doctest::Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("preprocess rejects a constant variable") {
    CHECK_THROWS_AS(preprocess(parse(kHeader + "p,a,3,1,0\np,b,3,2,1\n")), DegenerateVariance);
    CHECK_THROWS_AS(preprocess(parse(kHeader + "p,a,3,1,0\np,b,4,1,1\n")), DegenerateVariance);
}

TEST_CASE("model-scale CSV round trip") {
    const auto td = preprocess(parse(kHeader + "p,a,0,0,0\np,b,3,1,1\np,c,20,4,1\n"));
    std::ostringstream out;
    write_transformed_csv(out, td);
    std::istringstream in(out.str());
    const auto back = read_transformed_csv(in);
    CHECK(back.projects == td.projects);
    CHECK(back.exec_z == td.exec_z);
    CHECK(back.cover_z == td.cover_z);
    CHECK(back.killed == td.killed);
    CHECK(back.mutant_ids == td.mutant_ids);
}
