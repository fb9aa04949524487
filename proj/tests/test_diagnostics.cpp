#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mutcausal/diagnostics.hpp"
#include "mutcausal/errors.hpp"

using namespace mutcausal;

namespace {

std::vector<Eigen::VectorXd> ar1_chains(int m, int n, double phi, std::uint64_t seed, double shift = 0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<Eigen::VectorXd> out;
    const double innovation_sd = std::sqrt(1 - phi * phi);
    for (int c = 0; c < m; ++c) {
        Eigen::VectorXd x(n);
        double prev = normal(rng);
        for (int t = 0; t < n; ++t) {
            prev = phi * prev + innovation_sd * normal(rng);
            x(t) = prev + (c == 0 ? shift : 0);
        }
        out.push_back(x);
    }
    return out;
}

// Split R-hat written out with plain loops.
double split_r_hat_oracle(const std::vector<Eigen::VectorXd>& chains) {
    std::vector<std::vector<double>> halves;
    for (const auto& c : chains) {
        const auto half = c.size() / 2;
        std::vector<double> first, second;
        for (Eigen::Index i = 0; i < half; ++i) first.push_back(c(i));
        for (Eigen::Index i = c.size() - half; i < c.size(); ++i) second.push_back(c(i));
        halves.push_back(first);
        halves.push_back(second);
    }
    const double m = static_cast<double>(halves.size());
    const double n = static_cast<double>(halves[0].size());
    std::vector<double> means, vars;
    for (const auto& h : halves) {
        double s = 0;
        for (double v : h) s += v;
        const double mean = s / n;
        double ss = 0;
        for (double v : h) ss += (v - mean) * (v - mean);
        means.push_back(mean);
        vars.push_back(ss / (n - 1));
    }
    double grand = 0;
    for (double v : means) grand += v;
    grand /= m;
    double b = 0;
    for (double v : means) b += (v - grand) * (v - grand);
    b *= n / (m - 1);
    double w = 0;
    for (double v : vars) w += v;
    w /= m;
    return std::sqrt(((n - 1) / n * w + b / n) / w);
}

} // namespace

TEST_CASE("split R-hat matches the direct formula") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto chains = ar1_chains(3, 101 + static_cast<int>(seed), 0.3, seed, seed % 2 ? 0.4 : 0.0);
        CHECK(split_r_hat(chains).value == doctest::Approx(split_r_hat_oracle(chains)).epsilon(1e-12));
    }
}

TEST_CASE("split R-hat: well-mixed near 1, shifted chain flagged large") {
    const auto good = ar1_chains(4, 2000, 0.2, 1);
    const auto r = split_r_hat(good);
    CHECK_FALSE(r.flagged);
    CHECK(r.value < 1.01);
    CHECK(split_r_hat(ar1_chains(4, 2000, 0.2, 1, 1.0)).value > 1.1);

    // a within-chain trend is caught by splitting
    std::vector<Eigen::VectorXd> trend;
    for (int c = 0; c < 2; ++c) trend.push_back(Eigen::VectorXd::LinSpaced(200, 0, 10));
    CHECK(split_r_hat(trend).value > 1.5);
}

TEST_CASE("ESS of an AR(1) chain matches (1 - phi) / (1 + phi)") {
    for (double phi : {0.0, 0.5, 0.8}) {
        const int m = 4, n = 20000;
        const auto chains = ar1_chains(m, n, phi, 7);
        const auto e = effective_sample_size(chains);
        const double expected = m * n * (1 - phi) / (1 + phi);
        CHECK_FALSE(e.flagged);
        CHECK(e.value == doctest::Approx(expected).epsilon(0.1));
    }
}

TEST_CASE("anti-correlated draws are super-efficient") {
    const auto chains = ar1_chains(4, 5000, -0.5, 3);
    const auto e = effective_sample_size(chains);
    CHECK(e.value > 4 * 5000);
    CHECK(e.value == doctest::Approx(3.0 * 4 * 5000).epsilon(0.15));

    std::vector<Eigen::VectorXd> alternating;
    for (int c = 0; c < 2; ++c) {
        Eigen::VectorXd x(1000);
        for (Eigen::Index t = 0; t < x.size(); ++t) x(t) = t % 2 ? 1.0 : -1.0;
        alternating.push_back(x);
    }
    const auto capped = effective_sample_size(alternating);
    CHECK(capped.flagged);
    CHECK(capped.value == doctest::Approx(2000 * std::log10(2000.0)));
}

TEST_CASE("constant draws give NaN with the flag set") {
    std::vector<Eigen::VectorXd> chains(3, Eigen::VectorXd::Constant(50, 2.5));
    const auto r = split_r_hat(chains);
    const auto e = effective_sample_size(chains);
    CHECK(std::isnan(r.value));
    CHECK(r.flagged);
    CHECK(std::isnan(e.value));
    CHECK(e.flagged);
}

TEST_CASE("insufficient draws") {
    CHECK_THROWS_AS(split_r_hat({Eigen::VectorXd::Zero(100)}), InsufficientDraws);
    CHECK_THROWS_AS(split_r_hat({Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)}), InsufficientDraws);
    CHECK_THROWS_AS(effective_sample_size({}), InsufficientDraws);
    CHECK_THROWS_AS(effective_sample_size({Eigen::VectorXd::Zero(10), Eigen::VectorXd::Zero(11)}), InsufficientDraws);
}

TEST_CASE("diagnostics are invariant to affine rescaling") {
    const auto chains = ar1_chains(4, 500, 0.6, 9);
    std::vector<Eigen::VectorXd> scaled;
    for (const auto& c : chains) scaled.push_back((3.0 * c.array() - 7.0).matrix());
    CHECK(split_r_hat(scaled).value == doctest::Approx(split_r_hat(chains).value).epsilon(1e-10));
    CHECK(effective_sample_size(scaled).value == doctest::Approx(effective_sample_size(chains).value).epsilon(1e-10));
}
