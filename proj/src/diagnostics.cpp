#include "mutcausal/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "mutcausal/errors.hpp"
#include "mutcausal/math.hpp"

namespace mutcausal {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_draws(const std::vector<Eigen::VectorXd>& chains, std::size_t min_chains) {
    if (chains.size() < min_chains)
        throw InsufficientDraws(fmt::format("need at least {} chains, got {}", min_chains, chains.size()));
    for (const auto& c : chains) {
        if (c.size() < 4) throw InsufficientDraws("need at least 4 draws per chain");
        if (c.size() != chains.front().size()) throw InsufficientDraws("chains have different lengths");
    }
}

bool all_constant(const std::vector<Eigen::VectorXd>& chains) {
    for (const auto& c : chains)
        if ((c.array() != c(0)).any()) return false;
    return true;
}

} // namespace

Diagnostic split_r_hat(const std::vector<Eigen::VectorXd>& chains) {
    require_draws(chains, 2);
    const Eigen::Index half = chains.front().size() / 2;
    std::vector<Eigen::VectorXd> split;
    for (const auto& c : chains) {
        split.push_back(c.head(half));
        split.push_back(c.tail(half)); // drops the middle draw of odd-length chains
    }
    if (all_constant(split)) return {kNaN, true};

    const auto m = static_cast<Eigen::Index>(split.size());
    Eigen::VectorXd means(m), variances(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        means(j) = split[static_cast<std::size_t>(j)].mean();
        variances(j) = sample_variance(split[static_cast<std::size_t>(j)]);
    }
    const double w = variances.mean();
    if (!(w > 0)) return {std::numeric_limits<double>::infinity(), true}; // constant halves that differ
    const double between_over_n = sample_variance(means);
    const double len = static_cast<double>(half);
    const double var_plus = (len - 1) / len * w + between_over_n;
    return {std::sqrt(var_plus / w), false};
}

Diagnostic effective_sample_size(const std::vector<Eigen::VectorXd>& chains) {
    require_draws(chains, 1);
    if (all_constant(chains)) return {kNaN, true};

    const auto m = chains.size();
    const Eigen::Index n = chains.front().size();
    const double dn = static_cast<double>(n);
    std::vector<Eigen::VectorXd> centered;
    Eigen::VectorXd means(static_cast<Eigen::Index>(m));
    for (std::size_t c = 0; c < m; ++c) {
        means(static_cast<Eigen::Index>(c)) = chains[c].mean();
        centered.push_back(chains[c].array() - chains[c].mean());
    }
    // Mean over chains of the biased lag-t autocovariance.
    auto mean_acov = [&](Eigen::Index t) {
        double sum = 0;
        for (const auto& c : centered) sum += c.head(n - t).dot(c.tail(n - t)) / dn;
        return sum / static_cast<double>(m);
    };

    const double acov0 = mean_acov(0);
    const double w = acov0 * dn / (dn - 1);
    const double between_over_n = m > 1 ? sample_variance(means) : 0.0;
    const double var_plus = w * (dn - 1) / dn + between_over_n;
    if (!(var_plus > 0)) return {kNaN, true};
    auto rho = [&](Eigen::Index t) { return 1.0 - (w - mean_acov(t)) / var_plus; };

    // Geyer initial positive sequence over pairs (rho_2k + rho_2k+1), made
    // monotone non-increasing.
    double tau_sum = 0;
    double previous_pair = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t + 1 < n; t += 2) {
        double pair = (t == 0 ? 1.0 : rho(t)) + rho(t + 1);
        if (pair < 0) break;
        pair = std::min(pair, previous_pair);
        previous_pair = pair;
        tau_sum += pair;
    }
    const double tau = -1.0 + 2.0 * tau_sum;
    const double total = dn * static_cast<double>(m);
    const double cap = total * std::log10(total);
    if (!(tau > total / cap)) return {cap, true};
    return {total / tau, false};
}

} // namespace mutcausal
