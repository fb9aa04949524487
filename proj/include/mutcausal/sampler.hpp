#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "mutcausal/dataset.hpp"
#include "mutcausal/diagnostics.hpp"
#include "mutcausal/hmc.hpp"
#include "mutcausal/model.hpp"

namespace mutcausal {

// Defaults retain 4 chains x 1000 = 4000 draws after 1000 warmup iterations.
struct ChainConfig {
    int warmup = 1000;
    int samples = 1000;
    int chains = 4;
    double target_accept = 0.8;
    double integration_time = 3.0;
    double jitter = 0.4;
    int max_steps = 1024;
    bool dense_metric = true;
    std::uint64_t seed = 20210901;
    bool parallel = true; // run chains on separate threads; results are identical either way

    void validate() const; // throws ConfigError
    HmcSettings hmc_settings() const;
};

// Seed of chain c: splitmix64(splitmix64(master) + c).
std::uint64_t chain_seed(std::uint64_t master, int chain);

struct ParameterInfo {
    std::string name;    // "beta[nodebox]"
    std::string family;  // "beta"
    std::string project; // empty for shared families
    bool positive = false;
};

struct ChainStats {
    double step_size = 0;
    double mean_accept = 0;
    double mean_steps = 0;
    int divergences = 0;
};

struct ParameterDiagnostics {
    Diagnostic r_hat;
    Diagnostic ess;
};

// Retained draws on the constrained scale: one (iterations x parameters)
// matrix per chain, in chain order.
struct PosteriorSamples {
    std::string model_id;
    std::vector<std::string> projects;
    std::vector<ParameterInfo> parameters;
    std::vector<Eigen::MatrixXd> chains;
    std::vector<ChainStats> stats;
    std::vector<ParameterDiagnostics> diagnostics;

    std::size_t chain_count() const { return chains.size(); }
    Eigen::Index iterations() const { return chains.empty() ? 0 : chains.front().rows(); }
    Eigen::Index total_draws() const { return iterations() * static_cast<Eigen::Index>(chains.size()); }

    Eigen::Index column(std::string_view name) const; // throws UnknownFamily
    Eigen::Index column(std::string_view family, std::string_view project) const;
    bool has_family(std::string_view family) const;

    // All chains concatenated in chain order.
    Eigen::VectorXd pooled(Eigen::Index column) const;
    std::vector<Eigen::VectorXd> per_chain(Eigen::Index column) const;

    // Fills `diagnostics` for every parameter.
    void compute_diagnostics();
};

// Builds a PosteriorSamples shell (names, positivity) for a spec.
PosteriorSamples make_samples_shell(const ModelSpec& spec, const std::vector<std::string>& projects);

PosteriorSamples run_chains(const ModelSpec& spec, const TransformedDataset& data, const ChainConfig& cfg);

Diagnostic r_hat(const PosteriorSamples& samples, std::string_view param);
Diagnostic ess(const PosteriorSamples& samples, std::string_view param);

} // namespace mutcausal
