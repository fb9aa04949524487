#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mutcausal/dataset.hpp"

namespace mutcausal {

// Ground-truth coefficients of one project. The outcome mechanism is
// killed ~ Bernoulli(inverse_logit(alpha + beta exec_z + gamma cover_z)) and
// the mediator is exec_z = nu + lambda cover_z + Normal(0, sigma).
struct ProjectTruth {
    std::string name;
    double alpha = 0;
    double beta = 0;
    double gamma = 0;
    double nu = 0;
    double lambda = 0;
    double sigma = 1;

    // Population slope of logit P(killed) against cover_z, both paths.
    double total_cover_effect() const { return gamma + lambda * beta; }
};

enum class CoverLaw { StandardNormal, NegativeBinomial };

struct ScmConfig {
    std::vector<ProjectTruth> projects;
    std::size_t mutants_per_project = 2000;
    CoverLaw law = CoverLaw::StandardNormal;
    // Negative-binomial cover counts (raw generator only).
    double cover_mean = 8.0;
    double cover_dispersion = 1.5; // variance = mean + mean^2 / dispersion
    std::uint64_t seed = 1;

    void validate() const; // throws ConfigError
};

// Draws on the model scale. The truth vector is returned in project index
// order (lexicographic by name).
std::pair<TransformedDataset, std::vector<ProjectTruth>> generate_transformed(const ScmConfig& cfg);

// Integer counts. cover follows the negative-binomial law; every covering
// test runs the mutant at least once, so exec = cover + Poisson(
// exp(nu + sigma e) cover^lambda) and exec = 0 whenever cover = 0. The kill
// probability uses the same log1p + per-project standardization that
// preprocess() applies.
Dataset generate_raw(const ScmConfig& cfg);

// Uniform ranges used to draw a truth per project.
struct TruthRanges {
    double alpha_lo = -1.0, alpha_hi = 1.5;
    double beta_lo = 0.3, beta_hi = 0.6;
    double gamma_lo = 0.8, gamma_hi = 1.4;
    double nu_lo = -0.3, nu_hi = 0.3;
    double lambda_lo = 0.6, lambda_hi = 0.9;
    double sigma_lo = 0.3, sigma_hi = 0.6;
};

std::vector<ProjectTruth> sample_truth(const std::vector<std::string>& names, std::uint64_t seed,
                                       const TruthRanges& ranges = {});

} // namespace mutcausal
