#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "mutcausal/dataset.hpp"
#include "mutcausal/model.hpp"
#include "mutcausal/sampler.hpp"

namespace mutcausal {

// Posterior summary of one coefficient on the logit scale. `se` is the
// standard deviation of the draws.
struct CoefficientSummary {
    std::string project;
    double mean = 0;
    double se = 0;
    double q025 = 0;
    double q975 = 0;
};

CoefficientSummary summarize_draws(std::string project, const Eigen::VectorXd& draws);

// One row per project of a family, in project order.
std::vector<CoefficientSummary> summarize_coefficients(const PosteriorSamples& samples, std::string_view family);

// Draw-wise a - b per project, draws paired by (chain, iteration). The second
// overload compares different families (e.g. a Cover slope against an Exec
// slope).
std::vector<CoefficientSummary> coefficient_difference(const PosteriorSamples& a, const PosteriorSamples& b,
                                                       std::string_view family);
std::vector<CoefficientSummary> coefficient_difference(const PosteriorSamples& a, std::string_view family_a,
                                                       const PosteriorSamples& b, std::string_view family_b);

// Multiplicative change in the odds per unit of a logit-scale coefficient.
inline double odds_factor(double logit_coef) { return std::exp(logit_coef); }

// inverse_logit(logit(base_prob) + logit_delta); base_prob in (0, 1).
double shifted_probability(double base_prob, double logit_delta);

struct Histogram {
    std::vector<double> edges; // bins + 1 edges over [0, 1]
    std::vector<std::size_t> counts;
};

struct PriorPredictive {
    Eigen::VectorXd scores; // simulated mutation score per prior draw
    Histogram histogram;
};

// Mean kill probability over the observed covariates for each prior draw.
PriorPredictive prior_predictive_mutation_score(const ModelSpec& spec, const TransformedDataset& data,
                                                std::size_t n_sims, std::uint64_t seed, std::size_t bins = 20);

struct IntervalSummary {
    double mean = 0;
    double median = 0;
    double lower = 0;
    double upper = 0;
};

IntervalSummary summarize_interval(const Eigen::VectorXd& values, double level = 0.95);

struct PredictiveCheckRow {
    std::string project;
    IntervalSummary predicted; // posterior of the mean kill probability
    double observed = 0;       // observed mutation score

    bool covers_observed() const { return observed >= predicted.lower && observed <= predicted.upper; }
};

std::vector<PredictiveCheckRow> posterior_predictive_check(const ModelSpec& spec, const PosteriorSamples& samples,
                                                           const TransformedDataset& data, double level = 0.95);

// var(theta) / (var(theta) + mean(theta (1 - theta))) over records.
double r_squared_from_probabilities(const Eigen::ArrayXd& theta);

struct RSquared {
    Eigen::VectorXd draws;
    IntervalSummary summary;
};

RSquared bayesian_r_squared(const ModelSpec& spec, const PosteriorSamples& samples, const TransformedDataset& data,
                            double level = 0.95);

struct CounterfactualCurve {
    std::string project;
    Eigen::VectorXd grid;
    std::vector<IntervalSummary> causal;
    std::vector<IntervalSummary> noncausal; // empty when no companion curve was computed
};

// 41 points over [-2, 2] standardized units.
Eigen::VectorXd default_counterfactual_grid();

// Kill probability as exec_z is set to each grid value with cover_z held at
// `cover_fixed`, from the adjusted fit; the companion curve uses the
// unadjusted (Exec-only) fit.
CounterfactualCurve counterfactual_exec_curve(const PosteriorSamples& adjusted, const PosteriorSamples& unadjusted,
                                              const std::string& project, const Eigen::VectorXd& grid,
                                              double cover_fixed = 0.0, double level = 0.95);
// Causal curve only.
CounterfactualCurve counterfactual_exec_curve(const PosteriorSamples& adjusted, const std::string& project,
                                              const Eigen::VectorXd& grid, double cover_fixed = 0.0,
                                              double level = 0.95);

// Total effect of setting cover_z: exec_z is drawn from the fitted Exec
// submodel at each grid value and both paths feed the kill probability.
CounterfactualCurve intervene_on_cover(const PosteriorSamples& joint, const std::string& project,
                                       const Eigen::VectorXd& cover_grid, std::uint64_t seed, double level = 0.95);

} // namespace mutcausal
