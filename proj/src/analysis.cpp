#include "mutcausal/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "mutcausal/errors.hpp"
#include "mutcausal/math.hpp"

namespace mutcausal {

CoefficientSummary summarize_draws(std::string project, const Eigen::VectorXd& draws) {
    if (draws.size() == 0) throw InsufficientDraws("no draws to summarize");
    Eigen::VectorXd sorted = draws;
    std::sort(sorted.data(), sorted.data() + sorted.size());
    return {std::move(project), draws.mean(), std::sqrt(sample_variance(draws)), quantile_sorted(sorted, 0.025),
            quantile_sorted(sorted, 0.975)};
}

std::vector<CoefficientSummary> summarize_coefficients(const PosteriorSamples& samples, std::string_view family) {
    if (!samples.has_family(family))
        throw UnknownFamily(fmt::format("no family '{}' in model '{}'", family, samples.model_id));
    std::vector<CoefficientSummary> out;
    for (std::size_t j = 0; j < samples.parameters.size(); ++j) {
        const auto& p = samples.parameters[j];
        if (p.family != family) continue;
        out.push_back(summarize_draws(p.project, samples.pooled(static_cast<Eigen::Index>(j))));
    }
    return out;
}

std::vector<CoefficientSummary> coefficient_difference(const PosteriorSamples& a, std::string_view family_a,
                                                       const PosteriorSamples& b, std::string_view family_b) {
    if (a.chain_count() != b.chain_count() || a.iterations() != b.iterations()) {
        throw ShapeMismatch(fmt::format("cannot pair draws: {}x{} vs {}x{} (chains x iterations)", a.chain_count(),
                                        a.iterations(), b.chain_count(), b.iterations()));
    }
    if (!a.has_family(family_a)) throw UnknownFamily(fmt::format("no family '{}' in model '{}'", family_a, a.model_id));
    if (!b.has_family(family_b)) throw UnknownFamily(fmt::format("no family '{}' in model '{}'", family_b, b.model_id));
    if (a.projects != b.projects) throw ShapeMismatch("the two fits cover different projects");
    std::vector<CoefficientSummary> out;
    for (const auto& project : a.projects) {
        const Eigen::VectorXd diff = a.pooled(a.column(family_a, project)) - b.pooled(b.column(family_b, project));
        out.push_back(summarize_draws(project, diff));
    }
    return out;
}

std::vector<CoefficientSummary> coefficient_difference(const PosteriorSamples& a, const PosteriorSamples& b,
                                                       std::string_view family) {
    return coefficient_difference(a, family, b, family);
}

double shifted_probability(double base_prob, double logit_delta) {
    if (!(base_prob > 0 && base_prob < 1)) throw DomainError("base probability must lie in (0, 1)");
    if (!std::isfinite(logit_delta)) throw DomainError("logit shift must be finite");
    if (logit_delta == 0) return base_prob;
    return inv_logit(logit(base_prob) + logit_delta);
}

IntervalSummary summarize_interval(const Eigen::VectorXd& values, double level) {
    if (values.size() == 0) throw InsufficientDraws("no values to summarize");
    if (!(level > 0 && level < 1)) throw DomainError("interval level must lie in (0, 1)");
    Eigen::VectorXd sorted = values;
    std::sort(sorted.data(), sorted.data() + sorted.size());
    const double tail = (1 - level) / 2;
    return {values.mean(), quantile_sorted(sorted, 0.5), quantile_sorted(sorted, tail),
            quantile_sorted(sorted, 1 - tail)};
}

PriorPredictive prior_predictive_mutation_score(const ModelSpec& spec, const TransformedDataset& data,
                                                std::size_t n_sims, std::uint64_t seed, std::size_t bins) {
    if (n_sims == 0) throw DomainError("need at least one simulation");
    if (bins == 0) throw DomainError("need at least one histogram bin");
    check_shape(spec, data);
    PriorPredictive out;
    out.scores.resize(static_cast<Eigen::Index>(n_sims));
    std::mt19937_64 seeder(seed);
    for (std::size_t s = 0; s < n_sims; ++s) {
        const Eigen::VectorXd x = constrain(spec, prior_sample(spec, seeder()));
        const Eigen::VectorXd eta = outcome_linear_predictor(spec, x, data);
        out.scores(static_cast<Eigen::Index>(s)) = inv_logit(eta.array()).mean();
    }
    out.histogram.counts.assign(bins, 0);
    for (std::size_t k = 0; k <= bins; ++k) out.histogram.edges.push_back(static_cast<double>(k) / static_cast<double>(bins));
    for (Eigen::Index s = 0; s < out.scores.size(); ++s) {
        const auto k = std::min<std::size_t>(bins - 1, static_cast<std::size_t>(out.scores(s) * static_cast<double>(bins)));
        ++out.histogram.counts[k];
    }
    return out;
}

namespace {

void check_samples(const ModelSpec& spec, const PosteriorSamples& samples, const TransformedDataset& data) {
    check_shape(spec, data);
    if (static_cast<Eigen::Index>(samples.parameters.size()) != spec.dimension() || samples.projects != data.projects) {
        throw ShapeMismatch(fmt::format("samples of model '{}' do not match model '{}' on this dataset",
                                        samples.model_id, spec.id()));
    }
    if (samples.total_draws() == 0) throw InsufficientDraws("no posterior draws");
}

// Calls f(draw_index, kill probabilities) for every retained draw.
template <typename F>
void for_each_draw_probabilities(const ModelSpec& spec, const PosteriorSamples& samples,
                                 const TransformedDataset& data, F&& f) {
    Eigen::Index k = 0;
    for (const auto& chain : samples.chains) {
        for (Eigen::Index i = 0; i < chain.rows(); ++i, ++k) {
            const Eigen::VectorXd x = chain.row(i).transpose();
            const Eigen::ArrayXd theta = inv_logit(outcome_linear_predictor(spec, x, data).array());
            f(k, theta);
        }
    }
}

} // namespace

std::vector<PredictiveCheckRow> posterior_predictive_check(const ModelSpec& spec, const PosteriorSamples& samples,
                                                           const TransformedDataset& data, double level) {
    check_samples(spec, samples, data);
    const auto projects = data.project_count();
    Eigen::MatrixXd project_means(samples.total_draws(), static_cast<Eigen::Index>(projects));
    for_each_draw_probabilities(spec, samples, data, [&](Eigen::Index k, const Eigen::ArrayXd& theta) {
        for (std::size_t p = 0; p < projects; ++p)
            project_means(k, static_cast<Eigen::Index>(p)) = theta.segment(data.project_begin(p), data.project_size(p)).mean();
    });
    std::vector<PredictiveCheckRow> out;
    for (std::size_t p = 0; p < projects; ++p) {
        const double observed = data.killed.segment(data.project_begin(p), data.project_size(p)).mean();
        out.push_back({data.projects[p], summarize_interval(project_means.col(static_cast<Eigen::Index>(p)), level),
                       observed});
    }
    return out;
}

double r_squared_from_probabilities(const Eigen::ArrayXd& theta) {
    const double explained = sample_variance(theta.matrix());
    const double residual = (theta * (1 - theta)).mean();
    const double total = explained + residual;
    return total > 0 ? explained / total : 0.0;
}

RSquared bayesian_r_squared(const ModelSpec& spec, const PosteriorSamples& samples, const TransformedDataset& data,
                            double level) {
    check_samples(spec, samples, data);
    RSquared out;
    out.draws.resize(samples.total_draws());
    for_each_draw_probabilities(spec, samples, data, [&](Eigen::Index k, const Eigen::ArrayXd& theta) {
        out.draws(k) = r_squared_from_probabilities(theta);
    });
    out.summary = summarize_interval(out.draws, level);
    return out;
}

Eigen::VectorXd default_counterfactual_grid() { return Eigen::VectorXd::LinSpaced(41, -2.0, 2.0); }

namespace {

std::vector<IntervalSummary> exec_curve(const PosteriorSamples& fit, const std::string& project,
                                        const Eigen::VectorXd& grid, double cover_fixed, double level,
                                        bool with_cover) {
    if (grid.size() == 0) throw DomainError("counterfactual grid is empty");
    Eigen::ArrayXd base = fit.pooled(fit.column("alpha", project)).array();
    if (with_cover) base += cover_fixed * fit.pooled(fit.column("gamma", project)).array();
    const Eigen::ArrayXd beta = fit.pooled(fit.column("beta", project)).array();
    std::vector<IntervalSummary> out;
    for (Eigen::Index g = 0; g < grid.size(); ++g) {
        const Eigen::ArrayXd theta = inv_logit((base + beta * grid(g)).eval());
        out.push_back(summarize_interval(theta.matrix(), level));
    }
    return out;
}

} // namespace

CounterfactualCurve counterfactual_exec_curve(const PosteriorSamples& adjusted, const std::string& project,
                                              const Eigen::VectorXd& grid, double cover_fixed, double level) {
    return {project, grid, exec_curve(adjusted, project, grid, cover_fixed, level, true), {}};
}

CounterfactualCurve counterfactual_exec_curve(const PosteriorSamples& adjusted, const PosteriorSamples& unadjusted,
                                              const std::string& project, const Eigen::VectorXd& grid,
                                              double cover_fixed, double level) {
    auto curve = counterfactual_exec_curve(adjusted, project, grid, cover_fixed, level);
    curve.noncausal = exec_curve(unadjusted, project, grid, 0.0, level, false);
    return curve;
}

CounterfactualCurve intervene_on_cover(const PosteriorSamples& joint, const std::string& project,
                                       const Eigen::VectorXd& cover_grid, std::uint64_t seed, double level) {
    if (cover_grid.size() == 0) throw DomainError("counterfactual grid is empty");
    const Eigen::VectorXd alpha = joint.pooled(joint.column("alpha", project));
    const Eigen::VectorXd beta = joint.pooled(joint.column("beta", project));
    const Eigen::VectorXd gamma = joint.pooled(joint.column("gamma", project));
    const Eigen::VectorXd nu = joint.pooled(joint.column("nu", project));
    const Eigen::VectorXd lambda = joint.pooled(joint.column("lambda", project));
    const Eigen::VectorXd sigma = joint.pooled(joint.column("sigma", project));

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    CounterfactualCurve curve{project, cover_grid, {}, {}};
    Eigen::VectorXd theta(alpha.size());
    for (Eigen::Index g = 0; g < cover_grid.size(); ++g) {
        const double c = cover_grid(g);
        for (Eigen::Index k = 0; k < alpha.size(); ++k) {
            const double exec = nu(k) + lambda(k) * c + sigma(k) * normal(rng);
            theta(k) = inv_logit(alpha(k) + beta(k) * exec + gamma(k) * c);
        }
        curve.causal.push_back(summarize_interval(theta, level));
    }
    return curve;
}

} // namespace mutcausal
