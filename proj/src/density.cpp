#include "mutcausal/density.hpp"

#include <cmath>

#include "mutcausal/errors.hpp"
#include "mutcausal/math.hpp"

namespace mutcausal {

PosteriorDensity::PosteriorDensity(const ModelSpec& spec, const TransformedDataset& data)
    : spec_(spec), data_(data) {
    check_shape(spec_, data_);
    outcome_intercept_ = spec_.family_index(spec_.find(Submodel::Outcome, Term::Intercept)->name);
    for (std::size_t f = 0; f < spec_.families().size(); ++f) {
        const auto& fam = spec_.families()[f];
        if (fam.submodel == Submodel::Outcome && fam.term != Term::Intercept) {
            outcome_slopes_.push_back(f);
            slope_covariates_.push_back(fam.term == Term::Exec ? &data_.exec_z : &data_.cover_z);
        }
        if (fam.submodel == Submodel::Exec) {
            if (fam.term == Term::Intercept) exec_intercept_ = static_cast<int>(f);
            if (fam.term == Term::Cover) exec_slope_ = static_cast<int>(f);
            if (fam.term == Term::Scale) exec_scale_ = static_cast<int>(f);
        }
    }
    if (exec_intercept_ >= 0) {
        for (std::size_t p = 0; p < data_.project_count(); ++p) {
            const auto e = data_.exec_z.segment(data_.project_begin(p), data_.project_size(p)).array();
            const auto c = data_.cover_z.segment(data_.project_begin(p), data_.project_size(p)).array();
            moments_.push_back({static_cast<double>(data_.project_size(p)), c.sum(), c.square().sum(), e.sum(),
                                (e * c).sum(), e.square().sum()});
        }
    }
}

PosteriorDensity::Workspace PosteriorDensity::make_workspace() const {
    Eigen::Index largest = 0;
    for (std::size_t p = 0; p < data_.project_count(); ++p) largest = std::max(largest, data_.project_size(p));
    return {Eigen::ArrayXd(largest), Eigen::ArrayXd(largest)};
}

template <bool WithGradient>
double PosteriorDensity::evaluate(const Eigen::VectorXd& u, Eigen::VectorXd* grad, Workspace& ws) const {
    check_shape(spec_, u);
    double total = log_prior(spec_, u);
    if constexpr (WithGradient) *grad = grad_log_prior(spec_, u);

    // Constrained coefficient and its derivative with respect to u.
    auto coef = [&](std::size_t family, std::size_t project) {
        const auto slot = spec_.slot(family, project);
        return spec_.positive(slot) ? std::exp(u(slot)) : u(slot);
    };

    for (std::size_t p = 0; p < data_.project_count(); ++p) {
        const auto begin = data_.project_begin(p);
        const auto n = data_.project_size(p);
        if (n == 0) continue;
        auto eta = ws.eta.head(n);
        eta.setConstant(coef(outcome_intercept_, p));
        for (std::size_t s = 0; s < outcome_slopes_.size(); ++s)
            eta += coef(outcome_slopes_[s], p) * slope_covariates_[s]->segment(begin, n).array();
        const auto y = data_.killed.segment(begin, n).array();
        // t = exp(-|eta|) serves both log(1 + exp(eta)) and inverse_logit(eta).
        auto t = ws.resid.head(n);
        t = (-eta.abs()).exp();
        total += (y * eta - eta.max(0.0) - (1.0 + t).log()).sum();

        if constexpr (WithGradient) {
            // t becomes the residual y - inverse_logit(eta), in place
            t = y - (eta >= 0.0).select(1.0, t) / (1.0 + t);
            const auto& resid = t;
            (*grad)(spec_.slot(outcome_intercept_, p)) += resid.sum();
            for (std::size_t s = 0; s < outcome_slopes_.size(); ++s) {
                const auto f = outcome_slopes_[s];
                const auto slot = spec_.slot(f, p);
                const double chain = spec_.positive(slot) ? std::exp(u(slot)) : 1.0;
                (*grad)(slot) += chain * (resid * slope_covariates_[s]->segment(begin, n).array()).sum();
            }
        }
    }

    if (exec_intercept_ < 0) return total;

    for (std::size_t p = 0; p < data_.project_count(); ++p) {
        const auto& m = moments_[p];
        const double nu = coef(static_cast<std::size_t>(exec_intercept_), p);
        const double lambda = exec_slope_ >= 0 ? coef(static_cast<std::size_t>(exec_slope_), p) : 0.0;
        const double sigma = coef(static_cast<std::size_t>(exec_scale_), p);
        // residual r = e - nu - lambda c, expanded over the moments
        const double sum_r = m.sum_e - m.n * nu - lambda * m.sum_c;
        const double sum_rc = m.sum_ec - nu * m.sum_c - lambda * m.sum_cc;
        const double sum_rr = m.sum_ee - 2 * nu * m.sum_e - 2 * lambda * m.sum_ec + m.n * nu * nu +
                              2 * nu * lambda * m.sum_c + lambda * lambda * m.sum_cc;
        const double inv_var = 1.0 / (sigma * sigma);
        total += -m.n * (kLogSqrt2Pi + std::log(sigma)) - 0.5 * sum_rr * inv_var;

        if constexpr (WithGradient) {
            (*grad)(spec_.slot(static_cast<std::size_t>(exec_intercept_), p)) += sum_r * inv_var;
            if (exec_slope_ >= 0) {
                const auto slot = spec_.slot(static_cast<std::size_t>(exec_slope_), p);
                const double chain = spec_.positive(slot) ? lambda : 1.0;
                (*grad)(slot) += chain * sum_rc * inv_var;
            }
            // derivative with respect to log sigma
            (*grad)(spec_.slot(static_cast<std::size_t>(exec_scale_), p)) += -m.n + sum_rr * inv_var;
        }
    }
    return total;
}

double PosteriorDensity::value_and_gradient(const Eigen::VectorXd& u, Eigen::VectorXd& grad, Workspace& ws) const {
    return evaluate<true>(u, &grad, ws);
}

double PosteriorDensity::value(const Eigen::VectorXd& u, Workspace& ws) const {
    return evaluate<false>(u, nullptr, ws);
}

Eigen::VectorXd grad_log_posterior(const ModelSpec& spec, const Eigen::VectorXd& unconstrained,
                                   const TransformedDataset& data) {
    const PosteriorDensity density(spec, data);
    auto ws = density.make_workspace();
    Eigen::VectorXd grad;
    density.value_and_gradient(unconstrained, grad, ws);
    return grad;
}

} // namespace mutcausal
