#pragma once

#include <vector>

#include <Eigen/Core>

#include "mutcausal/dataset.hpp"
#include "mutcausal/model.hpp"

namespace mutcausal {

// Log posterior of a ModelSpec bound to a dataset, on the unconstrained
// scale. Immutable and shareable across chains; the scratch buffer lives in
// a per-caller Workspace.
class PosteriorDensity {
public:
    struct Workspace {
        Eigen::ArrayXd eta;
        Eigen::ArrayXd resid;
    };

    PosteriorDensity(const ModelSpec& spec, const TransformedDataset& data);

    const ModelSpec& spec() const { return spec_; }
    const TransformedDataset& data() const { return data_; }
    Eigen::Index dimension() const { return spec_.dimension(); }

    Workspace make_workspace() const;

    // Returns the log density and overwrites `grad`.
    double value_and_gradient(const Eigen::VectorXd& u, Eigen::VectorXd& grad, Workspace& ws) const;
    double value(const Eigen::VectorXd& u, Workspace& ws) const;

private:
    // Exec-submodel sufficient statistics for one project.
    struct ExecMoments {
        double n = 0, sum_c = 0, sum_cc = 0, sum_e = 0, sum_ec = 0, sum_ee = 0;
    };

    template <bool WithGradient>
    double evaluate(const Eigen::VectorXd& u, Eigen::VectorXd* grad, Workspace& ws) const;

    ModelSpec spec_;
    const TransformedDataset& data_;
    std::size_t outcome_intercept_;
    std::vector<std::size_t> outcome_slopes_;
    std::vector<const Eigen::VectorXd*> slope_covariates_;
    int exec_intercept_ = -1;
    int exec_slope_ = -1;
    int exec_scale_ = -1;
    std::vector<ExecMoments> moments_;
};

// Adapter giving one chain its own workspace over a shared density.
class ChainDensity {
public:
    explicit ChainDensity(const PosteriorDensity& density) : density_(density), ws_(density.make_workspace()) {}

    Eigen::Index dimension() const { return density_.dimension(); }
    double operator()(const Eigen::VectorXd& u, Eigen::VectorXd& grad) {
        return density_.value_and_gradient(u, grad, ws_);
    }

private:
    const PosteriorDensity& density_;
    PosteriorDensity::Workspace ws_;
};

} // namespace mutcausal
