#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "mutcausal/dataset.hpp"

namespace mutcausal {

enum class ResearchQuestion { Rq1, Rq2, Rq3, Rq4 };

std::string to_string(ResearchQuestion rq);
ResearchQuestion parse_research_question(std::string_view id); // "rq1".."rq4"; throws ConfigError

struct NormalPrior {
    double mu = 0;
    double sigma = 1;
};

struct LogNormalPrior {
    double mu = 0;
    double sigma = 1;
};

struct ExponentialPrior {
    double rate = 1;
};

using Prior = std::variant<NormalPrior, LogNormalPrior, ExponentialPrior>;

// Families under a positive-support prior are sampled on the log scale.
bool has_positive_support(const Prior& prior);
void validate_prior(const Prior& prior); // throws ConfigError
std::string describe(const Prior& prior); // "Normal(0, 1)"

enum class Submodel {
    Outcome, // Bernoulli-logit on the kill outcome
    Exec,    // Normal regression of exec_z on cover_z
};

enum class Term {
    Intercept,
    Exec,  // slope on exec_z
    Cover, // slope on cover_z
    Scale, // residual sd of the Exec submodel
};

const char* to_string(Submodel s);
const char* to_string(Term t);

struct CoefficientFamily {
    std::string name;
    Submodel submodel = Submodel::Outcome;
    Term term = Term::Intercept;
    bool varying = true; // one coefficient per project, else one shared
    Prior prior = NormalPrior{};
};

// Immutable description of one hierarchical model. The unconstrained
// parameter vector lays families out in declaration order; a varying family
// takes one slot per project.
class ModelSpec {
public:
    ModelSpec(std::string id, std::vector<CoefficientFamily> families, std::size_t projects);

    const std::string& id() const { return id_; }
    const std::vector<CoefficientFamily>& families() const { return families_; }
    std::size_t projects() const { return projects_; }
    Eigen::Index dimension() const { return dimension_; }

    std::size_t family_index(std::string_view name) const; // throws UnknownFamily
    const CoefficientFamily* find(Submodel submodel, Term term) const;
    bool has_exec_submodel() const;

    Eigen::Index slot(std::size_t family, std::size_t project) const {
        return offsets_[family] + (families_[family].varying ? static_cast<Eigen::Index>(project) : 0);
    }
    Eigen::Index family_offset(std::size_t family) const { return offsets_[family]; }
    Eigen::Index family_size(std::size_t family) const {
        return families_[family].varying ? static_cast<Eigen::Index>(projects_) : 1;
    }
    bool positive(Eigen::Index slot) const { return positive_[static_cast<std::size_t>(slot)]; }

    // "beta[nodebox]" for varying families, "beta" for shared ones.
    std::vector<std::string> parameter_names(const std::vector<std::string>& project_names) const;

private:
    std::string id_;
    std::vector<CoefficientFamily> families_;
    std::size_t projects_;
    std::vector<Eigen::Index> offsets_;
    std::vector<bool> positive_;
    Eigen::Index dimension_ = 0;
};

// The four kill-outcome models. RQ3 adds the Exec submodel with one residual
// sd per project.
ModelSpec make_model(ResearchQuestion rq, std::size_t projects);

// Varying intercept, no covariates.
ModelSpec make_intercept_only_model(std::size_t projects, Prior prior = NormalPrior{});

// Unconstrained <-> constrained maps (exp on positivity-tagged slots).
Eigen::VectorXd constrain(const ModelSpec& spec, const Eigen::VectorXd& unconstrained);
Eigen::VectorXd unconstrain(const ModelSpec& spec, const Eigen::VectorXd& constrained);

// Log prior density of the unconstrained vector, change-of-variables
// Jacobian included.
double log_prior(const ModelSpec& spec, const Eigen::VectorXd& unconstrained);
Eigen::VectorXd grad_log_prior(const ModelSpec& spec, const Eigen::VectorXd& unconstrained);

// Bernoulli-logit log likelihood (plus the Normal Exec submodel when
// present). Evaluated record by record.
double log_likelihood(const ModelSpec& spec, const Eigen::VectorXd& unconstrained, const TransformedDataset& data);

// Outcome linear predictor (logit of the kill probability) for every record,
// from a constrained parameter vector.
Eigen::VectorXd outcome_linear_predictor(const ModelSpec& spec, const Eigen::VectorXd& constrained,
                                         const TransformedDataset& data);

Eigen::VectorXd grad_log_posterior(const ModelSpec& spec, const Eigen::VectorXd& unconstrained,
                                   const TransformedDataset& data);

// One joint prior draw, returned unconstrained. Deterministic in seed.
Eigen::VectorXd prior_sample(const ModelSpec& spec, std::uint64_t seed);

// Throws ShapeMismatch unless the vector and data fit the spec.
void check_shape(const ModelSpec& spec, const Eigen::VectorXd& unconstrained);
void check_shape(const ModelSpec& spec, const TransformedDataset& data);

} // namespace mutcausal
