#include "mutcausal/model.hpp"

#include <cmath>
#include <random>

#include <fmt/format.h>

#include "mutcausal/errors.hpp"
#include "mutcausal/math.hpp"

namespace mutcausal {

std::string to_string(ResearchQuestion rq) {
    switch (rq) {
    case ResearchQuestion::Rq1: return "rq1";
    case ResearchQuestion::Rq2: return "rq2";
    case ResearchQuestion::Rq3: return "rq3";
    case ResearchQuestion::Rq4: return "rq4";
    }
    return "?";
}

ResearchQuestion parse_research_question(std::string_view id) {
    if (id == "rq1") return ResearchQuestion::Rq1;
    if (id == "rq2") return ResearchQuestion::Rq2;
    if (id == "rq3") return ResearchQuestion::Rq3;
    if (id == "rq4") return ResearchQuestion::Rq4;
    throw ConfigError(fmt::format("unknown model id '{}' (expected rq1, rq2, rq3 or rq4)", id),
                      Error::Category::Usage);
}

bool has_positive_support(const Prior& prior) { return !std::holds_alternative<NormalPrior>(prior); }

void validate_prior(const Prior& prior) {
    std::visit(
        [](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, ExponentialPrior>) {
                if (!(p.rate > 0) || !std::isfinite(p.rate)) throw ConfigError("Exponential rate must be positive");
            } else {
                if (!(p.sigma > 0) || !std::isfinite(p.sigma) || !std::isfinite(p.mu))
                    throw ConfigError("prior sigma must be positive and finite");
            }
        },
        prior);
}

std::string describe(const Prior& prior) {
    return std::visit(
        [](const auto& p) -> std::string {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, NormalPrior>) return fmt::format("Normal({:g}, {:g})", p.mu, p.sigma);
            if constexpr (std::is_same_v<P, LogNormalPrior>)
                return fmt::format("LogNormal({:g}, {:g})", p.mu, p.sigma);
            if constexpr (std::is_same_v<P, ExponentialPrior>) return fmt::format("Exponential({:g})", p.rate);
        },
        prior);
}

const char* to_string(Submodel s) { return s == Submodel::Outcome ? "outcome" : "exec"; }

const char* to_string(Term t) {
    switch (t) {
    case Term::Intercept: return "intercept";
    case Term::Exec: return "exec";
    case Term::Cover: return "cover";
    case Term::Scale: return "scale";
    }
    return "?";
}

ModelSpec::ModelSpec(std::string id, std::vector<CoefficientFamily> families, std::size_t projects)
    : id_(std::move(id)), families_(std::move(families)), projects_(projects) {
    if (projects_ == 0) throw ConfigError("a model needs at least one project");
    int outcome_intercepts = 0, exec_intercepts = 0, exec_scales = 0, exec_families = 0;
    for (std::size_t f = 0; f < families_.size(); ++f) {
        const auto& fam = families_[f];
        validate_prior(fam.prior);
        for (std::size_t g = 0; g < f; ++g)
            if (families_[g].name == fam.name) throw ConfigError(fmt::format("duplicate family '{}'", fam.name));
        if (fam.submodel == Submodel::Outcome) {
            if (fam.term == Term::Scale) throw ConfigError("the Bernoulli outcome has no scale parameter");
            outcome_intercepts += fam.term == Term::Intercept;
        } else {
            ++exec_families;
            if (fam.term == Term::Exec) throw ConfigError("the Exec submodel cannot regress exec on itself");
            exec_intercepts += fam.term == Term::Intercept;
            exec_scales += fam.term == Term::Scale;
            if (fam.term == Term::Scale && !has_positive_support(fam.prior))
                throw ConfigError(fmt::format("scale family '{}' needs a positive-support prior", fam.name));
        }
        for (std::size_t g = 0; g < f; ++g)
            if (families_[g].submodel == fam.submodel && families_[g].term == fam.term && fam.term != Term::Intercept)
                throw ConfigError(fmt::format("family '{}' repeats a term of its submodel", fam.name));
    }
    if (outcome_intercepts != 1) throw ConfigError("the outcome submodel needs exactly one intercept family");
    if (exec_families > 0 && (exec_intercepts != 1 || exec_scales != 1))
        throw ConfigError("the Exec submodel needs exactly one intercept and one scale family");

    for (std::size_t f = 0; f < families_.size(); ++f) {
        offsets_.push_back(dimension_);
        dimension_ += family_size(f);
        positive_.insert(positive_.end(), static_cast<std::size_t>(family_size(f)),
                         has_positive_support(families_[f].prior));
    }
}

std::size_t ModelSpec::family_index(std::string_view name) const {
    for (std::size_t f = 0; f < families_.size(); ++f)
        if (families_[f].name == name) return f;
    throw UnknownFamily(fmt::format("model '{}' has no family '{}'", id_, name));
}

const CoefficientFamily* ModelSpec::find(Submodel submodel, Term term) const {
    for (const auto& f : families_)
        if (f.submodel == submodel && f.term == term) return &f;
    return nullptr;
}

bool ModelSpec::has_exec_submodel() const { return find(Submodel::Exec, Term::Intercept) != nullptr; }

std::vector<std::string> ModelSpec::parameter_names(const std::vector<std::string>& project_names) const {
    if (project_names.size() != projects_) throw ShapeMismatch("project name count differs from the model");
    std::vector<std::string> names;
    for (const auto& f : families_) {
        if (!f.varying) {
            names.push_back(f.name);
            continue;
        }
        for (const auto& p : project_names) names.push_back(fmt::format("{}[{}]", f.name, p));
    }
    return names;
}

ModelSpec make_model(ResearchQuestion rq, std::size_t projects) {
    const CoefficientFamily alpha{"alpha", Submodel::Outcome, Term::Intercept, true, NormalPrior{0, 1}};
    const CoefficientFamily beta_exec{"beta", Submodel::Outcome, Term::Exec, true, LogNormalPrior{0, 1}};
    const CoefficientFamily gamma{"gamma", Submodel::Outcome, Term::Cover, true, LogNormalPrior{0, 1}};
    switch (rq) {
    case ResearchQuestion::Rq1: return ModelSpec("rq1", {alpha, beta_exec}, projects);
    case ResearchQuestion::Rq2: return ModelSpec("rq2", {alpha, beta_exec, gamma}, projects);
    case ResearchQuestion::Rq3:
        return ModelSpec("rq3",
                         {alpha, beta_exec, gamma,
                          {"nu", Submodel::Exec, Term::Intercept, true, NormalPrior{0, 1}},
                          {"lambda", Submodel::Exec, Term::Cover, true, NormalPrior{0, 1}},
                          {"sigma", Submodel::Exec, Term::Scale, true, ExponentialPrior{1}}},
                         projects);
    case ResearchQuestion::Rq4:
        return ModelSpec("rq4", {alpha, {"beta", Submodel::Outcome, Term::Cover, true, LogNormalPrior{0, 1}}},
                         projects);
    }
    throw ConfigError("unreachable research question");
}

ModelSpec make_intercept_only_model(std::size_t projects, Prior prior) {
    return ModelSpec("intercept", {{"alpha", Submodel::Outcome, Term::Intercept, true, prior}}, projects);
}

void check_shape(const ModelSpec& spec, const Eigen::VectorXd& unconstrained) {
    if (unconstrained.size() != spec.dimension()) {
        throw ShapeMismatch(fmt::format("model '{}' has {} parameters, vector has {}", spec.id(), spec.dimension(),
                                        unconstrained.size()));
    }
}

void check_shape(const ModelSpec& spec, const TransformedDataset& data) {
    data.validate();
    if (data.project_count() != spec.projects()) {
        throw ShapeMismatch(fmt::format("model '{}' expects {} projects, data has {}", spec.id(), spec.projects(),
                                        data.project_count()));
    }
}

Eigen::VectorXd constrain(const ModelSpec& spec, const Eigen::VectorXd& unconstrained) {
    check_shape(spec, unconstrained);
    Eigen::VectorXd out = unconstrained;
    for (Eigen::Index i = 0; i < out.size(); ++i)
        if (spec.positive(i)) out(i) = std::exp(out(i));
    return out;
}

Eigen::VectorXd unconstrain(const ModelSpec& spec, const Eigen::VectorXd& constrained) {
    check_shape(spec, constrained);
    Eigen::VectorXd out = constrained;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        if (!spec.positive(i)) continue;
        if (!(out(i) > 0)) throw DomainError(fmt::format("slot {} must be positive, got {}", i, out(i)));
        out(i) = std::log(out(i));
    }
    return out;
}

namespace {

// Log prior of one slot on the unconstrained scale u, Jacobian included,
// and its derivative with respect to u.
struct SlotPrior {
    double value;
    double derivative;
};

SlotPrior slot_prior(const Prior& prior, double u) {
    return std::visit(
        [u](const auto& p) -> SlotPrior {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, NormalPrior>) {
                const double z = (u - p.mu) / p.sigma;
                return {-kLogSqrt2Pi - std::log(p.sigma) - 0.5 * z * z, -z / p.sigma};
            } else if constexpr (std::is_same_v<P, LogNormalPrior>) {
                // density of x = exp(u) is N(log x; mu, sigma) / x; the
                // Jacobian dx/du = x cancels the 1/x.
                const double z = (u - p.mu) / p.sigma;
                return {-kLogSqrt2Pi - std::log(p.sigma) - 0.5 * z * z, -z / p.sigma};
            } else {
                const double x = std::exp(u);
                return {std::log(p.rate) - p.rate * x + u, 1.0 - p.rate * x};
            }
        },
        prior);
}

} // namespace

double log_prior(const ModelSpec& spec, const Eigen::VectorXd& unconstrained) {
    check_shape(spec, unconstrained);
    double total = 0;
    for (std::size_t f = 0; f < spec.families().size(); ++f) {
        const auto& prior = spec.families()[f].prior;
        for (Eigen::Index k = 0; k < spec.family_size(f); ++k)
            total += slot_prior(prior, unconstrained(spec.family_offset(f) + k)).value;
    }
    return total;
}

Eigen::VectorXd grad_log_prior(const ModelSpec& spec, const Eigen::VectorXd& unconstrained) {
    check_shape(spec, unconstrained);
    Eigen::VectorXd grad(spec.dimension());
    for (std::size_t f = 0; f < spec.families().size(); ++f) {
        const auto& prior = spec.families()[f].prior;
        for (Eigen::Index k = 0; k < spec.family_size(f); ++k) {
            const auto slot = spec.family_offset(f) + k;
            grad(slot) = slot_prior(prior, unconstrained(slot)).derivative;
        }
    }
    return grad;
}

namespace {

const Eigen::VectorXd& covariate(const TransformedDataset& data, Term term) {
    return term == Term::Exec ? data.exec_z : data.cover_z;
}

} // namespace

Eigen::VectorXd outcome_linear_predictor(const ModelSpec& spec, const Eigen::VectorXd& constrained,
                                         const TransformedDataset& data) {
    check_shape(spec, constrained);
    check_shape(spec, data);
    Eigen::VectorXd eta(data.size());
    for (std::size_t p = 0; p < data.project_count(); ++p) {
        const auto begin = data.project_begin(p);
        const auto n = data.project_size(p);
        eta.segment(begin, n).setZero();
        for (std::size_t f = 0; f < spec.families().size(); ++f) {
            const auto& fam = spec.families()[f];
            if (fam.submodel != Submodel::Outcome) continue;
            const double coef = constrained(spec.slot(f, p));
            if (fam.term == Term::Intercept)
                eta.segment(begin, n).array() += coef;
            else
                eta.segment(begin, n) += coef * covariate(data, fam.term).segment(begin, n);
        }
    }
    return eta;
}

double log_likelihood(const ModelSpec& spec, const Eigen::VectorXd& unconstrained, const TransformedDataset& data) {
    check_shape(spec, unconstrained);
    check_shape(spec, data);
    const Eigen::VectorXd x = constrain(spec, unconstrained);
    const Eigen::VectorXd eta = outcome_linear_predictor(spec, x, data);
    double total = 0;
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        // y log(theta) + (1 - y) log(1 - theta) with theta = inv_logit(eta)
        total += data.killed(i) > 0.5 ? -log1p_exp(-eta(i)) : -log1p_exp(eta(i));
    }
    if (!spec.has_exec_submodel()) return total;

    for (std::size_t p = 0; p < data.project_count(); ++p) {
        double nu = 0, lambda = 0, sigma = 1;
        for (std::size_t f = 0; f < spec.families().size(); ++f) {
            const auto& fam = spec.families()[f];
            if (fam.submodel != Submodel::Exec) continue;
            const double v = x(spec.slot(f, p));
            if (fam.term == Term::Intercept) nu = v;
            if (fam.term == Term::Cover) lambda = v;
            if (fam.term == Term::Scale) sigma = v;
        }
        for (auto i = data.project_begin(p); i < data.project_begin(p) + data.project_size(p); ++i) {
            const double r = (data.exec_z(i) - nu - lambda * data.cover_z(i)) / sigma;
            total += -kLogSqrt2Pi - std::log(sigma) - 0.5 * r * r;
        }
    }
    return total;
}

Eigen::VectorXd prior_sample(const ModelSpec& spec, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Eigen::VectorXd u(spec.dimension());
    for (std::size_t f = 0; f < spec.families().size(); ++f) {
        for (Eigen::Index k = 0; k < spec.family_size(f); ++k) {
            u(spec.family_offset(f) + k) = std::visit(
                [&rng](const auto& p) -> double {
                    using P = std::decay_t<decltype(p)>;
                    if constexpr (std::is_same_v<P, ExponentialPrior>) {
                        std::exponential_distribution<double> draw(p.rate);
                        double x = draw(rng);
                        while (!(x > 0)) x = draw(rng);
                        return std::log(x);
                    } else {
                        // Normal on u for both: log of a LogNormal draw is Normal.
                        std::normal_distribution<double> draw(p.mu, p.sigma);
                        return draw(rng);
                    }
                },
                spec.families()[f].prior);
        }
    }
    return u;
}

} // namespace mutcausal
