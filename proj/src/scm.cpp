#include "mutcausal/scm.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <fmt/format.h>

#include "mutcausal/errors.hpp"
#include "mutcausal/math.hpp"

namespace mutcausal {

void ScmConfig::validate() const {
    if (projects.empty()) throw ConfigError("the generator needs at least one project");
    if (mutants_per_project < 1) throw ConfigError("mutants per project must be >= 1");
    std::set<std::string> seen;
    for (const auto& t : projects) {
        if (t.name.empty()) throw ConfigError("project names must be nonempty");
        if (!seen.insert(t.name).second) throw ConfigError(fmt::format("duplicate project '{}'", t.name));
        if (!(t.sigma > 0) || !std::isfinite(t.sigma))
            throw ConfigError(fmt::format("sigma of '{}' must be positive", t.name));
        for (double v : {t.alpha, t.beta, t.gamma, t.nu, t.lambda})
            if (!std::isfinite(v)) throw ConfigError(fmt::format("non-finite coefficient for '{}'", t.name));
    }
    if (law == CoverLaw::NegativeBinomial && !(cover_mean > 0 && cover_dispersion > 0))
        throw ConfigError("negative-binomial cover needs positive mean and dispersion");
}

namespace {

std::vector<ProjectTruth> sorted_truth(const ScmConfig& cfg) {
    auto truth = cfg.projects;
    std::sort(truth.begin(), truth.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    return truth;
}

std::string mutant_name(std::size_t i) { return fmt::format("m{:05d}", i + 1); }

} // namespace

std::pair<TransformedDataset, std::vector<ProjectTruth>> generate_transformed(const ScmConfig& cfg) {
    cfg.validate();
    const auto truth = sorted_truth(cfg);
    const auto n = static_cast<Eigen::Index>(cfg.mutants_per_project);
    const auto total = n * static_cast<Eigen::Index>(truth.size());

    TransformedDataset out;
    out.exec_z.resize(total);
    out.cover_z.resize(total);
    out.killed.resize(total);
    out.offsets.push_back(0);
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uniform;
    Eigen::Index row = 0;
    for (const auto& t : truth) {
        out.projects.push_back(t.name);
        for (Eigen::Index i = 0; i < n; ++i, ++row) {
            const double cover = normal(rng);
            const double exec = t.nu + t.lambda * cover + t.sigma * normal(rng);
            const double p = inv_logit(t.alpha + t.beta * exec + t.gamma * cover);
            out.cover_z(row) = cover;
            out.exec_z(row) = exec;
            out.killed(row) = uniform(rng) < p ? 1.0 : 0.0;
            out.mutant_ids.push_back(mutant_name(static_cast<std::size_t>(i)));
        }
        out.offsets.push_back(row);
    }
    return {std::move(out), truth};
}

Dataset generate_raw(const ScmConfig& cfg) {
    cfg.validate();
    if (cfg.law != CoverLaw::NegativeBinomial) throw ConfigError("the raw generator needs the negative-binomial law");
    const auto truth = sorted_truth(cfg);
    const std::size_t n = cfg.mutants_per_project;

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uniform;
    // Gamma-Poisson mixture with the requested mean and dispersion.
    std::gamma_distribution<double> rate_draw(cfg.cover_dispersion, cfg.cover_mean / cfg.cover_dispersion);

    std::vector<MutantRecord> records;
    records.reserve(n * truth.size());
    for (const auto& t : truth) {
        std::vector<std::int64_t> exec(n), cover(n);
        for (std::size_t i = 0; i < n; ++i) {
            cover[i] = std::poisson_distribution<std::int64_t>(rate_draw(rng))(rng);
            if (cover[i] == 0) {
                exec[i] = 0;
                continue;
            }
            const double extra =
                std::exp(t.nu + t.sigma * normal(rng)) * std::pow(static_cast<double>(cover[i]), t.lambda);
            exec[i] = cover[i] + std::poisson_distribution<std::int64_t>(extra)(rng);
        }
        auto transform_of = [&](const std::vector<std::int64_t>& v) {
            Eigen::VectorXd logged(static_cast<Eigen::Index>(n));
            for (std::size_t i = 0; i < n; ++i) logged(static_cast<Eigen::Index>(i)) = std::log1p(static_cast<double>(v[i]));
            TransformParams tp{logged.mean(), std::sqrt(sample_variance(logged))};
            if (!(tp.sd > 0)) tp.sd = 1; // constant column; preprocess will reject it
            return tp;
        };
        const auto te = transform_of(exec);
        const auto tc = transform_of(cover);
        for (std::size_t i = 0; i < n; ++i) {
            const double ez = standardize(static_cast<double>(exec[i]), te);
            const double cz = standardize(static_cast<double>(cover[i]), tc);
            const double p = inv_logit(t.alpha + t.beta * ez + t.gamma * cz);
            records.push_back({t.name, mutant_name(i), exec[i], cover[i], uniform(rng) < p});
        }
    }
    return make_dataset(std::move(records));
}

std::vector<ProjectTruth> sample_truth(const std::vector<std::string>& names, std::uint64_t seed,
                                       const TruthRanges& r) {
    std::mt19937_64 rng(seed);
    auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    std::vector<ProjectTruth> out;
    for (const auto& name : names) {
        ProjectTruth t;
        t.name = name;
        t.alpha = u(r.alpha_lo, r.alpha_hi);
        t.beta = u(r.beta_lo, r.beta_hi);
        t.gamma = u(r.gamma_lo, r.gamma_hi);
        t.nu = u(r.nu_lo, r.nu_hi);
        t.lambda = u(r.lambda_lo, r.lambda_hi);
        t.sigma = u(r.sigma_lo, r.sigma_hi);
        out.push_back(t);
    }
    return out;
}

} // namespace mutcausal
