#include "mutcausal/sampler.hpp"

#include <exception>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "mutcausal/density.hpp"
#include "mutcausal/errors.hpp"

namespace mutcausal {

void ChainConfig::validate() const {
    if (samples < 1) throw ConfigError("sampling iterations must be >= 1", Error::Category::Usage);
    if (warmup < 0) throw ConfigError("warmup iterations must be >= 0", Error::Category::Usage);
    if (chains < 1) throw ConfigError("chain count must be >= 1", Error::Category::Usage);
    if (!(target_accept > 0.6 && target_accept < 0.99))
        throw ConfigError("target acceptance must lie in (0.6, 0.99)", Error::Category::Usage);
    if (!(integration_time > 0)) throw ConfigError("integration time must be positive", Error::Category::Usage);
    if (!(jitter >= 0 && jitter < 1)) throw ConfigError("jitter must lie in [0, 1)", Error::Category::Usage);
    if (max_steps < 1) throw ConfigError("max steps must be >= 1", Error::Category::Usage);
}

HmcSettings ChainConfig::hmc_settings() const {
    HmcSettings s;
    s.warmup = warmup;
    s.samples = samples;
    s.target_accept = target_accept;
    s.integration_time = integration_time;
    s.jitter = jitter;
    s.max_steps = max_steps;
    s.dense_metric = dense_metric;
    return s;
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace

std::uint64_t chain_seed(std::uint64_t master, int chain) {
    return splitmix64(splitmix64(master) + static_cast<std::uint64_t>(chain));
}

Eigen::Index PosteriorSamples::column(std::string_view name) const {
    for (std::size_t i = 0; i < parameters.size(); ++i)
        if (parameters[i].name == name) return static_cast<Eigen::Index>(i);
    throw UnknownFamily(fmt::format("no parameter named '{}'", name));
}

Eigen::Index PosteriorSamples::column(std::string_view family, std::string_view project) const {
    for (std::size_t i = 0; i < parameters.size(); ++i) {
        const auto& p = parameters[i];
        if (p.family == family && (p.project == project || p.project.empty())) return static_cast<Eigen::Index>(i);
    }
    if (!has_family(family)) throw UnknownFamily(fmt::format("no family '{}' in model '{}'", family, model_id));
    throw UnknownProject(fmt::format("no project '{}' in model '{}'", project, model_id));
}

bool PosteriorSamples::has_family(std::string_view family) const {
    for (const auto& p : parameters)
        if (p.family == family) return true;
    return false;
}

Eigen::VectorXd PosteriorSamples::pooled(Eigen::Index column) const {
    Eigen::VectorXd out(total_draws());
    for (std::size_t c = 0; c < chains.size(); ++c)
        out.segment(static_cast<Eigen::Index>(c) * iterations(), iterations()) = chains[c].col(column);
    return out;
}

std::vector<Eigen::VectorXd> PosteriorSamples::per_chain(Eigen::Index column) const {
    std::vector<Eigen::VectorXd> out;
    for (const auto& c : chains) out.emplace_back(c.col(column));
    return out;
}

void PosteriorSamples::compute_diagnostics() {
    diagnostics.clear();
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(parameters.size()); ++j) {
        const auto draws = per_chain(j);
        ParameterDiagnostics d;
        d.r_hat = chains.size() >= 2 && iterations() >= 4 ? split_r_hat(draws)
                                                           : Diagnostic{std::numeric_limits<double>::quiet_NaN(), true};
        d.ess = iterations() >= 4 ? effective_sample_size(draws)
                                  : Diagnostic{std::numeric_limits<double>::quiet_NaN(), true};
        diagnostics.push_back(d);
    }
}

PosteriorSamples make_samples_shell(const ModelSpec& spec, const std::vector<std::string>& projects) {
    PosteriorSamples out;
    out.model_id = spec.id();
    out.projects = projects;
    const auto names = spec.parameter_names(projects);
    Eigen::Index slot = 0;
    for (std::size_t f = 0; f < spec.families().size(); ++f) {
        const auto& fam = spec.families()[f];
        for (Eigen::Index k = 0; k < spec.family_size(f); ++k, ++slot) {
            out.parameters.push_back({names[static_cast<std::size_t>(slot)], fam.name,
                                      fam.varying ? projects[static_cast<std::size_t>(k)] : std::string{},
                                      spec.positive(slot)});
        }
    }
    return out;
}

PosteriorSamples run_chains(const ModelSpec& spec, const TransformedDataset& data, const ChainConfig& cfg) {
    cfg.validate();
    const PosteriorDensity density(spec, data);
    const auto settings = cfg.hmc_settings();

    std::vector<ChainOutput> outputs(static_cast<std::size_t>(cfg.chains));
    std::vector<std::exception_ptr> failures(outputs.size());
    auto run_one = [&](std::size_t c) {
        try {
            std::mt19937_64 rng(chain_seed(cfg.seed, static_cast<int>(c)));
            ChainDensity target(density);
            outputs[c] = sample_chain(target, settings, rng);
        } catch (...) {
            failures[c] = std::current_exception();
        }
    };
    if (cfg.parallel && cfg.chains > 1 && std::thread::hardware_concurrency() > 1) {
        std::vector<std::jthread> threads;
        for (std::size_t c = 0; c < outputs.size(); ++c) threads.emplace_back(run_one, c);
    } else {
        for (std::size_t c = 0; c < outputs.size(); ++c) run_one(c);
    }
    for (const auto& f : failures)
        if (f) std::rethrow_exception(f);

    auto samples = make_samples_shell(spec, data.projects);
    for (const auto& out : outputs) {
        Eigen::MatrixXd draws = out.draws;
        for (Eigen::Index j = 0; j < draws.cols(); ++j)
            if (spec.positive(j)) draws.col(j) = draws.col(j).array().exp();
        samples.chains.push_back(std::move(draws));
        samples.stats.push_back({out.step_size, out.mean_accept, out.mean_steps, out.divergences});
    }
    samples.compute_diagnostics();
    return samples;
}

Diagnostic r_hat(const PosteriorSamples& samples, std::string_view param) {
    return split_r_hat(samples.per_chain(samples.column(param)));
}

Diagnostic ess(const PosteriorSamples& samples, std::string_view param) {
    return effective_sample_size(samples.per_chain(samples.column(param)));
}

} // namespace mutcausal
