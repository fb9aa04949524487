// mutcausal: batch pipeline over per-mutant data.
//
//   describe        per-project statistics of a raw CSV
//   fit             sample one of the rq1..rq4 models
//   summarize       coefficient table of a fit
//   diff            paired-draw difference of two fits
//   counterfactual  kill probability under an intervention on exec or cover
//   ppc / r2        posterior predictive check, Bayesian R-squared
//   prior-check     prior predictive mutation scores
//   dag             back-door report for an edge list
//   simulate        synthetic data from the structural model
//   replicate       rq1..rq4 plus the five result tables
//
// Exit codes: 0 ok, 2 data error, 64 usage error, 70 internal error or
// failed --strict-diagnostics.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "mutcausal/analysis.hpp"
#include "mutcausal/artifacts.hpp"
#include "mutcausal/dag.hpp"
#include "mutcausal/dataset.hpp"
#include "mutcausal/errors.hpp"
#include "mutcausal/model.hpp"
#include "mutcausal/sampler.hpp"
#include "mutcausal/scm.hpp"

namespace fs = std::filesystem;
using namespace mutcausal;

namespace {

constexpr int kExitData = 2;
constexpr int kExitUsage = 64;
constexpr int kExitInternal = 70;

std::string default_out_dir() {
    if (const char* env = std::getenv("MUTCAUSAL_OUT"); env && *env) return env;
    return "mutcausal-out";
}

// --- input data -------------------------------------------------------------

struct Input {
    std::string path;
    std::string hash;
    std::optional<Dataset> raw; // absent for model-scale input
    TransformedDataset data;
};

Input load_input(const std::string& path, bool lenient, bool need_raw = false) {
    const std::string bytes = read_file(path);
    Input in{path, content_hash(bytes), std::nullopt, {}};
    std::istringstream stream(bytes);
    std::string first;
    std::getline(stream, first);
    if (!first.empty() && first.back() == '\r') first.pop_back();
    if (first.rfind("\xEF\xBB\xBF", 0) == 0) first.erase(0, 3);
    stream.clear();
    stream.seekg(0);
    if (first == kTransformedCsvHeader) {
        if (need_raw) throw SchemaError(fmt::format("'{}' holds model-scale data; this command needs raw counts", path));
        in.data = read_transformed_csv(stream);
        return in;
    }
    LoadReport report;
    in.raw = read_csv(stream, lenient, &report);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    if (!need_raw) in.data = preprocess(*in.raw);
    return in;
}

// --- fits on disk ------------------------------------------------------------

struct Fit {
    fs::path dir;
    RunManifest manifest;
    PosteriorSamples samples;
};

Fit load_fit(const fs::path& dir) {
    const auto manifest_path = dir / "manifest.json";
    if (!fs::exists(manifest_path)) throw ManifestMismatch(fmt::format("no manifest.json in '{}'", dir.string()));
    json j;
    try {
        j = json::parse(read_file(manifest_path));
    } catch (const json::exception& e) {
        throw ManifestMismatch(fmt::format("unreadable manifest '{}': {}", manifest_path.string(), e.what()));
    }
    Fit fit{dir, manifest_from_json(j), {}};
    if (fit.manifest.command != "fit" || fit.manifest.model_id.empty())
        throw ManifestMismatch(fmt::format("'{}' is not a fit directory", dir.string()));
    const auto draws_path = dir / "draws.csv";
    const std::string bytes = read_file(draws_path);
    bool listed = false;
    for (const auto& out : fit.manifest.outputs) {
        if (out.path != "draws.csv") continue;
        listed = true;
        if (out.hash != content_hash(bytes))
            throw ManifestMismatch(fmt::format("'{}' does not match the hash in its manifest", draws_path.string()));
    }
    if (!listed) throw ManifestMismatch(fmt::format("manifest in '{}' does not list draws.csv", dir.string()));
    std::istringstream stream(bytes);
    fit.samples = read_draws_csv(stream, fit.manifest.model_id, fit.manifest.projects);
    return fit;
}

// Data a fit was conditioned on: --data if given, else the manifest's input.
Input data_for_fit(const Fit& fit, const std::string& override_path, bool lenient) {
    if (fit.manifest.inputs.empty()) throw ManifestMismatch("fit manifest lists no input");
    const std::string path = override_path.empty() ? fit.manifest.inputs.front().path : override_path;
    auto in = load_input(path, lenient);
    if (in.hash != fit.manifest.data_hash) {
        throw ManifestMismatch(
            fmt::format("'{}' is not the dataset fit '{}' was conditioned on", path, fit.dir.string()));
    }
    return in;
}

void require_same_data(const Fit& a, const Fit& b) {
    if (a.manifest.data_hash != b.manifest.data_hash) {
        throw ManifestMismatch(fmt::format("fits '{}' and '{}' were run on different datasets", a.dir.string(),
                                           b.dir.string()));
    }
}

// --- output --------------------------------------------------------------------

// Collects files for one command and finishes with a manifest that lists them.
class OutputDir {
public:
    OutputDir(fs::path dir, std::string command) : dir_(std::move(dir)) {
        manifest_.command = std::move(command);
        manifest_.started = utc_timestamp();
    }

    RunManifest& manifest() { return manifest_; }
    const fs::path& path() const { return dir_; }

    void write(const std::string& name, const std::string& contents) {
        write_atomic(dir_ / name, contents);
        manifest_.outputs.push_back({name, content_hash(contents)});
    }
    void write_json(const std::string& name, json j) {
        j["manifest"] = "manifest.json";
        write(name, j.dump(2) + "\n");
    }

    void finish() {
        manifest_.finished = utc_timestamp();
        write_atomic(dir_ / "manifest.json", manifest_to_json(manifest_).dump(2) + "\n");
    }

private:
    fs::path dir_;
    RunManifest manifest_;
};

template <typename Writer>
std::string to_text(Writer&& writer) {
    std::ostringstream out;
    writer(out);
    return out.str();
}

void print_table(const std::string& title, const std::vector<CoefficientSummary>& rows) {
    std::cout << title << '\n';
    std::cout << fmt::format("{:<16}{:>8}{:>8}{:>8}{:>8}\n", "project", "mean", "se", "2.5%", "97.5%");
    for (const auto& r : rows)
        std::cout << fmt::format("{:<16}{:>8.2f}{:>8.2f}{:>8.2f}{:>8.2f}\n", r.project, r.mean, r.se, r.q025, r.q975);
}

Eigen::VectorXd parse_grid(const std::string& spec) {
    if (spec.empty()) return default_counterfactual_grid();
    double lo = 0, hi = 0;
    int n = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(spec);
    if (!(in >> lo >> c1 >> hi >> c2 >> n) || c1 != ':' || c2 != ':' || n < 1 || !(in >> std::ws).eof() ||
        (n > 1 && !(hi > lo))) {
        throw ConfigError(fmt::format("--grid expects lo:hi:n with lo < hi and n >= 1, got '{}'", spec),
                          Error::Category::Usage);
    }
    if (n == 1) return Eigen::VectorXd::Constant(1, lo);
    return Eigen::VectorXd::LinSpaced(n, lo, hi);
}

void check_level(double level) {
    if (!(level > 0 && level < 1)) throw ConfigError("--level must lie in (0, 1)", Error::Category::Usage);
}

// --- chain flags ---------------------------------------------------------------

struct ChainFlags {
    ChainConfig cfg;
    bool strict = false;
    double r_hat_threshold = 1.01;

    void attach(CLI::App* cmd) {
        cmd->add_option("--chains", cfg.chains, "Number of chains")->capture_default_str();
        cmd->add_option("--warmup", cfg.warmup, "Warmup iterations per chain")->capture_default_str();
        cmd->add_option("--samples", cfg.samples, "Retained iterations per chain")->capture_default_str();
        cmd->add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
        cmd->add_option("--target-accept", cfg.target_accept, "Target acceptance rate")->capture_default_str();
        cmd->add_option("--integration-time", cfg.integration_time, "Trajectory length in whitened units")->capture_default_str();
        cmd->add_flag("--strict-diagnostics", strict, "Exit 70 when any R-hat reaches the threshold");
        cmd->add_option("--r-hat-threshold", r_hat_threshold, "R-hat threshold")->capture_default_str();
        cmd->add_flag("--diagonal-metric", [this](std::int64_t) { cfg.dense_metric = false; },
                      "Adapt a diagonal instead of a dense metric");
    }
};

struct FitResult {
    PosteriorSamples samples;
    DiagnosticsOverview overview;
};

// Runs one model and writes draws, diagnostics, spec and manifest to `dir`.
FitResult fit_to_dir(const Input& in, ResearchQuestion rq, const ChainFlags& flags, const fs::path& dir) {
    const auto spec = make_model(rq, in.data.project_count());
    OutputDir out(dir, "fit");
    auto& m = out.manifest();
    m.model_id = spec.id();
    m.inputs.push_back({in.path, in.hash});
    m.data_hash = in.hash;
    m.projects = in.data.projects;
    m.has_chain_config = true;
    m.chain = flags.cfg;

    const auto t0 = std::chrono::steady_clock::now();
    PosteriorSamples samples;
    try {
        samples = run_chains(spec, in.data, flags.cfg);
    } catch (const SamplerError& e) {
        json partial = {{"format_version", kFormatVersion},
                        {"model_id", spec.id()},
                        {"error", e.what()},
                        {"chain_config", chain_config_to_json(flags.cfg)}};
        out.write_json("diagnostics.json", partial);
        out.finish();
        throw;
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    out.write("draws.csv", to_text([&](std::ostream& os) { write_draws_csv(os, samples); }));
    out.write_json("diagnostics.json", diagnostics_to_json(samples, flags.r_hat_threshold));
    out.write_json("spec.json", spec_to_json(spec));
    out.finish();

    const auto ov = overview(samples, flags.r_hat_threshold);
    std::cerr << fmt::format("{}: {} draws in {:.1f}s, max R-hat {:.4f}, min ESS {:.0f} -> {}\n", spec.id(),
                             samples.total_draws(), seconds, ov.max_r_hat, ov.min_ess, dir.string());
    return {std::move(samples), ov};
}

int strict_exit(const ChainFlags& flags, const DiagnosticsOverview& ov, const std::string& what) {
    if (flags.strict && ov.flagged > 0) {
        std::cerr << fmt::format("error: {}: {} parameter(s) failed the R-hat < {} check\n", what, ov.flagged,
                                 flags.r_hat_threshold);
        return kExitInternal;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Causal analysis of mutation-testing data"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    std::string out_dir = default_out_dir();
    bool lenient = false;
    std::string model_id;
    ChainFlags chain_flags;
    std::string family = "beta";
    std::string family_b;
    double cover_fixed = 0.0;
    std::string grid_spec;
    double level = 0.95;
    std::string data_override;

    auto add_out = [&](CLI::App* cmd) {
        cmd->add_option("--out", out_dir, "Output directory (default $MUTCAUSAL_OUT or ./mutcausal-out)");
    };

    // describe
    std::string describe_input;
    auto* describe = app.add_subcommand("describe", "Per-project statistics of a raw CSV");
    describe->add_option("input", describe_input, "Raw per-mutant CSV")->required();
    describe->add_flag("--lenient", lenient, "Keep rows violating cover <= exec, with warnings");
    add_out(describe);

    // fit
    std::string fit_input;
    auto* fit = app.add_subcommand("fit", "Sample the posterior of one model");
    fit->add_option("input", fit_input, "Raw or model-scale CSV")->required();
    fit->add_option("--model", model_id, "rq1, rq2, rq3 or rq4")->required();
    fit->add_flag("--lenient", lenient, "Keep rows violating cover <= exec, with warnings");
    chain_flags.attach(fit);
    add_out(fit);

    // summarize
    std::string summarize_fit;
    auto* summarize_cmd = app.add_subcommand("summarize", "Coefficient table of a fit");
    summarize_cmd->add_option("fit", summarize_fit, "Fit directory")->required();
    summarize_cmd->add_option("--family", family, "Coefficient family")->capture_default_str();
    add_out(summarize_cmd);

    // diff
    std::string diff_a, diff_b;
    auto* diff = app.add_subcommand("diff", "Paired-draw difference a - b per project");
    diff->add_option("fit_a", diff_a, "Fit directory a")->required();
    diff->add_option("fit_b", diff_b, "Fit directory b")->required();
    diff->add_option("--family", family, "Family in a")->capture_default_str();
    diff->add_option("--family-b", family_b, "Family in b (default: same as --family)");
    add_out(diff);

    // counterfactual
    std::string cf_fit, cf_unadjusted, cf_project, cf_intervene = "exec";
    std::uint64_t cf_seed = 1;
    auto* counterfactual = app.add_subcommand("counterfactual", "Kill probability under an intervention");
    counterfactual->add_option("fit", cf_fit, "Adjusted fit (rq2/rq3; rq3 for --intervene cover)")->required();
    counterfactual->add_option("--project", cf_project, "Project name")->required();
    counterfactual->add_option("--unadjusted", cf_unadjusted, "rq1 fit for the noncausal companion curve");
    counterfactual->add_option("--intervene", cf_intervene, "exec or cover")
        ->check(CLI::IsMember({"exec", "cover"}))
        ->capture_default_str();
    counterfactual->add_option("--cover-fixed", cover_fixed, "cover_z held fixed (exec intervention)")
        ->capture_default_str();
    counterfactual->add_option("--grid", grid_spec, "lo:hi:n (default -2:2:41)");
    counterfactual->add_option("--level", level, "Interval level")->capture_default_str();
    counterfactual->add_option("--seed", cf_seed, "Seed for the mediator draws (cover intervention)");
    add_out(counterfactual);

    // ppc
    std::string ppc_fit;
    auto* ppc = app.add_subcommand("ppc", "Posterior predictive check of per-project mutation scores");
    ppc->add_option("fit", ppc_fit, "Fit directory")->required();
    ppc->add_option("--data", data_override, "Dataset (default: the fit's input)");
    ppc->add_option("--level", level, "Interval level")->capture_default_str();
    ppc->add_flag("--lenient", lenient, "Lenient ingest");
    add_out(ppc);

    // r2
    std::string r2_fit;
    auto* r2 = app.add_subcommand("r2", "Bayesian R-squared");
    r2->add_option("fit", r2_fit, "Fit directory")->required();
    r2->add_option("--data", data_override, "Dataset (default: the fit's input)");
    r2->add_option("--level", level, "Interval level")->capture_default_str();
    r2->add_flag("--lenient", lenient, "Lenient ingest");
    add_out(r2);

    // prior-check
    std::string prior_input;
    std::size_t prior_sims = 1000, prior_bins = 20;
    std::uint64_t prior_seed = 1;
    auto* prior = app.add_subcommand("prior-check", "Prior predictive mutation scores");
    prior->add_option("input", prior_input, "Raw or model-scale CSV")->required();
    prior->add_option("--model", model_id, "rq1, rq2, rq3 or rq4")->required();
    prior->add_option("--sims", prior_sims, "Prior draws")->capture_default_str();
    prior->add_option("--bins", prior_bins, "Histogram bins")->capture_default_str();
    prior->add_option("--seed", prior_seed, "Seed")->capture_default_str();
    prior->add_flag("--lenient", lenient, "Lenient ingest");
    add_out(prior);

    // dag
    std::string dag_file, treatment, outcome;
    auto* dag = app.add_subcommand("dag", "Back-door paths and adjustment sets");
    dag->add_option("edges", dag_file, "Edge list, one 'A -> B' per line")->required();
    dag->add_option("--treatment", treatment, "Treatment node")->required();
    dag->add_option("--outcome", outcome, "Outcome node")->required();
    add_out(dag);

    // simulate
    std::string sim_config;
    auto* simulate = app.add_subcommand("simulate", "Synthetic data from the structural model");
    simulate->add_option("config", sim_config, "Generator config JSON")->required();
    add_out(simulate);

    // replicate
    std::string rep_input;
    auto* replicate = app.add_subcommand("replicate", "Fit rq1..rq4 and write tables 2-6");
    replicate->add_option("input", rep_input, "Raw or model-scale CSV")->required();
    replicate->add_flag("--lenient", lenient, "Lenient ingest");
    chain_flags.attach(replicate);
    add_out(replicate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        const fs::path out_path(out_dir);

        if (describe->parsed()) {
            const auto in = load_input(describe_input, lenient, true);
            const auto rows = summarize(*in.raw);
            OutputDir out(out_path, "describe");
            out.manifest().inputs.push_back({in.path, in.hash});
            out.write("describe.csv", to_text([&](std::ostream& os) { write_describe_csv(os, rows); }));
            out.write_json("describe.json", describe_to_json(rows));
            out.finish();
            std::cout << fmt::format("{:<16}{:>10}{:>6}  {:<6}{:>10}{:>10}{:>10}{:>10}{:>14}{:>10}\n", "Subject",
                                     "#Mutants", "MS", "Var", "Min", "Q1", "Median", "Q3", "Max", "Skewness");
            for (const auto& r : rows) {
                for (auto [name, v] : {std::pair{"Exec", r.exec}, std::pair{"Cover", r.cover}}) {
                    std::cout << fmt::format("{:<16}{:>10}{:>6.2f}  {:<6}{:>10g}{:>10g}{:>10g}{:>10g}{:>14g}{:>10.2f}\n",
                                             r.project, r.mutants, r.mutation_score, name, v.min, v.q1, v.median,
                                             v.q3, v.max, v.skewness);
                }
            }
            return 0;
        }

        if (fit->parsed()) {
            const auto rq = parse_research_question(model_id);
            chain_flags.cfg.validate();
            const auto in = load_input(fit_input, lenient);
            const auto result = fit_to_dir(in, rq, chain_flags, out_path);
            return strict_exit(chain_flags, result.overview, to_string(rq));
        }

        if (summarize_cmd->parsed()) {
            const auto f = load_fit(summarize_fit);
            const auto rows = summarize_coefficients(f.samples, family);
            OutputDir out(out_path, "summarize");
            out.manifest().model_id = f.manifest.model_id;
            out.manifest().inputs.push_back({(f.dir / "manifest.json").string(), hash_file(f.dir / "manifest.json")});
            out.manifest().data_hash = f.manifest.data_hash;
            out.write("table.csv", to_text([&](std::ostream& os) { write_table_csv(os, rows); }));
            out.write_json("table.json", table_to_json(rows));
            out.finish();
            print_table(fmt::format("{} {} (logit scale, {} draws)", f.manifest.model_id, family,
                                    f.samples.total_draws()),
                        rows);
            return 0;
        }

        if (diff->parsed()) {
            const auto a = load_fit(diff_a);
            const auto b = load_fit(diff_b);
            require_same_data(a, b);
            const std::string fam_b = family_b.empty() ? family : family_b;
            const auto rows = coefficient_difference(a.samples, family, b.samples, fam_b);
            OutputDir out(out_path, "diff");
            for (const auto* f : {&a, &b})
                out.manifest().inputs.push_back(
                    {(f->dir / "manifest.json").string(), hash_file(f->dir / "manifest.json")});
            out.manifest().data_hash = a.manifest.data_hash;
            out.write("diff.csv", to_text([&](std::ostream& os) { write_table_csv(os, rows); }));
            out.write_json("diff.json", table_to_json(rows));
            out.finish();
            print_table(fmt::format("{} {} - {} {}", a.manifest.model_id, family, b.manifest.model_id, fam_b), rows);
            return 0;
        }

        if (counterfactual->parsed()) {
            check_level(level);
            const auto grid = parse_grid(grid_spec);
            const auto adjusted = load_fit(cf_fit);
            OutputDir out(out_path, "counterfactual");
            out.manifest().inputs.push_back(
                {(adjusted.dir / "manifest.json").string(), hash_file(adjusted.dir / "manifest.json")});
            out.manifest().data_hash = adjusted.manifest.data_hash;
            CounterfactualCurve curve;
            if (cf_intervene == "cover") {
                curve = intervene_on_cover(adjusted.samples, cf_project, grid, cf_seed, level);
            } else if (!cf_unadjusted.empty()) {
                const auto unadjusted = load_fit(cf_unadjusted);
                require_same_data(adjusted, unadjusted);
                out.manifest().inputs.push_back(
                    {(unadjusted.dir / "manifest.json").string(), hash_file(unadjusted.dir / "manifest.json")});
                curve = counterfactual_exec_curve(adjusted.samples, unadjusted.samples, cf_project, grid, cover_fixed,
                                                  level);
            } else {
                curve = counterfactual_exec_curve(adjusted.samples, cf_project, grid, cover_fixed, level);
            }
            out.write("curve.csv", to_text([&](std::ostream& os) { write_curve_csv(os, curve); }));
            out.write_json("curve.json", curve_to_json(curve));
            out.finish();
            std::cout << fmt::format("{}: {} intervention, {} grid points, P(killed) {:.2f} .. {:.2f}\n", cf_project,
                                     cf_intervene, grid.size(), curve.causal.front().mean, curve.causal.back().mean);
            return 0;
        }

        if (ppc->parsed() || r2->parsed()) {
            check_level(level);
            const auto f = load_fit(ppc->parsed() ? ppc_fit : r2_fit);
            const auto in = data_for_fit(f, data_override, lenient);
            const auto spec = make_model(parse_research_question(f.manifest.model_id), in.data.project_count());
            OutputDir out(out_path, ppc->parsed() ? "ppc" : "r2");
            out.manifest().model_id = f.manifest.model_id;
            out.manifest().inputs.push_back({(f.dir / "manifest.json").string(), hash_file(f.dir / "manifest.json")});
            out.manifest().inputs.push_back({in.path, in.hash});
            out.manifest().data_hash = in.hash;
            if (ppc->parsed()) {
                const auto rows = posterior_predictive_check(spec, f.samples, in.data, level);
                out.write("ppc.csv", to_text([&](std::ostream& os) { write_ppc_csv(os, rows); }));
                out.write_json("ppc.json", ppc_to_json(rows));
                std::size_t covered = 0;
                for (const auto& r : rows) {
                    covered += r.covers_observed();
                    std::cout << fmt::format("{:<16} observed {:.3f}  predicted {:.3f} [{:.3f}, {:.3f}]{}\n", r.project,
                                             r.observed, r.predicted.mean, r.predicted.lower, r.predicted.upper,
                                             r.covers_observed() ? "" : "  outside");
                }
                std::cout << fmt::format("{} of {} observed scores inside the {:.0f}% band\n", covered, rows.size(),
                                         100 * level);
            } else {
                const auto result = bayesian_r_squared(spec, f.samples, in.data, level);
                out.write_json("r2.json", r_squared_to_json(result));
                std::cout << fmt::format("Bayesian R-squared: mean {:.3f}, {:.0f}% interval [{:.3f}, {:.3f}]\n",
                                         result.summary.mean, 100 * level, result.summary.lower, result.summary.upper);
            }
            out.finish();
            return 0;
        }

        if (prior->parsed()) {
            const auto rq = parse_research_question(model_id);
            const auto in = load_input(prior_input, lenient);
            const auto spec = make_model(rq, in.data.project_count());
            const auto result = prior_predictive_mutation_score(spec, in.data, prior_sims, prior_seed, prior_bins);
            OutputDir out(out_path, "prior-check");
            out.manifest().model_id = spec.id();
            out.manifest().inputs.push_back({in.path, in.hash});
            out.manifest().data_hash = in.hash;
            out.write("prior_check.csv", to_text([&](std::ostream& os) { write_prior_check_csv(os, result); }));
            out.write_json("prior_check.json", prior_check_to_json(result));
            out.finish();
            const auto s = summarize_interval(result.scores, 0.95);
            std::cout << fmt::format("{} prior predictive mutation score: mean {:.3f}, 95% [{:.3f}, {:.3f}]\n",
                                     spec.id(), s.mean, s.lower, s.upper);
            return 0;
        }

        if (dag->parsed()) {
            const auto graph = load_edge_list(dag_file);
            const auto report = dag_report_to_json(graph, treatment, outcome);
            OutputDir out(out_path, "dag");
            out.manifest().inputs.push_back({dag_file, hash_file(dag_file)});
            out.write_json("dag.json", report);
            out.finish();
            std::cout << dag_report_text(graph, treatment, outcome);
            return 0;
        }

        if (simulate->parsed()) {
            json j;
            try {
                j = json::parse(read_file(sim_config));
            } catch (const json::exception& e) {
                throw ConfigError(fmt::format("'{}' is not valid JSON: {}", sim_config, e.what()));
            }
            const auto cfg = scm_config_from_json(j);
            OutputDir out(out_path, "simulate");
            out.manifest().inputs.push_back({sim_config, hash_file(sim_config)});
            std::vector<ProjectTruth> truth;
            std::size_t rows = 0;
            if (cfg.law == CoverLaw::NegativeBinomial) {
                const auto ds = generate_raw(cfg);
                rows = ds.size();
                out.write("data.csv", to_text([&](std::ostream& os) { write_csv(os, ds); }));
                truth = cfg.projects;
                std::sort(truth.begin(), truth.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
            } else {
                auto [data, t] = generate_transformed(cfg);
                rows = static_cast<std::size_t>(data.size());
                out.write("data.csv", to_text([&](std::ostream& os) { write_transformed_csv(os, data); }));
                truth = std::move(t);
            }
            out.write_json("truth.json", truth_to_json(truth));
            out.finish();
            std::cout << fmt::format("{} rows for {} projects -> {}\n", rows, truth.size(),
                                     (out_path / "data.csv").string());
            return 0;
        }

        if (replicate->parsed()) {
            chain_flags.cfg.validate();
            const auto in = load_input(rep_input, lenient);
            std::vector<PosteriorSamples> fits;
            DiagnosticsOverview worst;
            for (auto rq : {ResearchQuestion::Rq1, ResearchQuestion::Rq2, ResearchQuestion::Rq3, ResearchQuestion::Rq4}) {
                auto result = fit_to_dir(in, rq, chain_flags, out_path / to_string(rq));
                worst.flagged += result.overview.flagged;
                fits.push_back(std::move(result.samples));
            }
            const auto& [rq1, rq2, rq3, rq4] = std::tie(fits[0], fits[1], fits[2], fits[3]);
            (void)rq3;
            struct Table {
                const char* name;
                std::string title;
                std::vector<CoefficientSummary> rows;
            };
            const std::vector<Table> tables = {
                {"table2", "Table 2: rq1 beta (Exec, unadjusted)", summarize_coefficients(rq1, "beta")},
                {"table3", "Table 3: rq2 beta (Exec, adjusted for Cover)", summarize_coefficients(rq2, "beta")},
                {"table4", "Table 4: rq1 beta - rq2 beta", coefficient_difference(rq1, rq2, "beta")},
                {"table5", "Table 5: rq4 beta (Cover)", summarize_coefficients(rq4, "beta")},
                {"table6", "Table 6: rq4 beta (Cover) - rq2 beta (Exec)", coefficient_difference(rq4, rq2, "beta")},
            };
            OutputDir out(out_path, "replicate");
            out.manifest().inputs.push_back({in.path, in.hash});
            out.manifest().data_hash = in.hash;
            out.manifest().projects = in.data.projects;
            out.manifest().has_chain_config = true;
            out.manifest().chain = chain_flags.cfg;
            for (const auto& t : tables) {
                out.write(std::string(t.name) + ".csv", to_text([&](std::ostream& os) { write_table_csv(os, t.rows); }));
                json j = table_to_json(t.rows);
                j["title"] = t.title;
                out.write_json(std::string(t.name) + ".json", j);
                print_table(t.title, t.rows);
                std::cout << '\n';
            }
            out.finish();
            return strict_exit(chain_flags, worst, "replicate");
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        switch (e.category()) {
        case Error::Category::Data: return kExitData;
        case Error::Category::Usage: return kExitUsage;
        default: return kExitInternal;
        }
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInternal;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return 0;
}
