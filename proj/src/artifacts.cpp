#include "mutcausal/artifacts.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "mutcausal/csv.hpp"
#include "mutcausal/errors.hpp"

namespace mutcausal {

namespace fs = std::filesystem;

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string content_hash(std::string_view bytes) { return fmt::format("fnv1a64:{:016x}", fnv1a64(bytes)); }

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string hash_file(const fs::path& path) { return content_hash(read_file(path)); }

void write_atomic(const fs::path& path, std::string_view contents) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(fmt::format("cannot write '{}'", tmp.string()), Error::Category::Internal);
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) throw Error(fmt::format("short write to '{}'", tmp.string()), Error::Category::Internal);
    }
    fs::rename(tmp, path);
}

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

// --- draws -----------------------------------------------------------------

void write_draws_csv(std::ostream& out, const PosteriorSamples& samples) {
    std::string line = "chain,iteration";
    for (const auto& p : samples.parameters) line += "," + csv::escape(p.name);
    out << line << '\n';
    for (std::size_t c = 0; c < samples.chains.size(); ++c) {
        const auto& m = samples.chains[c];
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            line = fmt::format("{},{}", c + 1, i + 1);
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                line += ',';
                line += format_double(m(i, j));
            }
            out << line << '\n';
        }
    }
}

namespace {

ParameterInfo parse_parameter_name(const std::string& name) {
    const auto open = name.find('[');
    if (open == std::string::npos) return {name, name, {}, false};
    if (name.back() != ']') throw ParseError(fmt::format("malformed parameter name '{}'", name));
    return {name, name.substr(0, open), name.substr(open + 1, name.size() - open - 2), false};
}

double parse_double(const std::string& field, std::size_t row) {
    try {
        std::size_t used = 0;
        const double v = std::stod(field, &used);
        if (used != field.size()) throw std::invalid_argument(field);
        return v;
    } catch (const std::exception&) {
        throw ParseError(fmt::format("row {}: '{}' is not a number", row, field));
    }
}

} // namespace

PosteriorSamples read_draws_csv(std::istream& in, const std::string& model_id,
                                const std::vector<std::string>& projects) {
    std::string line;
    if (!std::getline(in, line)) throw EmptyDataset("draws file is empty");
    std::vector<std::string> header;
    if (!csv::split_line(csv::clean_line(line, true), header)) throw ParseError("row 1: unterminated quote");
    if (header.size() < 3 || header[0] != "chain" || header[1] != "iteration")
        throw SchemaError("draws header must start with chain,iteration");

    PosteriorSamples s;
    s.model_id = model_id;
    s.projects = projects;
    for (std::size_t k = 2; k < header.size(); ++k) s.parameters.push_back(parse_parameter_name(header[k]));
    const auto spec = make_model(parse_research_question(model_id), projects.size());
    const auto expected = spec.parameter_names(projects);
    if (expected.size() != s.parameters.size())
        throw SchemaError(fmt::format("draws file has {} parameters, model '{}' has {}", s.parameters.size(), model_id,
                                      expected.size()));
    for (std::size_t k = 0; k < expected.size(); ++k) {
        if (s.parameters[k].name != expected[k])
            throw SchemaError(fmt::format("draws column {} is '{}', model '{}' expects '{}'", k + 3,
                                          s.parameters[k].name, model_id, expected[k]));
        s.parameters[k].positive = spec.positive(static_cast<Eigen::Index>(k));
    }
    const auto cols = static_cast<Eigen::Index>(s.parameters.size());

    std::vector<std::vector<Eigen::VectorXd>> rows;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        const auto cleaned = csv::clean_line(line, false);
        if (cleaned.empty()) continue;
        std::vector<std::string> fields;
        if (!csv::split_line(cleaned, fields)) throw ParseError(fmt::format("row {}: unterminated quote", row));
        if (fields.size() != header.size())
            throw ParseError(fmt::format("row {}: expected {} fields, got {}", row, header.size(), fields.size()));
        const auto chain = static_cast<std::size_t>(parse_double(fields[0], row));
        const auto iteration = static_cast<std::size_t>(parse_double(fields[1], row));
        if (chain < 1 || chain > rows.size() + 1)
            throw ParseError(fmt::format("row {}: chains must appear in order", row));
        if (chain == rows.size() + 1) rows.emplace_back();
        auto& target = rows[chain - 1];
        if (iteration != target.size() + 1) throw ParseError(fmt::format("row {}: iterations must be consecutive", row));
        Eigen::VectorXd v(cols);
        for (Eigen::Index j = 0; j < cols; ++j) v(j) = parse_double(fields[static_cast<std::size_t>(j) + 2], row);
        target.push_back(std::move(v));
    }
    if (rows.empty()) throw EmptyDataset("draws file has no draws");
    for (const auto& chain : rows) {
        if (chain.size() != rows.front().size()) throw ShapeMismatch("chains in the draws file differ in length");
        Eigen::MatrixXd m(static_cast<Eigen::Index>(chain.size()), cols);
        for (std::size_t i = 0; i < chain.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = chain[i].transpose();
        s.chains.push_back(std::move(m));
    }
    s.compute_diagnostics();
    return s;
}

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

bool r_hat_bad(const Diagnostic& d, double threshold) { return !std::isfinite(d.value) || d.value >= threshold; }

} // namespace

DiagnosticsOverview overview(const PosteriorSamples& samples, double threshold) {
    DiagnosticsOverview o;
    o.min_ess = std::numeric_limits<double>::infinity();
    for (const auto& d : samples.diagnostics) {
        if (std::isfinite(d.r_hat.value)) o.max_r_hat = std::max(o.max_r_hat, d.r_hat.value);
        else o.max_r_hat = std::numeric_limits<double>::infinity();
        if (std::isfinite(d.ess.value)) o.min_ess = std::min(o.min_ess, d.ess.value);
        if (r_hat_bad(d.r_hat, threshold) || (d.ess.flagged && !std::isfinite(d.ess.value))) ++o.flagged;
    }
    return o;
}

json diagnostics_to_json(const PosteriorSamples& samples, double threshold) {
    json j;
    j["format_version"] = kFormatVersion;
    j["model_id"] = samples.model_id;
    j["r_hat_threshold"] = threshold;
    const auto o = overview(samples, threshold);
    j["max_r_hat"] = number_or_null(o.max_r_hat);
    j["min_ess"] = number_or_null(o.min_ess);
    j["flagged"] = o.flagged;
    json chains = json::array();
    for (const auto& st : samples.stats) {
        chains.push_back({{"step_size", st.step_size},
                          {"mean_accept", st.mean_accept},
                          {"mean_leapfrog_steps", st.mean_steps},
                          {"divergences", st.divergences}});
    }
    j["chains"] = chains;
    json params = json::array();
    for (std::size_t k = 0; k < samples.parameters.size(); ++k) {
        json p = {{"name", samples.parameters[k].name}};
        if (k < samples.diagnostics.size()) {
            const auto& d = samples.diagnostics[k];
            p["r_hat"] = number_or_null(d.r_hat.value);
            p["r_hat_flagged"] = d.r_hat.flagged;
            p["ess"] = number_or_null(d.ess.value);
            p["ess_flagged"] = d.ess.flagged;
        }
        params.push_back(p);
    }
    j["parameters"] = params;
    return j;
}

// --- manifest ----------------------------------------------------------------

json chain_config_to_json(const ChainConfig& c) {
    return {{"warmup", c.warmup},
            {"samples", c.samples},
            {"chains", c.chains},
            {"target_accept", c.target_accept},
            {"integration_time", c.integration_time},
            {"jitter", c.jitter},
            {"max_steps", c.max_steps},
            {"dense_metric", c.dense_metric},
            {"seed", c.seed}};
}

json manifest_to_json(const RunManifest& m) {
    json j;
    j["format_version"] = kFormatVersion;
    j["tool_version"] = kToolVersion;
    j["command"] = m.command;
    if (!m.model_id.empty()) j["model_id"] = m.model_id;
    json inputs = json::array();
    for (const auto& in : m.inputs) inputs.push_back({{"path", in.path}, {"hash", in.hash}});
    j["inputs"] = inputs;
    if (!m.data_hash.empty()) j["data_hash"] = m.data_hash;
    if (!m.projects.empty()) j["projects"] = m.projects;
    if (m.has_chain_config) j["chain_config"] = chain_config_to_json(m.chain);
    json outputs = json::array();
    for (const auto& out : m.outputs) outputs.push_back({{"path", out.path}, {"hash", out.hash}});
    j["outputs"] = outputs;
    j["timestamps"] = {{"started", m.started}, {"finished", m.finished}};
    return j;
}

RunManifest manifest_from_json(const json& j) {
    try {
        if (j.at("format_version").get<int>() != kFormatVersion)
            throw ManifestMismatch(fmt::format("unsupported manifest format_version {}", j.at("format_version").dump()));
        RunManifest m;
        m.command = j.at("command").get<std::string>();
        m.model_id = j.value("model_id", std::string{});
        for (const auto& in : j.at("inputs"))
            m.inputs.push_back({in.at("path").get<std::string>(), in.at("hash").get<std::string>()});
        m.data_hash = j.value("data_hash", std::string{});
        m.projects = j.value("projects", std::vector<std::string>{});
        if (j.contains("chain_config")) {
            const auto& c = j.at("chain_config");
            m.has_chain_config = true;
            m.chain.warmup = c.at("warmup").get<int>();
            m.chain.samples = c.at("samples").get<int>();
            m.chain.chains = c.at("chains").get<int>();
            m.chain.target_accept = c.at("target_accept").get<double>();
            m.chain.integration_time = c.at("integration_time").get<double>();
            m.chain.jitter = c.at("jitter").get<double>();
            m.chain.max_steps = c.at("max_steps").get<int>();
            m.chain.dense_metric = c.at("dense_metric").get<bool>();
            m.chain.seed = c.at("seed").get<std::uint64_t>();
        }
        if (j.contains("outputs"))
            for (const auto& out : j.at("outputs"))
                m.outputs.push_back({out.at("path").get<std::string>(), out.at("hash").get<std::string>()});
        if (j.contains("timestamps")) {
            m.started = j["timestamps"].value("started", std::string{});
            m.finished = j["timestamps"].value("finished", std::string{});
        }
        return m;
    } catch (const json::exception& e) {
        throw ManifestMismatch(fmt::format("malformed manifest: {}", e.what()));
    }
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buf;
}

json spec_to_json(const ModelSpec& spec) {
    json fams = json::array();
    for (const auto& f : spec.families()) {
        fams.push_back({{"name", f.name},
                        {"submodel", to_string(f.submodel)},
                        {"term", to_string(f.term)},
                        {"varying", f.varying},
                        {"prior", describe(f.prior)}});
    }
    return {{"id", spec.id()}, {"projects", spec.projects()}, {"families", fams}};
}

// --- tables and reports -----------------------------------------------------

void write_table_csv(std::ostream& out, const std::vector<CoefficientSummary>& rows) {
    out << kTableHeader << '\n';
    for (const auto& r : rows) {
        out << csv::escape(r.project) << ',' << format_double(r.mean) << ',' << format_double(r.se) << ','
            << format_double(r.q025) << ',' << format_double(r.q975) << '\n';
    }
}

json table_to_json(const std::vector<CoefficientSummary>& rows) {
    json arr = json::array();
    for (const auto& r : rows)
        arr.push_back({{"project", r.project}, {"mean", r.mean}, {"se", r.se}, {"q025", r.q025}, {"q975", r.q975}});
    return {{"format_version", kFormatVersion}, {"columns", {"project", "mean", "se", "q025", "q975"}}, {"rows", arr}};
}

void write_curve_csv(std::ostream& out, const CounterfactualCurve& curve) {
    out << "grid,causal_mean,causal_lo,causal_hi,noncausal_mean,noncausal_lo,noncausal_hi,causal_median,"
           "noncausal_median\n";
    const bool has_noncausal = !curve.noncausal.empty();
    for (Eigen::Index g = 0; g < curve.grid.size(); ++g) {
        const auto& c = curve.causal[static_cast<std::size_t>(g)];
        out << format_double(curve.grid(g)) << ',' << format_double(c.mean) << ',' << format_double(c.lower) << ','
            << format_double(c.upper) << ',';
        if (has_noncausal) {
            const auto& n = curve.noncausal[static_cast<std::size_t>(g)];
            out << format_double(n.mean) << ',' << format_double(n.lower) << ',' << format_double(n.upper) << ','
                << format_double(c.median) << ',' << format_double(n.median) << '\n';
        } else {
            out << ",,," << format_double(c.median) << ",\n";
        }
    }
}

namespace {

json interval_json(const IntervalSummary& s) {
    return {{"mean", s.mean}, {"median", s.median}, {"lower", s.lower}, {"upper", s.upper}};
}

json variable_json(const VariableSummary& v) {
    return {{"Min", v.min},          {"Q1", v.q1},   {"Median", v.median},
            {"Q3", v.q3},            {"Max", v.max}, {"Skewness", number_or_null(v.skewness)}};
}

std::string variable_row(const ProjectSummary& r, const char* name, const VariableSummary& v) {
    return fmt::format("{},{},{},{},{},{},{},{},{},{}", csv::escape(r.project), r.mutants,
                       format_double(r.mutation_score), name, format_double(v.min), format_double(v.q1),
                       format_double(v.median), format_double(v.q3), format_double(v.max),
                       std::isfinite(v.skewness) ? format_double(v.skewness) : std::string("NA"));
}

} // namespace

json curve_to_json(const CounterfactualCurve& curve) {
    json points = json::array();
    for (Eigen::Index g = 0; g < curve.grid.size(); ++g) {
        json p = {{"grid", curve.grid(g)}, {"causal", interval_json(curve.causal[static_cast<std::size_t>(g)])}};
        if (!curve.noncausal.empty()) p["noncausal"] = interval_json(curve.noncausal[static_cast<std::size_t>(g)]);
        points.push_back(p);
    }
    return {{"format_version", kFormatVersion}, {"project", curve.project}, {"points", points}};
}

void write_describe_csv(std::ostream& out, const std::vector<ProjectSummary>& rows) {
    out << kDescribeHeader << '\n';
    for (const auto& r : rows) {
        out << variable_row(r, "Exec", r.exec) << '\n';
        out << variable_row(r, "Cover", r.cover) << '\n';
    }
}

json describe_to_json(const std::vector<ProjectSummary>& rows) {
    json arr = json::array();
    for (const auto& r : rows) {
        arr.push_back({{"Subject", r.project},
                       {"#Mutants", r.mutants},
                       {"MS", r.mutation_score},
                       {"Exec", variable_json(r.exec)},
                       {"Cover", variable_json(r.cover)}});
    }
    return {{"format_version", kFormatVersion}, {"subjects", arr}};
}

void write_ppc_csv(std::ostream& out, const std::vector<PredictiveCheckRow>& rows) {
    out << "project,observed,predicted_mean,predicted_median,predicted_lo,predicted_hi,covered\n";
    for (const auto& r : rows) {
        out << csv::escape(r.project) << ',' << format_double(r.observed) << ',' << format_double(r.predicted.mean)
            << ',' << format_double(r.predicted.median) << ',' << format_double(r.predicted.lower) << ','
            << format_double(r.predicted.upper) << ',' << (r.covers_observed() ? 1 : 0) << '\n';
    }
}

json ppc_to_json(const std::vector<PredictiveCheckRow>& rows) {
    json arr = json::array();
    std::size_t covered = 0;
    for (const auto& r : rows) {
        covered += r.covers_observed();
        arr.push_back({{"project", r.project},
                       {"observed", r.observed},
                       {"predicted", interval_json(r.predicted)},
                       {"covered", r.covers_observed()}});
    }
    return {{"format_version", kFormatVersion}, {"covered", covered}, {"projects", rows.size()}, {"rows", arr}};
}

json r_squared_to_json(const RSquared& r2) {
    return {{"format_version", kFormatVersion}, {"draws", r2.draws.size()}, {"r_squared", interval_json(r2.summary)}};
}

void write_prior_check_csv(std::ostream& out, const PriorPredictive& prior) {
    out << "bin_lo,bin_hi,count\n";
    for (std::size_t k = 0; k < prior.histogram.counts.size(); ++k) {
        out << format_double(prior.histogram.edges[k]) << ',' << format_double(prior.histogram.edges[k + 1]) << ','
            << prior.histogram.counts[k] << '\n';
    }
}

json prior_check_to_json(const PriorPredictive& prior) {
    return {{"format_version", kFormatVersion},
            {"simulations", prior.scores.size()},
            {"summary", interval_json(summarize_interval(prior.scores, 0.95))},
            {"edges", prior.histogram.edges},
            {"counts", prior.histogram.counts}};
}

namespace {

json node_set_json(const NodeSet& s) { return json(std::vector<std::string>(s.begin(), s.end())); }

std::string node_set_text(const NodeSet& s) {
    std::string out = "{";
    bool first = true;
    for (const auto& n : s) {
        out += (first ? "" : ", ") + n;
        first = false;
    }
    return out + "}";
}

} // namespace

json dag_report_to_json(const CausalDag& dag, std::string_view treatment, std::string_view outcome) {
    const auto paths = enumerate_paths(dag, treatment, outcome);
    const auto backdoor = backdoor_paths(dag, treatment, outcome);
    const auto sets = adjustment_sets(dag, treatment, outcome);
    json j;
    j["format_version"] = kFormatVersion;
    j["treatment"] = treatment;
    j["outcome"] = outcome;
    json all = json::array();
    for (const auto& p : paths) all.push_back(p.to_string());
    j["paths"] = all;
    json bd = json::array();
    for (const auto& p : backdoor) bd.push_back(p.to_string());
    j["backdoor_paths"] = bd;
    json valid = json::array();
    for (const auto& s : sets.valid) valid.push_back(node_set_json(s));
    j["valid_adjustment_sets"] = valid;
    json minimal = json::array();
    for (const auto& s : sets.minimal) minimal.push_back(node_set_json(s));
    j["minimal_adjustment_sets"] = minimal;
    j["treatment_descendants"] = node_set_json(dag.descendants(treatment));
    return j;
}

std::string dag_report_text(const CausalDag& dag, std::string_view treatment, std::string_view outcome) {
    const auto paths = enumerate_paths(dag, treatment, outcome);
    const auto backdoor = backdoor_paths(dag, treatment, outcome);
    const auto sets = adjustment_sets(dag, treatment, outcome);
    std::string out = fmt::format("paths from {} to {}: {}\n", treatment, outcome, paths.size());
    for (const auto& p : paths) out += "  " + p.to_string() + "\n";
    out += fmt::format("back-door paths: {}\n", backdoor.size());
    for (const auto& p : backdoor) out += "  " + p.to_string() + "\n";
    out += fmt::format("valid adjustment sets: {}\n", sets.valid.size());
    for (const auto& s : sets.valid) out += "  " + node_set_text(s) + "\n";
    out += "minimal adjustment sets:\n";
    for (const auto& s : sets.minimal) out += "  " + node_set_text(s) + "\n";
    const auto desc = dag.descendants(treatment);
    if (!desc.empty()) out += fmt::format("excluded (descendants of {}): {}\n", treatment, node_set_text(desc));
    return out;
}

// --- generator config -------------------------------------------------------

ScmConfig scm_config_from_json(const json& j) {
    try {
        ScmConfig cfg;
        cfg.seed = j.value("seed", std::uint64_t{1});
        const auto mutants = j.value("mutants_per_project", std::int64_t{2000});
        if (mutants < 1) throw ConfigError("mutants_per_project must be >= 1");
        cfg.mutants_per_project = static_cast<std::size_t>(mutants);
        const auto law = j.value("law", std::string{"standard-normal"});
        if (law == "standard-normal") cfg.law = CoverLaw::StandardNormal;
        else if (law == "negative-binomial") cfg.law = CoverLaw::NegativeBinomial;
        else throw ConfigError(fmt::format("unknown cover law '{}'", law));
        cfg.cover_mean = j.value("cover_mean", cfg.cover_mean);
        cfg.cover_dispersion = j.value("cover_dispersion", cfg.cover_dispersion);
        if (j.contains("projects")) {
            for (const auto& p : j.at("projects")) {
                ProjectTruth t;
                t.name = p.at("name").get<std::string>();
                t.alpha = p.at("alpha").get<double>();
                t.beta = p.at("beta").get<double>();
                t.gamma = p.at("gamma").get<double>();
                t.nu = p.value("nu", 0.0);
                t.lambda = p.value("lambda", 0.0);
                t.sigma = p.value("sigma", 1.0);
                cfg.projects.push_back(t);
            }
        } else if (j.contains("project_names")) {
            cfg.projects = sample_truth(j.at("project_names").get<std::vector<std::string>>(),
                                        j.value("truth_seed", cfg.seed));
        } else {
            throw ConfigError("generator config needs 'projects' or 'project_names'");
        }
        cfg.validate();
        return cfg;
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("malformed generator config: {}", e.what()));
    }
}

json truth_to_json(const std::vector<ProjectTruth>& truth) {
    json arr = json::array();
    for (const auto& t : truth) {
        arr.push_back({{"name", t.name},
                       {"alpha", t.alpha},
                       {"beta", t.beta},
                       {"gamma", t.gamma},
                       {"nu", t.nu},
                       {"lambda", t.lambda},
                       {"sigma", t.sigma},
                       {"total_cover_effect", t.total_cover_effect()}});
    }
    return {{"format_version", kFormatVersion}, {"projects", arr}};
}

} // namespace mutcausal
