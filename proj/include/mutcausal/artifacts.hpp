#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mutcausal/analysis.hpp"
#include "mutcausal/dag.hpp"
#include "mutcausal/dataset.hpp"
#include "mutcausal/model.hpp"
#include "mutcausal/sampler.hpp"
#include "mutcausal/scm.hpp"

namespace mutcausal {

using json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

// FNV-1a, 64 bit.
std::uint64_t fnv1a64(std::string_view bytes);
std::string content_hash(std::string_view bytes); // "fnv1a64:<16 hex digits>"
std::string read_file(const std::filesystem::path& path);
std::string hash_file(const std::filesystem::path& path);

// Writes to a sibling temporary file, then renames it over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

// %.17g, so a double survives a text round trip.
std::string format_double(double v);

// --- draws -----------------------------------------------------------------

// Header "chain,iteration,<parameter names>"; chain and iteration count
// from 1.
void write_draws_csv(std::ostream& out, const PosteriorSamples& samples);

// Rebuilds the draw matrices and recomputes diagnostics. The header must
// list the parameters of `model_id` in order; `projects` fixes the project
// order.
PosteriorSamples read_draws_csv(std::istream& in, const std::string& model_id,
                                const std::vector<std::string>& projects);

json diagnostics_to_json(const PosteriorSamples& samples, double r_hat_threshold = 1.01);

struct DiagnosticsOverview {
    double max_r_hat = 0;
    double min_ess = 0;
    std::size_t flagged = 0; // parameters with r_hat >= threshold, non-finite r_hat or flagged ESS
};
DiagnosticsOverview overview(const PosteriorSamples& samples, double r_hat_threshold = 1.01);

// --- manifest ----------------------------------------------------------------

struct FileRecord {
    std::string path;
    std::string hash;
};

struct RunManifest {
    std::string command;
    std::string model_id; // empty for commands that do not fit a model
    std::vector<FileRecord> inputs;
    std::string data_hash; // hash of the model-scale data the draws condition on
    std::vector<std::string> projects;
    bool has_chain_config = false;
    ChainConfig chain;
    std::vector<FileRecord> outputs; // paths relative to the manifest's directory
    std::string started;
    std::string finished;
};

json manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const json& j); // throws ManifestMismatch on a bad document
std::string utc_timestamp();

json chain_config_to_json(const ChainConfig& cfg);
json spec_to_json(const ModelSpec& spec);

// --- tables and reports -----------------------------------------------------

inline constexpr const char* kTableHeader = "project,mean,se,q025,q975";
void write_table_csv(std::ostream& out, const std::vector<CoefficientSummary>& rows);
json table_to_json(const std::vector<CoefficientSummary>& rows);

void write_curve_csv(std::ostream& out, const CounterfactualCurve& curve);
json curve_to_json(const CounterfactualCurve& curve);

inline constexpr const char* kDescribeHeader = "Subject,#Mutants,MS,Variable,Min,Q1,Median,Q3,Max,Skewness";
void write_describe_csv(std::ostream& out, const std::vector<ProjectSummary>& rows);
json describe_to_json(const std::vector<ProjectSummary>& rows);

void write_ppc_csv(std::ostream& out, const std::vector<PredictiveCheckRow>& rows);
json ppc_to_json(const std::vector<PredictiveCheckRow>& rows);
json r_squared_to_json(const RSquared& r2);
void write_prior_check_csv(std::ostream& out, const PriorPredictive& prior);
json prior_check_to_json(const PriorPredictive& prior);

json dag_report_to_json(const CausalDag& dag, std::string_view treatment, std::string_view outcome);
std::string dag_report_text(const CausalDag& dag, std::string_view treatment, std::string_view outcome);

// --- generator config -------------------------------------------------------

// {"seed":..,"mutants_per_project":..,"law":"standard-normal"|"negative-binomial",
//  "cover_mean":..,"cover_dispersion":..,
//  "projects":[{"name":..,"alpha":..,"beta":..,"gamma":..,"nu":..,"lambda":..,"sigma":..}]}
// or, instead of "projects", "project_names":[..] plus optional "truth_seed" to
// draw coefficients from the default ranges.
ScmConfig scm_config_from_json(const json& j); // throws ConfigError
json truth_to_json(const std::vector<ProjectTruth>& truth);

} // namespace mutcausal
