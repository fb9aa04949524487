#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mutcausal {

struct MutantRecord {
    std::string project;
    std::string mutant_id;
    std::int64_t exec = 0;  // times the test suite executes the mutated statement
    std::int64_t cover = 0; // distinct tests that execute it
    bool killed = false;
};

// Per-mutant observations grouped by project. Projects are indexed 0..P-1 in
// lexicographic name order and each project's records are contiguous.
class Dataset {
public:
    Dataset() = default;

    const std::vector<MutantRecord>& records() const { return records_; }
    const std::vector<std::string>& projects() const { return projects_; }
    std::size_t size() const { return records_.size(); }
    std::size_t project_count() const { return projects_.size(); }

    // Records of project p occupy [offset(p), offset(p + 1)).
    std::size_t offset(std::size_t p) const { return offsets_[p]; }
    std::size_t project_size(std::size_t p) const { return offsets_[p + 1] - offsets_[p]; }
    std::size_t project_index(const std::string& name) const; // throws UnknownProject

    std::size_t violations() const { return violations_; }

private:
    friend Dataset make_dataset(std::vector<MutantRecord>, bool);

    std::vector<MutantRecord> records_;
    std::vector<std::string> projects_;
    std::vector<std::size_t> offsets_;
    std::size_t violations_ = 0;
};

// Validates the measurement invariants (cover <= exec, cover == 0 implies
// exec == 0). Strict mode throws InvariantViolation on the first bad record;
// lenient mode keeps and counts them.
Dataset make_dataset(std::vector<MutantRecord> records, bool lenient = false);

struct LoadReport {
    std::size_t rows = 0;
    std::vector<std::string> warnings; // one per invariant-violating row (lenient)
};

inline constexpr const char* kRawCsvHeader = "project,mutant_id,exec,cover,killed";

Dataset read_csv(std::istream& in, bool lenient = false, LoadReport* report = nullptr);
Dataset load_csv(const std::string& path, bool lenient = false, LoadReport* report = nullptr);
void write_csv(std::ostream& out, const Dataset& ds);

struct VariableSummary {
    double min = 0;
    double q1 = 0;
    double median = 0;
    double q3 = 0;
    double max = 0;
    double skewness = 0; // adjusted Fisher-Pearson, raw scale; NaN when undefined
};

struct ProjectSummary {
    std::string project;
    std::size_t mutants = 0;
    double mutation_score = 0;
    VariableSummary exec;
    VariableSummary cover;
};

// Adjusted Fisher-Pearson standardized moment coefficient G1. NaN for n < 3
// or zero variance.
double sample_skewness(const Eigen::Ref<const Eigen::VectorXd>& values);

VariableSummary summarize_variable(const Eigen::Ref<const Eigen::VectorXd>& values);

std::vector<ProjectSummary> summarize(const Dataset& ds);

struct TransformParams {
    double mean = 0; // of log1p(raw)
    double sd = 1;   // sample sd (n - 1) of log1p(raw)
};

struct ProjectTransform {
    TransformParams exec;
    TransformParams cover;
};

inline double standardize(double raw, const TransformParams& t) { return (std::log1p(raw) - t.mean) / t.sd; }
inline double unstandardize(double z, const TransformParams& t) { return std::expm1(z * t.sd + t.mean); }

// Model-scale data. Same grouping as Dataset; killed is stored as 0/1.
struct TransformedDataset {
    std::vector<std::string> projects;
    std::vector<Eigen::Index> offsets; // P + 1 entries
    std::vector<std::string> mutant_ids;
    Eigen::VectorXd exec_z;
    Eigen::VectorXd cover_z;
    Eigen::VectorXd killed;
    // Empty when the data was generated directly on the model scale.
    std::vector<ProjectTransform> transforms;

    Eigen::Index size() const { return killed.size(); }
    std::size_t project_count() const { return projects.size(); }
    Eigen::Index project_begin(std::size_t p) const { return offsets[p]; }
    Eigen::Index project_size(std::size_t p) const { return offsets[p + 1] - offsets[p]; }
    std::size_t project_index(const std::string& name) const; // throws UnknownProject

    // Checks grouping and array lengths; throws ShapeMismatch.
    void validate() const;
};

// log1p then per-project standardization of exec and cover. Throws
// DegenerateVariance when a project's transformed variable is constant.
TransformedDataset preprocess(const Dataset& ds);

inline constexpr const char* kTransformedCsvHeader = "project,mutant_id,exec_z,cover_z,killed";

TransformedDataset read_transformed_csv(std::istream& in);
void write_transformed_csv(std::ostream& out, const TransformedDataset& data);

} // namespace mutcausal
