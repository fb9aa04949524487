#include "mutcausal/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "mutcausal/csv.hpp"
#include "mutcausal/errors.hpp"
#include "mutcausal/math.hpp"

namespace mutcausal {

namespace {

// Empty string when the record satisfies the measurement invariants.
std::string invariant_problem(const MutantRecord& r) {
    if (r.exec < 0 || r.cover < 0) return "exec and cover must be non-negative";
    if (r.cover > r.exec) return fmt::format("cover={} exceeds exec={}", r.cover, r.exec);
    if (r.cover == 0 && r.exec != 0) return fmt::format("exec={} with cover=0", r.exec);
    return {};
}

std::int64_t parse_count(const std::string& field, std::size_t row, const char* column) {
    std::int64_t value = 0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (field.empty() || ec != std::errc{} || ptr != last || value < 0 || field.front() == '-') {
        throw ParseError(fmt::format("row {}, column '{}': expected a non-negative integer, got '{}'", row,
                                     column, field));
    }
    return value;
}

double parse_real(const std::string& field, std::size_t row, const char* column) {
    double value = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(value)) {
        throw ParseError(fmt::format("row {}, column '{}': expected a finite real, got '{}'", row, column, field));
    }
    return value;
}

bool parse_killed(const std::string& field, std::size_t row) {
    if (field == "1") return true;
    if (field == "0") return false;
    throw ParseError(fmt::format("row {}, column 'killed': expected 0 or 1, got '{}'", row, field));
}

void expect_header(std::istream& in, const char* header) {
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("missing header line");
    const auto cleaned = csv::clean_line(line, true);
    if (cleaned != header) throw SchemaError(fmt::format("header must be exactly '{}', got '{}'", header, cleaned));
}

} // namespace

std::size_t Dataset::project_index(const std::string& name) const {
    const auto it = std::lower_bound(projects_.begin(), projects_.end(), name);
    if (it == projects_.end() || *it != name) throw UnknownProject(fmt::format("unknown project '{}'", name));
    return static_cast<std::size_t>(it - projects_.begin());
}

Dataset make_dataset(std::vector<MutantRecord> records, bool lenient) {
    if (records.empty()) throw EmptyDataset("dataset has no records");
    std::size_t violations = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto problem = invariant_problem(records[i]);
        if (problem.empty()) continue;
        if (records[i].exec < 0 || records[i].cover < 0 || !lenient) {
            throw InvariantViolation(fmt::format("record {} ({}): {}", i, records[i].mutant_id, problem));
        }
        ++violations;
    }
    std::stable_sort(records.begin(), records.end(),
                     [](const MutantRecord& a, const MutantRecord& b) { return a.project < b.project; });
    Dataset ds;
    ds.records_ = std::move(records);
    ds.violations_ = violations;
    ds.offsets_.push_back(0);
    for (std::size_t i = 0; i < ds.records_.size(); ++i) {
        if (i > 0 && ds.records_[i].project != ds.records_[i - 1].project) ds.offsets_.push_back(i);
        if (i == 0 || ds.records_[i].project != ds.records_[i - 1].project)
            ds.projects_.push_back(ds.records_[i].project);
    }
    ds.offsets_.push_back(ds.records_.size());
    return ds;
}

Dataset read_csv(std::istream& in, bool lenient, LoadReport* report) {
    expect_header(in, kRawCsvHeader);
    std::vector<MutantRecord> records;
    std::vector<std::string> warnings;
    std::vector<std::string> fields;
    std::string line;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        const auto cleaned = csv::clean_line(line, false);
        if (cleaned.empty()) continue;
        if (!csv::split_line(cleaned, fields)) throw ParseError(fmt::format("row {}: unterminated quote", row));
        if (fields.size() != 5) {
            throw ParseError(fmt::format("row {}: expected 5 columns, found {}", row, fields.size()));
        }
        if (fields[0].empty()) throw ParseError(fmt::format("row {}, column 'project': empty project name", row));
        MutantRecord r{fields[0], fields[1], parse_count(fields[2], row, "exec"),
                       parse_count(fields[3], row, "cover"), parse_killed(fields[4], row)};
        if (const auto problem = invariant_problem(r); !problem.empty()) {
            if (!lenient) throw InvariantViolation(fmt::format("row {}: {}", row, problem));
            warnings.push_back(fmt::format("row {}: {}", row, problem));
        }
        records.push_back(std::move(r));
    }
    if (records.empty()) throw EmptyDataset("CSV has a header but no data rows");
    auto ds = make_dataset(std::move(records), lenient);
    if (report) {
        report->rows = ds.size();
        report->warnings = std::move(warnings);
    }
    return ds;
}

Dataset load_csv(const std::string& path, bool lenient, LoadReport* report) {
    std::ifstream in(path);
    if (!in) throw ParseError(fmt::format("cannot open '{}'", path));
    return read_csv(in, lenient, report);
}

void write_csv(std::ostream& out, const Dataset& ds) {
    out << kRawCsvHeader << '\n';
    for (const auto& r : ds.records()) {
        out << csv::escape(r.project) << ',' << csv::escape(r.mutant_id) << ',' << r.exec << ',' << r.cover << ','
            << (r.killed ? 1 : 0) << '\n';
    }
}

double sample_skewness(const Eigen::Ref<const Eigen::VectorXd>& values) {
    const auto n = static_cast<double>(values.size());
    if (values.size() < 3) return std::numeric_limits<double>::quiet_NaN();
    const Eigen::ArrayXd centered = values.array() - values.mean();
    const double m2 = centered.square().sum() / n;
    const double m3 = centered.cube().sum() / n;
    if (m2 <= 0) return std::numeric_limits<double>::quiet_NaN();
    const double g1 = m3 / std::pow(m2, 1.5);
    return g1 * std::sqrt(n * (n - 1)) / (n - 2);
}

VariableSummary summarize_variable(const Eigen::Ref<const Eigen::VectorXd>& values) {
    Eigen::VectorXd sorted = values;
    std::sort(sorted.data(), sorted.data() + sorted.size());
    return {sorted(0),
            quantile_sorted(sorted, 0.25),
            quantile_sorted(sorted, 0.5),
            quantile_sorted(sorted, 0.75),
            sorted(sorted.size() - 1),
            sample_skewness(values)};
}

std::vector<ProjectSummary> summarize(const Dataset& ds) {
    std::vector<ProjectSummary> out;
    for (std::size_t p = 0; p < ds.project_count(); ++p) {
        const auto n = ds.project_size(p);
        Eigen::VectorXd exec(n), cover(n);
        std::size_t killed = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& r = ds.records()[ds.offset(p) + i];
            exec(i) = static_cast<double>(r.exec);
            cover(i) = static_cast<double>(r.cover);
            killed += r.killed ? 1 : 0;
        }
        out.push_back({ds.projects()[p], n, static_cast<double>(killed) / static_cast<double>(n),
                       summarize_variable(exec), summarize_variable(cover)});
    }
    return out;
}

std::size_t TransformedDataset::project_index(const std::string& name) const {
    const auto it = std::find(projects.begin(), projects.end(), name);
    if (it == projects.end()) throw UnknownProject(fmt::format("unknown project '{}'", name));
    return static_cast<std::size_t>(it - projects.begin());
}

void TransformedDataset::validate() const {
    const auto n = killed.size();
    if (exec_z.size() != n || cover_z.size() != n) throw ShapeMismatch("covariate and outcome lengths differ");
    if (!mutant_ids.empty() && static_cast<Eigen::Index>(mutant_ids.size()) != n)
        throw ShapeMismatch("mutant id count differs from record count");
    if (offsets.size() != projects.size() + 1 || offsets.front() != 0 || offsets.back() != n)
        throw ShapeMismatch("project offsets do not cover the records");
    if (!std::is_sorted(offsets.begin(), offsets.end())) throw ShapeMismatch("project offsets are not monotone");
    if (!transforms.empty() && transforms.size() != projects.size())
        throw ShapeMismatch("transform count differs from project count");
}

namespace {

TransformParams fit_transform(const Eigen::VectorXd& log_values, const std::string& project, const char* variable) {
    const double sd = std::sqrt(sample_variance(log_values));
    if (!(sd > 0)) {
        throw DegenerateVariance(
            fmt::format("project '{}': log1p({}) has zero variance; the project cannot be modeled", project, variable));
    }
    return {log_values.mean(), sd};
}

} // namespace

TransformedDataset preprocess(const Dataset& ds) {
    TransformedDataset out;
    const auto n = static_cast<Eigen::Index>(ds.size());
    out.projects = ds.projects();
    out.exec_z.resize(n);
    out.cover_z.resize(n);
    out.killed.resize(n);
    out.mutant_ids.reserve(ds.size());
    for (std::size_t p = 0; p <= ds.project_count(); ++p) out.offsets.push_back(static_cast<Eigen::Index>(
        p < ds.project_count() ? ds.offset(p) : ds.size()));

    for (std::size_t p = 0; p < ds.project_count(); ++p) {
        const auto begin = ds.offset(p);
        const auto m = static_cast<Eigen::Index>(ds.project_size(p));
        Eigen::VectorXd exec_log(m), cover_log(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            const auto& r = ds.records()[begin + static_cast<std::size_t>(i)];
            exec_log(i) = std::log1p(static_cast<double>(r.exec));
            cover_log(i) = std::log1p(static_cast<double>(r.cover));
        }
        const ProjectTransform t{fit_transform(exec_log, ds.projects()[p], "exec"),
                                 fit_transform(cover_log, ds.projects()[p], "cover")};
        out.transforms.push_back(t);
        const auto at = static_cast<Eigen::Index>(begin);
        out.exec_z.segment(at, m) = (exec_log.array() - t.exec.mean) / t.exec.sd;
        out.cover_z.segment(at, m) = (cover_log.array() - t.cover.mean) / t.cover.sd;
    }
    for (std::size_t i = 0; i < ds.size(); ++i) {
        out.killed(static_cast<Eigen::Index>(i)) = ds.records()[i].killed ? 1.0 : 0.0;
        out.mutant_ids.push_back(ds.records()[i].mutant_id);
    }
    return out;
}

TransformedDataset read_transformed_csv(std::istream& in) {
    expect_header(in, kTransformedCsvHeader);
    struct Row {
        std::string project, id;
        double exec_z, cover_z, killed;
    };
    std::vector<Row> rows;
    std::vector<std::string> fields;
    std::string line;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        const auto cleaned = csv::clean_line(line, false);
        if (cleaned.empty()) continue;
        if (!csv::split_line(cleaned, fields) || fields.size() != 5)
            throw ParseError(fmt::format("row {}: expected 5 columns", row));
        rows.push_back({fields[0], fields[1], parse_real(fields[2], row, "exec_z"), parse_real(fields[3], row, "cover_z"),
                        parse_killed(fields[4], row) ? 1.0 : 0.0});
    }
    if (rows.empty()) throw EmptyDataset("CSV has a header but no data rows");
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.project < b.project; });

    TransformedDataset out;
    const auto n = static_cast<Eigen::Index>(rows.size());
    out.exec_z.resize(n);
    out.cover_z.resize(n);
    out.killed.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        if (i == 0 || r.project != rows[static_cast<std::size_t>(i - 1)].project) {
            out.projects.push_back(r.project);
            out.offsets.push_back(i);
        }
        out.mutant_ids.push_back(r.id);
        out.exec_z(i) = r.exec_z;
        out.cover_z(i) = r.cover_z;
        out.killed(i) = r.killed;
    }
    out.offsets.push_back(n);
    return out;
}

void write_transformed_csv(std::ostream& out, const TransformedDataset& data) {
    out << kTransformedCsvHeader << '\n';
    for (std::size_t p = 0; p < data.project_count(); ++p) {
        for (auto i = data.project_begin(p); i < data.project_begin(p) + data.project_size(p); ++i) {
            const auto id = data.mutant_ids.empty() ? std::to_string(i) : data.mutant_ids[static_cast<std::size_t>(i)];
            out << csv::escape(data.projects[p]) << ',' << csv::escape(id) << ','
                << fmt::format("{:.17g},{:.17g},{}", data.exec_z(i), data.cover_z(i), data.killed(i) > 0.5 ? 1 : 0)
                << '\n';
        }
    }
}

} // namespace mutcausal
