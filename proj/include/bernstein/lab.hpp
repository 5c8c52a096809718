#pragma once

// Batch experiment runner: configuration, grid execution with per-cell fault
// isolation, and CSV/JSON reports.

#include "bernstein/expfit.hpp"
#include "bernstein/zeros.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace bernstein {

enum class Experiment { Profile, ClassC, Quotient, Exponent, Zeros, Kernel, Verify };

std::string_view experiment_name(Experiment e);
Experiment experiment_from_name(std::string_view name);

constexpr std::uint64_t kDefaultSeed = 0xB3A57E1DULL;

struct ExperimentConfig {
    Experiment experiment = Experiment::Quotient;
    CurveSpec curve;
    int k_min = 1;
    int k_max = 6;
    std::vector<double> r_values{1.0};
    /// Floor on the working precision. Degree-dependent experiments use
    /// max(precision_bits, precision_for_degree(k)); 0 means no floor.
    int precision_bits = 0;
    int samples = 1024;
    std::uint64_t seed = kDefaultSeed;
    std::string out_dir = "bernstein_out";
    std::string cache_dir;
    int jobs = 1;

    std::vector<double> t_grid;  // profile and classc
    QuotientMethod method = QuotientMethod::GramL2;
    int trials = 64;  // random_search
    LowerBoundMode mode = LowerBoundMode::Thm14;
    double band = 0.4;
    int k_floor = 2;
    std::optional<TheoreticalExponent> theory;
    std::vector<int> criteria;  // verify: empty means all

    /// Validates and throws ConfigInvalid with the JSON pointer of the offending value.
    static ExperimentConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

/// Config used when a subcommand runs without --config.
ExperimentConfig default_config(Experiment e);

/// Resolves the named built-in functions ("zoo" strings) inside a curve document.
CurveSpec curve_from_json(const nlohmann::json& j);

/// Stream seed of one (k, r) grid cell.
std::uint64_t cell_seed(std::uint64_t seed, const std::string& curve_digest, int k, double r);

/// One flat report row; columns curve_label, experiment, k, r, value, aux1, aux2, status.
struct ReportRow {
    std::string curve_label, experiment, k, r, value, aux1, aux2, status;
};

struct RunResult {
    int exit_status = 0;
    int cells = 0;
    int failed_cells = 0;
    std::vector<ReportRow> rows;
    nlohmann::json report;
    std::filesystem::path csv_path;
    std::filesystem::path json_path;
};

/// Runs the configured experiment and writes report.csv and report.json to out_dir.
RunResult run_config(const ExperimentConfig& cfg);

std::string csv_header_line();
std::string csv_line(const ReportRow& row);
/// The CSV file without its '#' comment lines.
std::string csv_body(const std::filesystem::path& csv_path);

// ------------------------------------------------------------ acceptance suite

struct CriterionResult {
    int id = 0;
    std::string title;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
    double limit_seconds = 0.0;  // 0 when the criterion has no runtime bound
};

struct AcceptanceOptions {
    std::vector<int> criteria;  // empty means 1..10
    int jobs = 1;
    std::uint64_t seed = kDefaultSeed;
    int precision_floor = 0;
    /// Scratch directory for the reproducibility criterion.
    std::filesystem::path scratch_dir = std::filesystem::temp_directory_path() / "bernstein_acceptance";
    std::function<void(const CriterionResult&)> on_result;
};

constexpr int kCriteriaCount = 10;

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts);

}  // namespace bernstein
