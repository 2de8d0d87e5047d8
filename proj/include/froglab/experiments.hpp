#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "froglab/brw.hpp"
#include "froglab/stats.hpp"

namespace froglab {

/// Rejected configuration; `violations` lists every problem found.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> violations);
    [[nodiscard]] const std::vector<std::string>& violations() const { return violations_; }

private:
    std::vector<std::string> violations_;
};

struct SweepConfig {
    int d = 2;
    std::vector<double> alphas;
    std::vector<double> ws;
    int arena_radius = 100;
    int n_boxes = 32;
    std::int64_t trials = 200;
    std::int64_t cert_budget = 400;
    std::uint64_t seed = 1;
    std::string strategy = "lines";
    /// Recurrence proxy: per-frog step cap and per-run step budget.
    std::int64_t max_steps = 2000;
    std::int64_t step_budget = 1'000'000;
    double proxy_threshold = 0.05;
    std::string out_dir = ".";
    std::string partial_file;  // empty: <out_dir>/sweep.partial.jsonl
    unsigned workers = 0;

    [[nodiscard]] nlohmann::ordered_json to_json() const;
    [[nodiscard]] std::string partial_path() const;
};

/// Grid entries may be arrays or {"start", "stop", "num"} linspaces.
SweepConfig validate_config(const nlohmann::json& raw);
SweepConfig validate_config_text(const std::string& text);

std::vector<double> linspace(double start, double stop, int num);

enum class Classification { recurrent_like, transient_like, undetermined, conflict };
std::string to_string(Classification c);
Classification parse_classification(const std::string& s);

struct PhasePointEstimate {
    std::size_t alpha_index = 0;
    std::size_t w_index = 0;
    int d = 2;
    double alpha = 0.0;
    double w = 0.0;
    MeanCi proxy;
    std::int64_t proxy_truncated = 0;
    double theta = 0.0;
    double mu_hat = 0.0;
    double mu_ci_low = 0.0;
    double mu_ci_high = 0.0;
    double truncated_mass = 0.0;
    Verdict verdict = Verdict::inconclusive;
    Classification classification = Classification::undetermined;
    std::int64_t trials = 0;
    std::uint64_t seed = 0;
    double g_alpha = 1.0;
    std::string error;

    [[nodiscard]] nlohmann::ordered_json to_json() const;
    static PhasePointEstimate from_json(const nlohmann::json& j);
};

/// Proxy lower bound above the threshold: recurrent-like; certified:
/// transient-like; both: conflict.
Classification classify(const MeanCi& proxy, Verdict verdict, double threshold);

struct SweepGrid {
    SweepConfig config;
    std::vector<PhasePointEstimate> points;  // alpha-major order
};

/// One grid point; pure function of (config, indices).
PhasePointEstimate evaluate_point(const SweepConfig& config, std::size_t alpha_index, std::size_t w_index);

/// Every grid point, resuming from and appending to the partial-results
/// file. `max_new_points` (for testing interruption) stops after that many
/// fresh evaluations.
SweepGrid run_sweep(const SweepConfig& config, std::optional<std::size_t> max_new_points = std::nullopt);

enum class OutputFormat { csv, json };
OutputFormat parse_format(const std::string& s);

inline const char* kCsvHeader =
    "d,alpha,w,proxy_frac,proxy_ci_low,proxy_ci_high,mu_hat,mu_ci_low,mu_ci_high,verdict,classification,trials,"
    "seed,g_alpha";

std::string results_csv(const SweepGrid& grid);
std::string results_json(const SweepGrid& grid);
SweepGrid load_results_json(const std::string& text);

/// Write `content` to `path` through a temporary file and rename; nothing
/// is left behind on failure.
void write_atomic(const std::string& path, const std::string& content);

/// Writes sweep.csv or sweep.json under config.out_dir; returns the path.
std::string emit_results(const SweepGrid& grid, OutputFormat format);

struct BoundaryColumn {
    double alpha = 0.0;
    /// Smallest w classified transient-like, if any.
    std::optional<double> boundary;
    std::int64_t resolved = 0;
    std::int64_t conflicts = 0;
};

struct BoundaryReport {
    int d = 2;
    std::vector<BoundaryColumn> columns;
    /// Boundary nonincreasing in alpha (columns without a transient-like
    /// point count as above the grid).
    bool nonincreasing = true;
    std::int64_t conflicts_excluded = 0;
    /// Some column has no resolved point.
    bool partial = false;

    [[nodiscard]] nlohmann::ordered_json to_json() const;
};

BoundaryReport boundary_monotonicity_report(const SweepGrid& grid);

struct DimensionComparison {
    std::vector<double> alphas;
    /// boundary(d_high) >= boundary(d_low) at every shared alpha with both resolved.
    bool increasing_in_d = true;
    std::int64_t compared = 0;
};

DimensionComparison compare_dimensions(const BoundaryReport& low, const BoundaryReport& high);

}  // namespace froglab
