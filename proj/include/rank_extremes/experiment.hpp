#pragma once

// Verification pipeline: simulate per config, run the estimator battery over
// replications, compare against the closed-form predictions and record
// pass/fail against the configured tolerances.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rank_extremes/config.hpp"
#include "rank_extremes/theory.hpp"

namespace rank_extremes {

struct EstimatorSummary {
    std::string aggregate;  ///< "sum" or "max"
    std::string estimator;  ///< hill, blocks, intervals, runs, definition
    std::vector<double> values;  ///< per replication; NaN where the estimator failed
    double median = 0.0;
    double q10 = 0.0;
    double q90 = 0.0;
    std::size_t failures = 0;
};

/// value passes when lo <= value <= hi.
struct Check {
    std::string name;
    double value = 0.0;
    double target = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    bool pass = false;
};

struct VerificationReport {
    ExperimentKind kind = ExperimentKind::VerifyThm2;
    std::string config_hash;
    RngSeed seed = 0;
    std::string timestamp;
    std::vector<std::pair<std::string, std::string>> config;
    std::optional<TheoryPrediction> prediction;
    std::vector<EstimatorSummary> estimates;
    std::vector<Check> checks;
    nlohmann::json details = nlohmann::json::object();
    bool pass = false;

    const EstimatorSummary* find(const std::string& aggregate, const std::string& estimator) const;
};

/// Top-level report keys, in output order.
const std::vector<std::string>& report_fields();
nlohmann::json to_json(const VerificationReport& report);
/// Empty string when `j` carries every documented field with the right
/// type, otherwise a description of the first problem.
std::string validate_report_json(const nlohmann::json& j);

/// Median of the finite entries (NaN when none).
double median_of(std::vector<double> values);

/// Runs `body(i)` for i in [0, count) on up to `jobs` threads. Results must
/// be written by index, which keeps reductions independent of scheduling.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& body);

struct RunOptions {
    bool write_files = true;
    /// Directory for outputs; defaults to cfg.out when empty.
    std::string out_dir;
};

/// Throws on module errors; files written before the failure are removed.
VerificationReport run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

}  // namespace rank_extremes
