#pragma once

// Experiment configuration: a flat "key = value" text format. Lists are
// comma separated, '#' starts a comment, and every key has a default so a
// file only needs the keys it changes.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "rank_extremes/recursion.hpp"
#include "rank_extremes/rng.hpp"

namespace rank_extremes {

enum class ExperimentKind { VerifyThm1, VerifyThm2, VerifyThm3, VerifyThm4, TailEquivalence, GraphDemo };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& name);

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::VerifyThm2;
    RngSeed seed = 20240601;
    std::size_t replications = 50;
    std::size_t n = 1'000'000;
    std::size_t jobs = 1;
    std::string out = "out";
    bool write_paths = true;

    // Fixed-length aggregates (thm1..thm3): one entry per column.
    std::vector<double> weights{1.0, 1.0, 2.0};
    std::vector<double> tail_indices{2.0, 2.0, 2.0};
    std::vector<double> scales{1.0, 1.0, 1.0};
    std::vector<double> thetas{1.0, 0.5, 0.25};

    // Random-length aggregate (thm4, tail-eq).
    double damping = 0.5;
    double alpha = 2.0;
    std::int64_t n_max = 100;
    double follower_k = 1.2;
    double follower_c = 1.0;
    std::vector<double> follower_thetas{1.0};
    double beta = 3.0;
    double preference_c = 1.0;
    Coupling coupling = Coupling::Independent;

    // Estimators.
    double hill_fraction = 0.01;
    double blocks_quantile = 0.999;
    std::size_t block_length = 0;  ///< 0 selects floor(sqrt n)
    double intervals_quantile = 0.995;
    double runs_quantile = 0.99;
    std::size_t run_gap = 0;  ///< 0 selects ceil(ln n)
    /// Comma-separated subset of blocks, intervals, runs, definition.
    std::string theta_estimators = "blocks,intervals";
    /// Aggregates the tail-index and extremal-index checks apply to.
    std::string k_aggregates = "sum,max";
    std::string theta_aggregates = "sum,max";
    std::size_t definition_replications = 500;
    std::size_t definition_n = 100'000;
    double definition_tau = 1.0;

    // Checks and tolerances.
    bool check_k = true;
    bool check_theta = true;
    bool check_sum_max = true;
    double tol_k_rel = 0.10;
    double tol_theta = 0.08;
    double tol_sum_max = 0.06;
    std::vector<double> tail_quantiles{0.9999};
    double ratio_lo = 0.85;
    double ratio_hi = 1.15;

    // Graph demo.
    std::size_t graph_n = 10'000;
    double graph_alpha = 1.5;
    std::vector<double> top_ps{0.001, 0.01, 0.1};
    std::size_t walk_trials = 2000;
    std::size_t overlap_min = 5;
    /// "pareto" draws q from Pareto(graph_beta); "uniform" gives q_i = 1/n.
    std::string graph_preference = "pareto";
    double graph_beta = 0.5;

    void validate() const;
    RecursionConfig recursion_config() const;
    std::vector<FixedColumn> fixed_columns() const;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Defaults for a kind; the fixed-length and random-length fields are
/// preset to a representative configuration of that experiment.
ExperimentConfig default_config(ExperimentKind kind);

/// Ordered key/value view of every field.
std::vector<std::pair<std::string, std::string>> to_key_values(const ExperimentConfig& cfg);
/// Apply one "key=value" assignment. Throws ConfigError on unknown keys or
/// malformed values.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

std::string serialize(const ExperimentConfig& cfg);
/// The "key = value" assignments of a config body, in file order.
std::vector<std::pair<std::string, std::string>> parse_assignments(const std::string& text);
/// Parses a config file body. When `experiment` is set, the remaining keys
/// are applied on top of that kind's defaults.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string read_text_file(const std::string& path);

/// FNV-1a hash of the serialized config, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace rank_extremes
