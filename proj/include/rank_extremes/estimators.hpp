#pragma once

// Tail-index and extremal-index estimators for stationary paths.
//
// Thresholds come from the path's own empirical quantiles using the
// nearest-rank rule (no interpolation), so every estimate is a bit-exact
// function of its input.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "rank_extremes/rng.hpp"

namespace rank_extremes {

struct TopFraction {
    double p = 0.01;
};
struct TopCount {
    std::size_t count = 100;
};
struct QuantileRule {
    double q = 0.99;
};
using ThresholdRule = std::variant<TopFraction, TopCount, QuantileRule>;

struct EstimateReport {
    std::string method;
    double estimate = 0.0;
    /// Estimate before clamping to (0, 1]; equals estimate unless clamped.
    double raw_estimate = 0.0;
    bool clamped = false;
    std::size_t n = 0;
    double threshold = 0.0;
    std::size_t exceedances = 0;
    std::optional<std::size_t> block_length;
    std::optional<std::size_t> blocks;
    std::optional<std::size_t> run_gap;
    std::optional<std::size_t> replications;
    /// Replication maxima not exceeding the threshold (definition estimator).
    std::optional<std::size_t> non_exceeding_maxima;
    std::optional<double> tau;
    std::optional<RngSeed> seed;
};

void to_json(nlohmann::json& j, const EstimateReport& r);

/// Column names of the batch CSV layout, comma separated.
std::string estimate_csv_header();
std::string estimate_csv_row(const EstimateReport& r);

/// Nearest-rank quantile: the ceil(q n)-th smallest value (q in [0, 1]).
double nearest_rank_quantile(std::span<const double> x, double q);

/// Default block length floor(sqrt n).
std::size_t default_block_length(std::size_t n);
/// Default run gap ceil(ln n), at least 1.
std::size_t default_run_gap(std::size_t n);

/// Hill estimate 1 / mean_i ln(X_(i) / X_(m+1)) over the top m order
/// statistics. Requires m >= min_count.
EstimateReport hill(std::span<const double> path, const ThresholdRule& rule,
                    std::size_t min_count = 10);

/// Blocks estimator ln(share of block maxima <= u) / (b ln(1 - p_u)) over
/// floor(n/b) disjoint blocks; p_u is the exceedance rate inside them.
EstimateReport blocks_theta(std::span<const double> path, double u, std::size_t block_length);

/// Interexceedance-time moment estimator.
EstimateReport intervals_theta(std::span<const double> path, double u);

/// Definition-based estimator over R replications of length n: u_n is the
/// pooled (1 - tau/n) quantile and theta = -ln(share of maxima <= u_n) / tau.
///
/// Streaming form so replications need not be held in memory: only the
/// pooled top order statistics and the per-path maxima are retained.
class DefinitionThetaAccumulator {
public:
    DefinitionThetaAccumulator(std::size_t path_length, std::size_t replications, double tau);

    void add_path(std::span<const double> path);
    EstimateReport finish() const;

private:
    std::size_t path_length_;
    std::size_t replications_;
    double tau_;
    std::size_t keep_;  // rank from the top of the pooled quantile
    std::priority_queue<double, std::vector<double>, std::greater<>> top_;
    std::vector<double> maxima_;
};

EstimateReport definition_theta(std::span<const std::vector<double>> paths, double tau);

struct ClusterStats {
    std::size_t clusters = 0;
    std::size_t exceedances = 0;
    double mean_size = 0.0;   ///< exceedances / clusters
    double theta_runs = 0.0;  ///< clusters / exceedances
};

/// Runs declustering: an exceedance starts a new cluster when at least
/// run_gap non-exceedances separate it from the previous one.
ClusterStats mean_cluster_size(std::span<const double> path, double u, std::size_t run_gap);

}  // namespace rank_extremes
