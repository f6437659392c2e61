#pragma once

// Rank recursions as weighted aggregates of heavy-tailed columns:
//
//   fixed length   Y_t = sum_i z_i Y_t^(i)            or  max_i z_i Y_t^(i)
//   random length  Y_t = sum_{j<=N_t} c Y_t^(j) + (1-c) q_t
//                        or max_{j<=N_t} c Y_t^(j) v (1-c) q_t
//
// and depth-truncated branching-tree realisations of the PageRank and
// max-linear recursions.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rank_extremes/heavytail.hpp"
#include "rank_extremes/rng.hpp"

namespace rank_extremes {

enum class Aggregate { Sum, Max };

/// How the in-degree N_t relates to the follower columns.
enum class Coupling {
    Independent,
    /// N_t is driven by the same uniform as column 1's innovation at t, so
    /// large in-degrees coincide with large follower values.
    Comonotone,
};

std::string to_string(Aggregate a);
std::string to_string(Coupling c);

struct RecursionConfig {
    double damping = 0.5;  ///< c; follower weight z_j = c, preference weight z* = 1 - c
    InDegreeSpec in_degree;
    TailSpec follower_tail;
    /// One entry per column; at least in_degree.n_max entries.
    std::vector<DependenceSpec> follower_dep;
    TailSpec preference_tail;
    Aggregate aggregate = Aggregate::Sum;
    Coupling coupling = Coupling::Independent;
    /// Out-degree law for branching-tree edges; empty means D = 1.
    std::optional<InDegreeSpec> out_degree;

    void validate() const;
    double z_star() const { return 1.0 - damping; }
};

/// Dependence list of `count` columns cycling through the given extremal
/// indices (see dependence_for_theta).
std::vector<DependenceSpec> cyclic_dependence(std::span<const double> thetas, double k,
                                              std::size_t count);

struct AggregatePath {
    std::vector<double> values;
    RecursionConfig config;
    RngSeed seed = 0;
};

/// One aggregate step from the active follower values (already unweighted)
/// and the preference draw q. An empty follower list yields (1-c) q.
double aggregate_step(std::span<const double> followers, double q, double damping,
                      Aggregate aggregate);

/// Stationary path of the random-length aggregate. Columns are mutually
/// independent (disjoint streams) and q_t is i.i.d.
AggregatePath sample_aggregate(const RecursionConfig& config, std::size_t n, RngSeed seed);

/// Sum and max aggregates from identical draws; sum[t] >= max[t].
struct PairedPaths {
    std::vector<double> sum;
    std::vector<double> max;
};
PairedPaths sample_aggregate_pair(const RecursionConfig& config, std::size_t n, RngSeed seed);

struct FixedColumn {
    double weight = 1.0;
    SequenceSpec seq;
};

/// Fixed-length weighted sum and maximum of independent stationary columns.
PairedPaths sample_fixed_aggregate(std::span<const FixedColumn> columns, std::size_t n,
                                   RngSeed seed);

/// Paths as single-column CSV, preceded by "# key=value" metadata lines in
/// this order: damping, in_degree.alpha, in_degree.n_max, follower.k,
/// follower.c, preference.beta, preference.c, aggregate, coupling, columns,
/// seed, n. Then a "value" header and one value per line.
void write_path_csv(std::ostream& os, const AggregatePath& path);

enum class LeafRule { Preference };

struct TbtSample {
    std::vector<double> root_values;
    std::size_t depth = 0;
    LeafRule leaf_rule = LeafRule::Preference;
};

/// Draw sources of one tree node. simulate_tbt builds these from a
/// RecursionConfig; tests substitute deterministic laws.
struct TbtLaws {
    std::function<std::int64_t(Rng&)> in_degree;
    std::function<std::int64_t(Rng&)> out_degree;
    std::function<double(Rng&)> preference;
    double damping = 0.5;
    double mean_in_degree = 1.0;
    Aggregate aggregate = Aggregate::Sum;
};

TbtLaws make_tbt_laws(const RecursionConfig& config);

/// Expected number of nodes in one depth-truncated tree.
double expected_tree_size(double mean_in_degree, std::size_t depth);

/// Depth-truncated Galton-Watson expansion of R = sum_j (c/D_j) R^(j) + (1-c) q
/// (or the max form); leaves close with (1-c) q. Throws ResourceError when
/// the expected tree size reaches 1e8 nodes.
TbtSample simulate_tbt(const RecursionConfig& config, std::size_t depth, std::size_t n_roots,
                       RngSeed seed);
TbtSample simulate_tbt(const TbtLaws& laws, std::size_t depth, std::size_t n_roots,
                       RngSeed seed);

struct TailRatioRow {
    double quantile = 0.0;
    double threshold = 0.0;  ///< quantile of the max path
    std::size_t exceed_sum = 0;
    std::size_t exceed_max = 0;
    double ratio = 0.0;  ///< P^{sum > x} / P^{max > x}
    double band_lo = 0.0;
    double band_hi = 0.0;
    bool reliable = true;  ///< both counts >= 50
};

/// Paired-seed comparison of sum and max exceedance probabilities at upper
/// quantiles in (0.9, 1). Bands are +-2 standard errors of the log ratio.
std::vector<TailRatioRow> compare_tail_sum_max(const RecursionConfig& config, std::size_t n,
                                               std::span<const double> quantiles, RngSeed seed);

}  // namespace rank_extremes
