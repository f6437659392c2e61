#pragma once

// Rank computations on explicit directed graphs: PageRank power iteration,
// the max-linear fixed point, and hitting times of the PageRank surfer.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "rank_extremes/rng.hpp"

namespace rank_extremes {

using NodeId = std::uint32_t;

class DirectedGraph {
public:
    DirectedGraph() = default;
    explicit DirectedGraph(std::size_t n) : out_(n) {}

    std::size_t size() const { return out_.size(); }
    void add_edge(NodeId src, NodeId dst);
    bool has_edge(NodeId src, NodeId dst) const;

    std::span<const NodeId> out_edges(NodeId v) const { return out_[v]; }
    std::size_t out_degree(NodeId v) const { return out_[v].size(); }
    std::vector<std::size_t> in_degrees() const;
    std::vector<std::size_t> out_degrees() const;
    std::size_t edge_count() const;

    /// Give every node without out-edges one uniformly chosen out-edge to a
    /// different node. Returns the number of repaired nodes.
    std::size_t repair_dangling(Rng& rng);

    friend bool operator==(const DirectedGraph&, const DirectedGraph&) = default;

private:
    std::vector<std::vector<NodeId>> out_;
};

/// Power-law in-degree graph: each node draws a target in-degree from the
/// truncated law on {1..n-1}, then that many distinct sources uniformly from
/// the other nodes. Dangling nodes are repaired afterwards.
DirectedGraph gen_power_law_graph(std::size_t n, double alpha, RngSeed seed);

/// Plain-text edge list: one "src dst" pair per line, 0-based ids. The
/// reader sizes the graph to the largest id unless node_count is larger.
void write_edge_list(std::ostream& os, const DirectedGraph& g);
DirectedGraph read_edge_list(std::istream& is, std::size_t node_count = 0);

struct RankVector {
    std::vector<double> scores;
    std::size_t iterations = 0;
    double residual = 0.0;  ///< last sup-norm change
    /// Per-iteration sup-norm and l1-norm changes.
    std::vector<double> sup_history;
    std::vector<double> l1_history;
    /// No component decreased between sweeps.
    bool monotone = true;
};

/// "node_id,score" CSV with a header row.
void write_rank_csv(std::ostream& os, const RankVector& r);

std::vector<double> uniform_preference(std::size_t n);
/// i.i.d. Pareto(beta) weights normalised to sum 1 (stream "preference").
/// Max-linear ranks need an uneven q: with a uniform q every path term is
/// below the floor (1-c)/n and all scores coincide.
std::vector<double> pareto_preference(std::size_t n, double beta, RngSeed seed);

/// Iterates R <- c A^T D^-1 R + (1-c) q from the uniform start until the
/// sup-norm change drops below tol. Throws ConvergenceError after max_iter.
RankVector pagerank(const DirectedGraph& g, double c, std::span<const double> q, double tol,
                    std::size_t max_iter);

/// Iterates R_i <- max_{j -> i} (c/D_j) R_j v (1-c) q_i from R = (1-c) q.
/// The sweep is monotone non-decreasing and converges to the minimal fixed
/// point.
RankVector max_linear_rank(const DirectedGraph& g, double c, std::span<const double> q,
                           double tol, std::size_t max_iter);

/// Indices of the ceil(top_p n) highest scores, ties broken by lower index.
std::vector<NodeId> top_nodes(std::span<const double> scores, double top_p);

struct HittingStats {
    double mean = 0.0;
    double median = 0.0;
    std::size_t trials = 0;
    std::vector<std::size_t> steps;
};

/// Surfer walk: from the current node follow a uniform out-edge with
/// probability c, otherwise teleport to a q-distributed node. Records the
/// step at which the walk first stands on a target node; the start node is
/// checked at step 0. Each trial starts at `start` when given, otherwise
/// at a q-distributed node, and owns its RNG stream. c may equal 1.
HittingStats hitting_times(const DirectedGraph& g, double c, std::span<const double> q,
                           std::span<const NodeId> targets, std::size_t trials, RngSeed seed,
                           std::optional<NodeId> start = std::nullopt,
                           std::size_t max_steps = 100'000'000);

/// Hitting times to the top_p fraction of nodes by rank.
HittingStats random_walk_hitting(const DirectedGraph& g, double c, std::span<const double> q,
                                 const RankVector& ranks, double top_p, std::size_t trials,
                                 RngSeed seed);

}  // namespace rank_extremes
