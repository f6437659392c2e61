#include "rank_extremes/graphrank.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_set>

#include "rank_extremes/errors.hpp"
#include "rank_extremes/heavytail.hpp"

namespace rank_extremes {

void DirectedGraph::add_edge(NodeId src, NodeId dst) {
    if (src >= out_.size() || dst >= out_.size()) {
        throw ParameterError("edge endpoint out of range");
    }
    out_[src].push_back(dst);
}

bool DirectedGraph::has_edge(NodeId src, NodeId dst) const {
    const auto& adj = out_[src];
    return std::find(adj.begin(), adj.end(), dst) != adj.end();
}

std::vector<std::size_t> DirectedGraph::in_degrees() const {
    std::vector<std::size_t> deg(out_.size(), 0);
    for (const auto& adj : out_) {
        for (NodeId d : adj) {
            ++deg[d];
        }
    }
    return deg;
}

std::vector<std::size_t> DirectedGraph::out_degrees() const {
    std::vector<std::size_t> deg(out_.size());
    for (std::size_t v = 0; v < out_.size(); ++v) {
        deg[v] = out_[v].size();
    }
    return deg;
}

std::size_t DirectedGraph::edge_count() const {
    std::size_t total = 0;
    for (const auto& adj : out_) {
        total += adj.size();
    }
    return total;
}

std::size_t DirectedGraph::repair_dangling(Rng& rng) {
    const std::size_t n = out_.size();
    if (n < 2) {
        return 0;
    }
    std::size_t repaired = 0;
    for (std::size_t v = 0; v < n; ++v) {
        if (!out_[v].empty()) {
            continue;
        }
        // Uniform over the n - 1 other nodes.
        auto dst = static_cast<NodeId>(rng.below(n - 1));
        if (dst >= v) {
            ++dst;
        }
        out_[v].push_back(dst);
        ++repaired;
    }
    return repaired;
}

DirectedGraph gen_power_law_graph(std::size_t n, double alpha, RngSeed seed) {
    if (n < 2) {
        throw ParameterError("graph needs at least 2 nodes");
    }
    const PowerLawInt law(InDegreeSpec{alpha, static_cast<std::int64_t>(n - 1)});
    Rng rng(derive_stream(seed, "graph"));
    DirectedGraph g(n);
    std::unordered_set<std::uint64_t> picked;
    std::vector<std::uint64_t> sources;
    for (std::size_t target = 0; target < n; ++target) {
        const auto d = static_cast<std::uint64_t>(law.from_survival(rng.unit()));
        const std::uint64_t others = n - 1;
        // Floyd's sampling of d distinct indices from [0, others).
        picked.clear();
        sources.clear();
        for (std::uint64_t j = others - d; j < others; ++j) {
            const std::uint64_t t = rng.below(j + 1);
            const std::uint64_t chosen = picked.insert(t).second ? t : j;
            if (chosen == j) {
                picked.insert(j);
            }
            sources.push_back(chosen);
        }
        std::sort(sources.begin(), sources.end());
        for (std::uint64_t s : sources) {
            const auto src = static_cast<NodeId>(s >= target ? s + 1 : s);
            g.add_edge(src, static_cast<NodeId>(target));
        }
    }
    g.repair_dangling(rng);
    return g;
}

void write_edge_list(std::ostream& os, const DirectedGraph& g) {
    for (std::size_t v = 0; v < g.size(); ++v) {
        for (NodeId d : g.out_edges(static_cast<NodeId>(v))) {
            os << v << ' ' << d << '\n';
        }
    }
}

DirectedGraph read_edge_list(std::istream& is, std::size_t node_count) {
    std::vector<std::pair<NodeId, NodeId>> edges;
    std::string line;
    std::size_t line_no = 0;
    std::size_t n = node_count;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::istringstream ls(line);
        long long src = -1;
        long long dst = -1;
        if (!(ls >> src >> dst) || src < 0 || dst < 0) {
            throw DataError("edge list line " + std::to_string(line_no) +
                            ": expected two nonnegative node ids");
        }
        edges.emplace_back(static_cast<NodeId>(src), static_cast<NodeId>(dst));
        n = std::max<std::size_t>(n, static_cast<std::size_t>(std::max(src, dst)) + 1);
    }
    DirectedGraph g(n);
    for (const auto& [s, d] : edges) {
        g.add_edge(s, d);
    }
    return g;
}

void write_rank_csv(std::ostream& os, const RankVector& r) {
    const auto old_precision = os.precision(17);
    os << "node_id,score\n";
    for (std::size_t i = 0; i < r.scores.size(); ++i) {
        os << i << ',' << r.scores[i] << '\n';
    }
    os.precision(old_precision);
}

std::vector<double> uniform_preference(std::size_t n) {
    return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

std::vector<double> pareto_preference(std::size_t n, double beta, RngSeed seed) {
    if (n < 1) {
        throw ParameterError("preference vector needs n >= 1");
    }
    std::vector<double> q = sample_pareto({beta, 1.0}, n, derive_stream(seed, "preference"));
    const double total = std::accumulate(q.begin(), q.end(), 0.0);
    for (auto& v : q) {
        v /= total;
    }
    return q;
}

namespace {

void check_rank_inputs(const DirectedGraph& g, double c, std::span<const double> q) {
    if (g.size() == 0) {
        throw ParameterError("graph is empty");
    }
    if (!(c > 0.0 && c < 1.0)) {
        throw ParameterError("damping c must lie in (0, 1)");
    }
    if (q.size() != g.size()) {
        throw ParameterError("preference vector length must equal node count");
    }
    double total = 0.0;
    for (double v : q) {
        if (!(v >= 0.0)) {
            throw ParameterError("preference entries must be >= 0");
        }
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw ParameterError("preference vector must sum to 1");
    }
}

void record_change(RankVector& r, std::span<const double> prev, std::span<const double> next) {
    double sup = 0.0;
    double l1 = 0.0;
    for (std::size_t i = 0; i < prev.size(); ++i) {
        const double d = std::abs(next[i] - prev[i]);
        sup = std::max(sup, d);
        l1 += d;
    }
    r.sup_history.push_back(sup);
    r.l1_history.push_back(l1);
    r.residual = sup;
}

}  // namespace

RankVector pagerank(const DirectedGraph& g, double c, std::span<const double> q, double tol,
                    std::size_t max_iter) {
    check_rank_inputs(g, c, q);
    const std::size_t n = g.size();
    RankVector r;
    r.scores = uniform_preference(n);
    std::vector<double> next(n);
    while (r.iterations < max_iter) {
        for (std::size_t i = 0; i < n; ++i) {
            next[i] = (1.0 - c) * q[i];
        }
        for (std::size_t j = 0; j < n; ++j) {
            const auto adj = g.out_edges(static_cast<NodeId>(j));
            if (adj.empty()) {
                continue;
            }
            const double share = c * r.scores[j] / static_cast<double>(adj.size());
            for (NodeId d : adj) {
                next[d] += share;
            }
        }
        record_change(r, r.scores, next);
        r.scores.swap(next);
        ++r.iterations;
        if (r.residual < tol) {
            return r;
        }
    }
    throw ConvergenceError("pagerank did not converge in " + std::to_string(max_iter) +
                               " iterations",
                           r.residual);
}

RankVector max_linear_rank(const DirectedGraph& g, double c, std::span<const double> q,
                           double tol, std::size_t max_iter) {
    check_rank_inputs(g, c, q);
    const std::size_t n = g.size();
    RankVector r;
    r.scores.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        r.scores[i] = (1.0 - c) * q[i];
    }
    std::vector<double> next(n);
    while (r.iterations < max_iter) {
        for (std::size_t i = 0; i < n; ++i) {
            next[i] = (1.0 - c) * q[i];
        }
        for (std::size_t j = 0; j < n; ++j) {
            const auto adj = g.out_edges(static_cast<NodeId>(j));
            if (adj.empty()) {
                continue;
            }
            const double share = c * r.scores[j] / static_cast<double>(adj.size());
            for (NodeId d : adj) {
                next[d] = std::max(next[d], share);
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            r.monotone = r.monotone && next[i] >= r.scores[i];
        }
        record_change(r, r.scores, next);
        r.scores.swap(next);
        ++r.iterations;
        if (r.residual < tol) {
            return r;
        }
    }
    throw ConvergenceError("max-linear iteration did not converge in " +
                               std::to_string(max_iter) + " iterations",
                           r.residual);
}

std::vector<NodeId> top_nodes(std::span<const double> scores, double top_p) {
    if (!(top_p > 0.0 && top_p < 1.0)) {
        throw ParameterError("top_p must lie in (0, 1)");
    }
    const std::size_t n = scores.size();
    const auto count = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::ceil(top_p * static_cast<double>(n))), 1, n);
    std::vector<NodeId> idx(n);
    std::iota(idx.begin(), idx.end(), NodeId{0});
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count), idx.end(),
                      [&](NodeId a, NodeId b) {
                          return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
                      });
    idx.resize(count);
    return idx;
}

HittingStats hitting_times(const DirectedGraph& g, double c, std::span<const double> q,
                           std::span<const NodeId> targets, std::size_t trials, RngSeed seed,
                           std::optional<NodeId> start, std::size_t max_steps) {
    const std::size_t n = g.size();
    if (targets.empty()) {
        throw ParameterError("hitting-time target set is empty");
    }
    if (trials < 1) {
        throw ParameterError("hitting times need trials >= 1");
    }
    if (!(c > 0.0 && c <= 1.0)) {
        throw ParameterError("walk continuation probability must lie in (0, 1]");
    }
    if (q.size() != n) {
        throw ParameterError("preference vector length must equal node count");
    }
    std::vector<char> is_target(n, 0);
    for (NodeId t : targets) {
        if (t >= n) {
            throw ParameterError("target node out of range");
        }
        is_target[t] = 1;
    }
    std::vector<double> cdf(n);
    std::partial_sum(q.begin(), q.end(), cdf.begin());
    const double total = cdf.back();
    const auto teleport = [&](Rng& rng) {
        const double u = rng.unit() * total;
        const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        return static_cast<NodeId>(std::min<std::size_t>(it - cdf.begin(), n - 1));
    };

    HittingStats out;
    out.trials = trials;
    out.steps.resize(trials);
    for (std::size_t trial = 0; trial < trials; ++trial) {
        Rng rng(derive_stream(seed, "walk", trial));
        NodeId pos = start ? *start : teleport(rng);
        std::size_t steps = 0;
        while (!is_target[pos]) {
            if (steps == max_steps) {
                throw ResourceError("walk exceeded " + std::to_string(max_steps) +
                                    " steps without reaching the target set");
            }
            const auto adj = g.out_edges(pos);
            if (rng.unit() <= c && !adj.empty()) {
                pos = adj[rng.below(adj.size())];
            } else {
                pos = teleport(rng);
            }
            ++steps;
        }
        out.steps[trial] = steps;
    }
    double sum = 0.0;
    for (std::size_t s : out.steps) {
        sum += static_cast<double>(s);
    }
    out.mean = sum / static_cast<double>(trials);
    std::vector<std::size_t> sorted = out.steps;
    std::sort(sorted.begin(), sorted.end());
    out.median = static_cast<double>(sorted[(trials - 1) / 2]);
    return out;
}

HittingStats random_walk_hitting(const DirectedGraph& g, double c, std::span<const double> q,
                                 const RankVector& ranks, double top_p, std::size_t trials,
                                 RngSeed seed) {
    if (ranks.scores.size() != g.size()) {
        throw ParameterError("rank vector length must equal node count");
    }
    const auto targets = top_nodes(ranks.scores, top_p);
    return hitting_times(g, c, q, targets, trials, seed);
}

}  // namespace rank_extremes
