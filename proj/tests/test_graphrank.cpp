#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "rank_extremes/errors.hpp"
#include "rank_extremes/graphrank.hpp"
#include "rank_extremes/heavytail.hpp"

using namespace rank_extremes;

namespace {

DirectedGraph cycle(std::size_t n) {
    DirectedGraph g(n);
    for (std::size_t i = 0; i < n; ++i) {
        g.add_edge(static_cast<NodeId>(i), static_cast<NodeId>((i + 1) % n));
    }
    return g;
}

// Dense Gaussian elimination with partial pivoting.
std::vector<double> solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) {
                piv = r;
            }
        }
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t k = col; k < n; ++k) {
                a[r][k] -= f * a[col][k];
            }
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) {
            s -= a[i][k] * x[k];
        }
        x[i] = s / a[i][i];
    }
    return x;
}

std::vector<double> pagerank_oracle(const DirectedGraph& g, double c, const std::vector<double>& q) {
    const std::size_t n = g.size();
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        a[i][i] = 1.0;
    }
    for (NodeId j = 0; j < n; ++j) {
        for (const NodeId i : g.out_edges(j)) {
            a[i][j] -= c / static_cast<double>(g.out_degree(j));
        }
    }
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) {
        b[i] = (1 - c) * q[i];
    }
    return solve(a, b);
}

// one synchronous PageRank sweep
std::vector<double> sweep(const DirectedGraph& g, double c, const std::vector<double>& q,
                          const std::vector<double>& r) {
    std::vector<double> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        out[i] = (1 - c) * q[i];
    }
    for (NodeId j = 0; j < g.size(); ++j) {
        for (const NodeId i : g.out_edges(j)) {
            out[i] += c * r[j] / static_cast<double>(g.out_degree(j));
        }
    }
    return out;
}

}  // namespace

TEST_CASE("graph basics") {
    DirectedGraph g(3);
    g.add_edge(0, 1);
    g.add_edge(0, 2);
    g.add_edge(2, 1);
    CHECK(g.has_edge(0, 1));
    CHECK_FALSE(g.has_edge(1, 0));
    CHECK(g.edge_count() == 3);
    CHECK(g.in_degrees() == std::vector<std::size_t>{0, 2, 1});
    CHECK(g.out_degrees() == std::vector<std::size_t>{2, 0, 1});
    Rng rng(1);
    CHECK(g.repair_dangling(rng) == 1);
    CHECK(g.out_degree(1) == 1);
    CHECK_FALSE(g.has_edge(1, 1));
}

TEST_CASE("generator: two nodes") {
    const auto g = gen_power_law_graph(2, 1.5, 3);
    CHECK(g.size() == 2);
    CHECK(g.out_degree(0) >= 1);
    CHECK(g.out_degree(1) >= 1);
    CHECK(g.has_edge(0, 1));
    CHECK(g.has_edge(1, 0));
}

TEST_CASE("generator: determinism and simple-graph invariants") {
    const auto a = gen_power_law_graph(2000, 1.5, 7);
    const auto b = gen_power_law_graph(2000, 1.5, 7);
    CHECK(a == b);
    CHECK_FALSE(a == gen_power_law_graph(2000, 1.5, 8));
    for (NodeId v = 0; v < a.size(); ++v) {
        REQUIRE(a.out_degree(v) >= 1);
        auto e = std::vector<NodeId>(a.out_edges(v).begin(), a.out_edges(v).end());
        std::sort(e.begin(), e.end());
        REQUIRE(std::adjacent_find(e.begin(), e.end()) == e.end());
        REQUIRE_FALSE(std::binary_search(e.begin(), e.end(), v));
    }
    const auto in = a.in_degrees();
    CHECK(std::accumulate(in.begin(), in.end(), std::size_t{0}) == a.edge_count());
}

TEST_CASE("generator: in-degree tail follows the truncated law") {
    const std::size_t n = 100'000;
    const double alpha = 1.5;
    const auto g = gen_power_law_graph(n, alpha, 11);
    const auto in = g.in_degrees();
    // dangling repair adds at most one in-edge to some nodes; the generated
    // targets are the in-degrees before repair, bounded below by them
    double w_all = 0, w_tail = 0;
    for (std::size_t l = n - 1; l >= 1; --l) {
        const double w = std::pow(static_cast<double>(l), -alpha - 1);
        w_all += w;
        if (l > 100) {
            w_tail += w;
        }
    }
    const double p = w_tail / w_all;
    const double hits = static_cast<double>(std::count_if(in.begin(), in.end(), [](auto d) { return d > 100; }));
    const double se = std::sqrt(p * (1 - p) / static_cast<double>(n));
    CHECK(std::abs(hits / static_cast<double>(n) - p) < 3 * se + 1.0 / static_cast<double>(n));
}

TEST_CASE("edge list round trip") {
    const auto g = gen_power_law_graph(500, 1.2, 5);
    std::stringstream ss;
    write_edge_list(ss, g);
    const auto h = read_edge_list(ss, g.size());
    CHECK(h == g);
    std::istringstream bad("0 x\n");
    CHECK_THROWS(read_edge_list(bad));
}

TEST_CASE("pagerank: symmetric graphs") {
    const std::vector<double> half{0.5, 0.5};
    auto r = pagerank(cycle(2), 0.85, half, 1e-14, 1000);
    CHECK(r.scores[0] == doctest::Approx(0.5));
    CHECK(r.scores[1] == doctest::Approx(0.5));
    for (const double c : {0.1, 0.5, 0.95}) {
        r = pagerank(cycle(3), c, uniform_preference(3), 1e-14, 10'000);
        for (const double v : r.scores) {
            CHECK(v == doctest::Approx(1.0 / 3.0));
        }
    }
}

TEST_CASE("pagerank: star graph against a linear solve") {
    DirectedGraph star(6);
    for (NodeId v = 1; v < 6; ++v) {
        star.add_edge(v, 0);
    }
    star.add_edge(0, 1);
    const auto q = uniform_preference(6);
    const auto r = pagerank(star, 0.5, q, 1e-15, 10'000);
    const auto exact = pagerank_oracle(star, 0.5, q);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(std::abs(r.scores[i] - exact[i]) < 1e-8);
    }
    // node 0 collects five in-links
    CHECK(r.scores[0] > r.scores[1]);
    CHECK(r.scores[1] > r.scores[2]);
}

TEST_CASE("pagerank: generated graph invariants") {
    const double c = 0.85;
    const auto g = gen_power_law_graph(10'000, 1.5, 21);
    const auto q = uniform_preference(g.size());
    const double tol = 1e-12;
    const auto r = pagerank(g, c, q, tol, 10'000);
    CHECK(std::abs(std::accumulate(r.scores.begin(), r.scores.end(), 0.0) - 1.0) < 1e-10);
    CHECK(r.residual < tol);
    CHECK(r.iterations == r.sup_history.size());
    // fixed point: one more sweep moves it by less than tol
    const auto next = sweep(g, c, q, r.scores);
    double move = 0;
    for (std::size_t i = 0; i < next.size(); ++i) {
        move = std::max(move, std::abs(next[i] - r.scores[i]));
    }
    CHECK(move < tol);
    // l1 residuals contract by at least c per step
    for (std::size_t s = 1; s < r.l1_history.size(); ++s) {
        if (r.l1_history[s - 1] > 1e-11) {
            CHECK(r.l1_history[s] <= c * r.l1_history[s - 1] * (1 + 1e-9));
        }
    }
}

TEST_CASE("pagerank: non-convergence") {
    const auto g = gen_power_law_graph(200, 1.5, 2);
    try {
        pagerank(g, 0.99, uniform_preference(200), 1e-15, 3);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.last_residual() > 1e-15);
    }
    CHECK_THROWS_AS(pagerank(g, 1.0, uniform_preference(200), 1e-10, 10), ParameterError);
    std::vector<double> bad(200, 0.0);
    CHECK_THROWS_AS(pagerank(g, 0.5, bad, 1e-10, 10), ParameterError);
}

TEST_CASE("max-linear: no edges") {
    const DirectedGraph g(4);
    const std::vector<double> q{0.1, 0.2, 0.3, 0.4};
    const auto r = max_linear_rank(g, 0.5, q, 1e-12, 100);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(r.scores[i] == 0.5 * q[i]);
    }
    CHECK(r.iterations == 1);
}

TEST_CASE("max-linear: two-node cycle by hand") {
    const std::vector<double> q{0.8, 0.2};
    const auto r = max_linear_rank(cycle(2), 0.5, q, 1e-14, 100);
    CHECK(r.scores[0] == doctest::Approx(0.4));
    CHECK(r.scores[1] == doctest::Approx(0.2));
    CHECK(r.monotone);
}

TEST_CASE("max-linear: floor, monotonicity, fixed point") {
    const double c = 0.85;
    const auto g = gen_power_law_graph(10'000, 1.5, 23);
    const auto q = uniform_preference(g.size());
    const auto r = max_linear_rank(g, c, q, 1e-15, 10'000);
    CHECK(r.monotone);
    std::vector<double> best(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        REQUIRE(r.scores[i] >= (1 - c) * q[i]);
        best[i] = (1 - c) * q[i];
    }
    for (NodeId j = 0; j < g.size(); ++j) {
        for (const NodeId i : g.out_edges(j)) {
            best[i] = std::max(best[i], c / static_cast<double>(g.out_degree(j)) * r.scores[j]);
        }
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
        REQUIRE(best[i] == doctest::Approx(r.scores[i]).epsilon(1e-12));
    }
}

TEST_CASE("top nodes and rank overlap") {
    const std::vector<double> s{0.1, 0.5, 0.5, 0.2, 0.9};
    CHECK(top_nodes(s, 0.4) == std::vector<NodeId>{4, 1});
    CHECK(top_nodes(s, 0.6) == std::vector<NodeId>{4, 1, 2});

    const auto g = gen_power_law_graph(10'000, 1.5, 29);
    // with a uniform q every max-linear score sits at the floor (1-c)/n
    const auto flat = max_linear_rank(g, 0.85, uniform_preference(g.size()), 1e-15, 100);
    CHECK(std::all_of(flat.scores.begin(), flat.scores.end(),
                      [&](double v) { return v == doctest::Approx(0.15 / 10'000.0); }));
    // the two notions agree on the leaders when the preference tail is the heavier one
    const auto q = pareto_preference(g.size(), 0.5, 29);
    const auto pr = pagerank(g, 0.85, q, 1e-12, 10'000);
    const auto ml = max_linear_rank(g, 0.85, q, 1e-14, 10'000);
    auto a = top_nodes(pr.scores, 10.0 / g.size());
    auto b = top_nodes(ml.scores, 10.0 / g.size());
    REQUIRE(a.size() == 10);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<NodeId> both;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
    CHECK(both.size() >= 5);
}

TEST_CASE("hitting times: conventions") {
    const auto g = cycle(2);
    const auto q = uniform_preference(2);
    const std::vector<NodeId> all{0, 1};
    const auto h0 = hitting_times(g, 0.85, q, all, 100, 1);
    CHECK(h0.mean == 0.0);
    CHECK(h0.median == 0.0);
    const std::vector<NodeId> one{1};
    const auto h1 = hitting_times(g, 1.0, q, one, 50, 2, NodeId{0});
    CHECK(h1.mean == 1.0);
    CHECK(h1.trials == 50);
    CHECK(std::all_of(h1.steps.begin(), h1.steps.end(), [](auto s) { return s == 1; }));
    CHECK_THROWS_AS(hitting_times(g, 0.85, q, {}, 10, 1), ParameterError);
}

TEST_CASE("hitting times: geometric oracle") {
    // from node 0 of a 3-cycle with c = 0.5 and q concentrated on node 0, the
    // walk reaches node 2 only through 0 -> 1 -> 2 without teleporting
    const auto g = cycle(3);
    const std::vector<double> q{1.0, 0.0, 0.0};
    const std::vector<NodeId> target{2};
    const auto h = hitting_times(g, 0.5, q, target, 20'000, 3, NodeId{0});
    // expected steps E satisfies E = 2 + 3 * (1 - 1/4) / (1/4) ... solved by first-step analysis:
    // from 0: E0 = 1 + E1' where E1' = c E(at 1) + (1-c) E0;  at 1: 1 + c*0 + (1-c) E0
    // E0 = 1 + c (1 + (1-c) E0) + (1-c) E0  ->  E0 = (1 + c) / (1 - (1-c) - c (1-c))
    const double c = 0.5;
    const double e0 = (1 + c) / (1 - (1 - c) - c * (1 - c));
    const double sd_bound = 2 * e0 / std::sqrt(20'000.0);
    CHECK(std::abs(h.mean - e0) < 4 * sd_bound);
}

TEST_CASE("hitting times decrease with a larger target set") {
    const auto g = gen_power_law_graph(10'000, 1.5, 31);
    const auto q = uniform_preference(g.size());
    const auto pr = pagerank(g, 0.85, q, 1e-12, 10'000);
    double prev = 1e300;
    for (const double p : {0.001, 0.01, 0.1}) {
        const auto h = random_walk_hitting(g, 0.85, q, pr, p, 2000, 37);
        CHECK(h.mean < prev);
        prev = h.mean;
    }
    CHECK_THROWS_AS(random_walk_hitting(g, 0.85, q, pr, 0.0, 10, 1), ParameterError);
}

TEST_CASE("pareto preference") {
    const auto q = pareto_preference(1000, 2.0, 4);
    CHECK(std::accumulate(q.begin(), q.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(*std::min_element(q.begin(), q.end()) > 0.0);
    CHECK(q == pareto_preference(1000, 2.0, 4));
}

TEST_CASE("rank CSV") {
    RankVector r;
    r.scores = {0.25, 0.75};
    std::ostringstream os;
    write_rank_csv(os, r);
    CHECK(os.str().rfind("node_id,score\n0,0.25\n1,0.75", 0) == 0);
}
