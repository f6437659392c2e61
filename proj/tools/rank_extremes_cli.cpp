// rank-extremes: experiment runner for the rank-recursion toolkit.
//
//   rank-extremes simulate   [--config F] [--set k=v]... [--out DIR]
//   rank-extremes estimate   --input PATH.csv [--method all|hill|blocks|intervals|runs]
//   rank-extremes verify     thm1|thm2|thm3|thm4 [--config F] [--jobs N] [--out DIR]
//   rank-extremes tail-eq    [--config F]
//   rank-extremes graph      gen|pagerank|maxlinear|hitting|demo ...
//   rank-extremes report     --input report.json
//
// RANK_EXTREMES_OUT, when set, overrides --out.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rank_extremes/config.hpp"
#include "rank_extremes/errors.hpp"
#include "rank_extremes/estimators.hpp"
#include "rank_extremes/experiment.hpp"
#include "rank_extremes/graphrank.hpp"
#include "rank_extremes/recursion.hpp"

namespace re = rank_extremes;

namespace {

struct GlobalOptions {
    std::string config_file;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> jobs;
    std::string out;
    std::vector<std::string> settings;
};

std::string resolve_out(const GlobalOptions& g, const re::ExperimentConfig& cfg) {
    if (const char* env = std::getenv("RANK_EXTREMES_OUT"); env != nullptr && *env != '\0') {
        return env;
    }
    return g.out.empty() ? cfg.out : g.out;
}

/// Defaults for `kind`, then the config file, then --set, then flags.
re::ExperimentConfig build_config(const GlobalOptions& g, re::ExperimentKind kind) {
    re::ExperimentConfig cfg = re::default_config(kind);
    if (!g.config_file.empty()) {
        for (const auto& [k, v] : re::parse_assignments(re::read_text_file(g.config_file))) {
            if (k == "experiment") {
                if (re::parse_experiment_kind(v) != kind) {
                    throw re::ConfigError("config file is for experiment '" + v +
                                          "' but the command runs '" + re::to_string(kind) + "'");
                }
                continue;
            }
            re::apply_setting(cfg, k, v);
        }
    }
    for (const auto& s : g.settings) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            throw re::ConfigError("--set expects key=value, got '" + s + "'");
        }
        re::apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    if (g.seed) {
        cfg.seed = *g.seed;
    }
    if (g.jobs) {
        cfg.jobs = *g.jobs;
    }
    cfg.out = resolve_out(g, cfg);
    return cfg;
}

void print_summary(const re::VerificationReport& report, const std::string& out_dir) {
    std::cout << re::to_string(report.kind) << "  config " << report.config_hash << "  seed "
              << report.seed << '\n';
    if (report.prediction) {
        const auto& p = *report.prediction;
        std::cout << "  predicted k=" << p.k_of_z << " theta=" << p.theta_of_z
                  << " regime=" << re::to_string(p.regime) << '\n';
    }
    for (const auto& e : report.estimates) {
        std::cout << "  " << e.estimator << '[' << e.aggregate << "] median=" << e.median
                  << " q10=" << e.q10 << " q90=" << e.q90;
        if (e.failures > 0) {
            std::cout << " failures=" << e.failures;
        }
        std::cout << '\n';
    }
    for (const auto& c : report.checks) {
        std::cout << "  " << (c.pass ? "PASS " : "FAIL ") << c.name << " value=" << c.value
                  << " range=[" << c.lo << ", " << c.hi << "]\n";
    }
    std::cout << (report.pass ? "PASS" : "FAIL") << "  report: " << out_dir << "/report.json\n";
}

int run_verify(const GlobalOptions& g, re::ExperimentKind kind) {
    const re::ExperimentConfig cfg = build_config(g, kind);
    const re::VerificationReport report = re::run_experiment(cfg);
    print_summary(report, cfg.out);
    return report.pass ? 0 : 1;
}

std::vector<double> read_values_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw re::ConfigError("cannot open input '" + path + "'");
    }
    std::vector<double> values;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const std::string first = line.substr(0, line.find(','));
        try {
            std::size_t used = 0;
            const double v = std::stod(first, &used);
            values.push_back(v);
        } catch (const std::invalid_argument&) {
            // header row
        }
    }
    if (values.empty()) {
        throw re::DataError("input '" + path + "' holds no numeric values");
    }
    return values;
}

re::DirectedGraph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw re::ConfigError("cannot open graph '" + path + "'");
    }
    return re::read_edge_list(in);
}

std::ofstream open_output(const std::string& dir, const std::string& name, std::string& full) {
    std::filesystem::create_directories(dir);
    full = (std::filesystem::path(dir) / name).string();
    std::ofstream os(full);
    if (!os) {
        throw re::ConfigError("cannot write '" + full + "'");
    }
    return os;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and estimation of tail and extremal indices of rank recursions"};
    app.require_subcommand(1);

    GlobalOptions g;
    std::uint64_t seed_flag = 0;
    std::size_t jobs_flag = 0;
    auto* seed_opt = app.add_option("--seed", seed_flag, "Root RNG seed");
    auto* jobs_opt = app.add_option("--jobs", jobs_flag, "Worker threads for replications");
    app.add_option("--config", g.config_file, "Flat key = value config file");
    app.add_option("--out", g.out, "Output directory (RANK_EXTREMES_OUT overrides)");
    app.add_option("--set", g.settings, "Config override key=value (repeatable)");
    for (auto* o : {seed_opt, jobs_opt}) {
        o->configurable();
    }

    // simulate
    auto* sim = app.add_subcommand("simulate", "Write aggregate paths as CSV");
    std::string sim_kind = "thm4";
    sim->add_option("--model", sim_kind, "thm1|thm2|thm3 (fixed length) or thm4 (random length)")
        ->check(CLI::IsMember({"thm1", "thm2", "thm3", "thm4"}));

    // estimate
    auto* est = app.add_subcommand("estimate", "Run estimators on a path CSV");
    std::string est_input;
    std::string est_method = "all";
    double est_quantile = 0.99;
    double est_fraction = 0.01;
    std::size_t est_block = 0;
    std::size_t est_gap = 0;
    bool est_csv = false;
    est->add_option("--input", est_input, "Path CSV (first column, '#' lines skipped)")->required();
    est->add_option("--method", est_method)
        ->check(CLI::IsMember({"all", "hill", "blocks", "intervals", "runs"}));
    est->add_option("--quantile", est_quantile, "Threshold quantile for theta estimators");
    est->add_option("--fraction", est_fraction, "Hill top fraction");
    est->add_option("--block-length", est_block, "Blocks estimator b (0: floor(sqrt n))");
    est->add_option("--run-gap", est_gap, "Runs declustering gap (0: ceil(ln n))");
    est->add_flag("--csv", est_csv, "Emit CSV rows instead of JSON lines");

    // verify
    auto* ver = app.add_subcommand("verify", "Monte-Carlo verification of a closed-form prediction");
    std::string ver_which;
    ver->add_option("model", ver_which, "thm1|thm2|thm3|thm4")
        ->required()
        ->check(CLI::IsMember({"thm1", "thm2", "thm3", "thm4"}));

    auto* teq = app.add_subcommand("tail-eq", "Sum/max tail equivalence table");

    // graph
    auto* graph = app.add_subcommand("graph", "Explicit graph ranks");
    std::string graph_action;
    std::string graph_file;
    double damping = 0.85;
    double tol = 1e-12;
    std::size_t max_iter = 100000;
    std::size_t graph_n = 10000;
    double graph_alpha = 1.5;
    double top_p = 0.01;
    std::size_t trials = 1000;
    std::string preference;
    double pref_beta = 0.0;
    graph->add_option("action", graph_action, "gen|pagerank|maxlinear|hitting|demo")
        ->required()
        ->check(CLI::IsMember({"gen", "pagerank", "maxlinear", "hitting", "demo"}));
    auto* pref_opt = graph->add_option("--preference", preference, "uniform|pareto")
                         ->check(CLI::IsMember({"uniform", "pareto"}));
    auto* pref_beta_opt = graph->add_option("--preference-beta", pref_beta,
                                            "Pareto index of the preference vector");
    graph->add_option("--graph", graph_file, "Edge list input");
    graph->add_option("--nodes", graph_n, "Node count for gen");
    graph->add_option("--alpha", graph_alpha, "In-degree tail index for gen");
    graph->add_option("--damping", damping);
    graph->add_option("--tol", tol);
    graph->add_option("--max-iter", max_iter);
    graph->add_option("--top-p", top_p);
    graph->add_option("--trials", trials);

    // report
    auto* rep = app.add_subcommand("report", "Validate and summarise a report.json");
    std::string rep_input;
    rep->add_option("--input", rep_input, "report.json")->required();

    CLI11_PARSE(app, argc, argv);
    if (*seed_opt) {
        g.seed = seed_flag;
    }
    if (*jobs_opt) {
        g.jobs = jobs_flag;
    }

    const auto kind_of = [](const std::string& t) {
        return re::parse_experiment_kind("verify-" + t);
    };

    try {
        if (*ver) {
            return run_verify(g, kind_of(ver_which));
        }
        if (*teq) {
            return run_verify(g, re::ExperimentKind::TailEquivalence);
        }
        if (*sim) {
            const re::ExperimentConfig cfg = build_config(g, kind_of(sim_kind));
            cfg.validate();
            std::string written;
            if (cfg.kind == re::ExperimentKind::VerifyThm4) {
                const re::RecursionConfig rc = cfg.recursion_config();
                const auto pair = re::sample_aggregate_pair(rc, cfg.n, cfg.seed);
                re::AggregatePath path{pair.sum, rc, cfg.seed};
                path.config.aggregate = re::Aggregate::Sum;
                auto s = open_output(cfg.out, "path_sum.csv", written);
                re::write_path_csv(s, path);
                std::cout << written << '\n';
                path.values = pair.max;
                path.config.aggregate = re::Aggregate::Max;
                auto m = open_output(cfg.out, "path_max.csv", written);
                re::write_path_csv(m, path);
                std::cout << written << '\n';
            } else {
                const auto cols = cfg.fixed_columns();
                const auto pair = re::sample_fixed_aggregate(cols, cfg.n, cfg.seed);
                auto os = open_output(cfg.out, "path_fixed.csv", written);
                os.precision(17);
                os << "# seed=" << cfg.seed << "\n# n=" << cfg.n << "\nsum,max\n";
                for (std::size_t t = 0; t < pair.sum.size(); ++t) {
                    os << pair.sum[t] << ',' << pair.max[t] << '\n';
                }
                std::cout << written << '\n';
            }
            return 0;
        }
        if (*est) {
            const std::vector<double> x = read_values_csv(est_input);
            std::vector<re::EstimateReport> reports;
            const bool all = est_method == "all";
            const double u = re::nearest_rank_quantile(x, est_quantile);
            if (all || est_method == "hill") {
                reports.push_back(re::hill(x, re::TopFraction{est_fraction}));
            }
            if (all || est_method == "blocks") {
                reports.push_back(re::blocks_theta(
                    x, u, est_block ? est_block : re::default_block_length(x.size())));
            }
            if (all || est_method == "intervals") {
                reports.push_back(re::intervals_theta(x, u));
            }
            if (all || est_method == "runs") {
                const std::size_t gap = est_gap ? est_gap : re::default_run_gap(x.size());
                const auto cs = re::mean_cluster_size(x, u, gap);
                re::EstimateReport r;
                r.method = "runs";
                r.estimate = r.raw_estimate = cs.theta_runs;
                r.n = x.size();
                r.threshold = u;
                r.exceedances = cs.exceedances;
                r.run_gap = gap;
                reports.push_back(r);
            }
            if (est_csv) {
                std::cout << re::estimate_csv_header() << '\n';
            }
            for (const auto& r : reports) {
                if (est_csv) {
                    std::cout << re::estimate_csv_row(r) << '\n';
                } else {
                    std::cout << nlohmann::json(r).dump() << '\n';
                }
            }
            return 0;
        }
        if (*graph) {
            if (graph_action == "demo") {
                GlobalOptions gd = g;
                if (*pref_opt) {
                    gd.settings.push_back("graph_preference=" + preference);
                }
                if (*pref_beta_opt) {
                    gd.settings.push_back("graph_beta=" + std::to_string(pref_beta));
                }
                return run_verify(gd, re::ExperimentKind::GraphDemo);
            }
            re::ExperimentConfig cfg = build_config(g, re::ExperimentKind::GraphDemo);
            if (*pref_opt) {
                cfg.graph_preference = preference;
            }
            if (*pref_beta_opt) {
                cfg.graph_beta = pref_beta;
            }
            cfg.validate();
            std::string written;
            if (graph_action == "gen") {
                const auto gr = re::gen_power_law_graph(graph_n, graph_alpha, cfg.seed);
                auto os = open_output(cfg.out, "graph.txt", written);
                re::write_edge_list(os, gr);
                std::cout << written << '\n';
                return 0;
            }
            if (graph_file.empty()) {
                throw re::ConfigError("graph " + graph_action + " needs --graph FILE");
            }
            const auto gr = load_graph(graph_file);
            const auto q = cfg.graph_preference == "uniform"
                               ? re::uniform_preference(gr.size())
                               : re::pareto_preference(gr.size(), cfg.graph_beta, cfg.seed);
            if (graph_action == "pagerank" || graph_action == "maxlinear") {
                const auto r = graph_action == "pagerank"
                                   ? re::pagerank(gr, damping, q, tol, max_iter)
                                   : re::max_linear_rank(gr, damping, q, tol, max_iter);
                auto os = open_output(cfg.out, graph_action + ".csv", written);
                re::write_rank_csv(os, r);
                std::cout << written << "  iterations=" << r.iterations
                          << " residual=" << r.residual << '\n';
                return 0;
            }
            const auto pr = re::pagerank(gr, damping, q, tol, max_iter);
            const auto hs = re::random_walk_hitting(gr, damping, q, pr, top_p, trials, cfg.seed);
            std::cout << nlohmann::json{{"top_p", top_p},
                                        {"trials", hs.trials},
                                        {"mean", hs.mean},
                                        {"median", hs.median}}
                             .dump()
                      << '\n';
            return 0;
        }
        if (*rep) {
            const auto j = nlohmann::json::parse(re::read_text_file(rep_input));
            const std::string problem = re::validate_report_json(j);
            if (!problem.empty()) {
                std::cerr << "invalid report: " << problem << '\n';
                return 2;
            }
            std::cout << j["experiment"].get<std::string>() << "  config "
                      << j["config_hash"].get<std::string>() << '\n';
            for (const auto& c : j["checks"]) {
                std::cout << "  " << (c["pass"].get<bool>() ? "PASS " : "FAIL ")
                          << c["name"].get<std::string>() << " value=" << c["value"].dump()
                          << '\n';
            }
            std::cout << (j["pass"].get<bool>() ? "PASS" : "FAIL") << '\n';
            return j["pass"].get<bool>() ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
