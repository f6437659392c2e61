#include "rank_extremes/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "rank_extremes/errors.hpp"
#include "rank_extremes/estimators.hpp"
#include "rank_extremes/graphrank.hpp"
#include "rank_extremes/recursion.hpp"

namespace rank_extremes {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
const char* const kSchema = "rank_extremes.verification.v1";

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(text);
    while (std::getline(is, item, ',')) {
        const auto first = item.find_first_not_of(' ');
        if (first == std::string::npos) {
            continue;
        }
        out.push_back(item.substr(first, item.find_last_not_of(' ') - first + 1));
    }
    return out;
}

double nearest_rank_of_sorted(const std::vector<double>& sorted, double q) {
    const auto n = sorted.size();
    auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
    rank = std::clamp<std::size_t>(rank, 1, n);
    return sorted[rank - 1];
}

EstimatorSummary summarize(std::string aggregate, std::string estimator,
                           std::vector<double> values) {
    EstimatorSummary s;
    s.aggregate = std::move(aggregate);
    s.estimator = std::move(estimator);
    std::vector<double> finite;
    for (double v : values) {
        if (std::isfinite(v)) {
            finite.push_back(v);
        } else {
            ++s.failures;
        }
    }
    s.values = std::move(values);
    if (finite.empty()) {
        s.median = s.q10 = s.q90 = kNaN;
        return s;
    }
    std::sort(finite.begin(), finite.end());
    s.median = median_of(finite);
    s.q10 = nearest_rank_of_sorted(finite, 0.1);
    s.q90 = nearest_rank_of_sorted(finite, 0.9);
    return s;
}

Check make_check(std::string name, double value, double target, double lo, double hi) {
    Check c;
    c.name = std::move(name);
    c.value = value;
    c.target = target;
    c.lo = lo;
    c.hi = hi;
    c.pass = std::isfinite(value) && value >= lo && value <= hi;
    return c;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

/// Files written by one run; removed again unless the run commits.
class OutputSet {
public:
    explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}
    OutputSet(const OutputSet&) = delete;
    OutputSet& operator=(const OutputSet&) = delete;
    ~OutputSet() {
        if (committed_) {
            return;
        }
        std::error_code ec;
        for (const auto& p : written_) {
            fs::remove(p, ec);
        }
    }

    std::ofstream open(const std::string& name) {
        fs::create_directories(dir_);
        const fs::path p = dir_ / name;
        written_.push_back(p);
        std::ofstream os(p);
        if (!os) {
            throw ConfigError("cannot write output file '" + p.string() + "'");
        }
        return os;
    }

    void commit() { committed_ = true; }

private:
    fs::path dir_;
    std::vector<fs::path> written_;
    bool committed_ = false;
};

using PathGenerator = std::function<PairedPaths(std::size_t n, RngSeed seed)>;

double run_theta_estimator(const std::string& name, const std::vector<double>& path,
                           const ExperimentConfig& cfg) {
    try {
        if (name == "blocks") {
            const std::size_t b = cfg.block_length ? cfg.block_length
                                                   : default_block_length(path.size());
            return blocks_theta(path, nearest_rank_quantile(path, cfg.blocks_quantile), b)
                .estimate;
        }
        if (name == "intervals") {
            return intervals_theta(path, nearest_rank_quantile(path, cfg.intervals_quantile))
                .estimate;
        }
        if (name == "runs") {
            const std::size_t r = cfg.run_gap ? cfg.run_gap : default_run_gap(path.size());
            return mean_cluster_size(path, nearest_rank_quantile(path, cfg.runs_quantile), r)
                .theta_runs;
        }
    } catch (const DataError&) {
        return kNaN;
    }
    throw ConfigError("unknown extremal-index estimator '" + name + "'");
}

double run_hill(const std::vector<double>& path, const ExperimentConfig& cfg) {
    try {
        return hill(path, TopFraction{cfg.hill_fraction}).estimate;
    } catch (const DataError&) {
        return kNaN;
    }
}

void check_estimator_names(const std::vector<std::string>& names) {
    static const std::set<std::string> known{"blocks", "intervals", "runs", "definition"};
    for (const auto& n : names) {
        if (!known.count(n)) {
            throw ConfigError("unknown extremal-index estimator '" + n + "'");
        }
    }
}

void check_aggregate_names(const std::vector<std::string>& names) {
    for (const auto& n : names) {
        if (n != "sum" && n != "max") {
            throw ConfigError("unknown aggregate '" + n + "' (expected sum or max)");
        }
    }
}

TheoryPrediction predict_for(const ExperimentConfig& cfg) {
    switch (cfg.kind) {
        case ExperimentKind::VerifyThm1:
        case ExperimentKind::VerifyThm2:
        case ExperimentKind::VerifyThm3: {
            ComponentSpec spec;
            for (const auto& col : cfg.fixed_columns()) {
                spec.components.push_back(
                    {col.weight, col.seq.tail, theoretical_mm_theta(col.seq.dep, col.seq.tail.k)});
            }
            return cfg.kind == ExperimentKind::VerifyThm2 ? predict_equal_tails(spec)
                                                          : predict_min_rule(spec);
        }
        default: {
            const RecursionConfig rc = cfg.recursion_config();
            Theorem4Inputs in;
            for (const auto& dep : rc.follower_dep) {
                in.followers.components.push_back(
                    {rc.damping, rc.follower_tail, theoretical_mm_theta(dep, rc.follower_tail.k)});
            }
            in.alpha = rc.in_degree.alpha;
            in.beta = rc.preference_tail.k;
            in.z_star = rc.z_star();
            return predict_theorem4(in);
        }
    }
}

void write_estimates_csv(std::ostream& os, const VerificationReport& report) {
    os << "aggregate,estimator,replication,estimate\n";
    os.precision(17);
    for (const auto& s : report.estimates) {
        for (std::size_t r = 0; r < s.values.size(); ++r) {
            os << s.aggregate << ',' << s.estimator << ',' << r << ',';
            if (std::isfinite(s.values[r])) {
                os << s.values[r];
            }
            os << '\n';
        }
    }
}

void run_replicated(const ExperimentConfig& cfg, const PathGenerator& gen,
                    VerificationReport& report, OutputSet* files,
                    const std::function<void(const PairedPaths&, OutputSet&)>& write_paths) {
    const auto theta_names = split_list(cfg.theta_estimators);
    const auto k_aggs = split_list(cfg.k_aggregates);
    const auto theta_aggs = split_list(cfg.theta_aggregates);
    check_estimator_names(theta_names);
    check_aggregate_names(k_aggs);
    check_aggregate_names(theta_aggs);

    std::vector<std::string> per_path_names;
    for (const auto& name : theta_names) {
        if (name != "definition") {
            per_path_names.push_back(name);
        }
    }
    const bool with_definition = per_path_names.size() != theta_names.size();

    const std::size_t reps = cfg.replications;
    // [aggregate][estimator][replication]; estimator 0 is Hill.
    std::vector<std::vector<std::vector<double>>> values(
        2, std::vector<std::vector<double>>(per_path_names.size() + 1,
                                            std::vector<double>(reps, kNaN)));
    std::mutex write_mutex;
    parallel_for(reps, cfg.jobs, [&](std::size_t r) {
        const PairedPaths paths = gen(cfg.n, derive_stream(cfg.seed, "replication", r));
        const std::vector<double>* agg[2] = {&paths.sum, &paths.max};
        for (std::size_t a = 0; a < 2; ++a) {
            values[a][0][r] = run_hill(*agg[a], cfg);
            for (std::size_t e = 0; e < per_path_names.size(); ++e) {
                values[a][e + 1][r] = run_theta_estimator(per_path_names[e], *agg[a], cfg);
            }
        }
        if (r == 0 && files != nullptr && cfg.write_paths) {
            const std::lock_guard lock(write_mutex);
            write_paths(paths, *files);
        }
    });

    const char* agg_names[2] = {"sum", "max"};
    for (std::size_t a = 0; a < 2; ++a) {
        report.estimates.push_back(summarize(agg_names[a], "hill", values[a][0]));
        for (std::size_t e = 0; e < per_path_names.size(); ++e) {
            report.estimates.push_back(summarize(agg_names[a], per_path_names[e], values[a][e + 1]));
        }
    }

    if (with_definition) {
        const std::size_t def_reps = cfg.definition_replications;
        DefinitionThetaAccumulator acc_sum(cfg.definition_n, def_reps, cfg.definition_tau);
        DefinitionThetaAccumulator acc_max(cfg.definition_n, def_reps, cfg.definition_tau);
        const std::size_t batch = std::max<std::size_t>(1, cfg.jobs) * 4;
        for (std::size_t start = 0; start < def_reps; start += batch) {
            const std::size_t count = std::min(batch, def_reps - start);
            std::vector<PairedPaths> chunk(count);
            parallel_for(count, cfg.jobs, [&](std::size_t i) {
                chunk[i] = gen(cfg.definition_n, derive_stream(cfg.seed, "definition", start + i));
            });
            for (const auto& p : chunk) {
                acc_sum.add_path(p.sum);
                acc_max.add_path(p.max);
            }
        }
        nlohmann::json def = nlohmann::json::object();
        for (auto* acc : {&acc_sum, &acc_max}) {
            const char* name = acc == &acc_sum ? "sum" : "max";
            double estimate = kNaN;
            try {
                const EstimateReport er = acc->finish();
                estimate = er.estimate;
                def[name] = er;
            } catch (const DataError& e) {
                def[name] = {{"error", e.what()}};
            }
            report.estimates.push_back(summarize(name, "definition", {estimate}));
        }
        report.details["definition"] = def;
    }

    const TheoryPrediction& pred = *report.prediction;
    if (cfg.check_k) {
        for (const auto& agg : k_aggs) {
            const double v = report.find(agg, "hill")->median;
            const double tol = cfg.tol_k_rel * pred.k_of_z;
            report.checks.push_back(make_check("k_hat[" + agg + "]", v, pred.k_of_z,
                                               pred.k_of_z - tol, pred.k_of_z + tol));
        }
    }
    if (cfg.check_theta) {
        for (const auto& est : theta_names) {
            for (const auto& agg : theta_aggs) {
                const double v = report.find(agg, est)->median;
                report.checks.push_back(make_check("theta_hat[" + est + "," + agg + "]", v,
                                                   pred.theta_of_z, pred.theta_of_z - cfg.tol_theta,
                                                   pred.theta_of_z + cfg.tol_theta));
            }
        }
    }
    if (cfg.check_sum_max) {
        for (const auto& est : theta_names) {
            const auto& s = report.find("sum", est)->values;
            const auto& m = report.find("max", est)->values;
            std::vector<double> gaps;
            for (std::size_t r = 0; r < s.size(); ++r) {
                gaps.push_back(std::abs(s[r] - m[r]));
            }
            report.checks.push_back(make_check("sum_max_gap[" + est + "]", median_of(gaps), 0.0,
                                               0.0, cfg.tol_sum_max));
        }
    }
}

void run_tail_equivalence(const ExperimentConfig& cfg, VerificationReport& report) {
    const auto rows = compare_tail_sum_max(cfg.recursion_config(), cfg.n, cfg.tail_quantiles,
                                           derive_stream(cfg.seed, "replication", 0));
    nlohmann::json table = nlohmann::json::array();
    for (const auto& row : rows) {
        table.push_back({{"quantile", row.quantile},
                         {"threshold", row.threshold},
                         {"exceed_sum", row.exceed_sum},
                         {"exceed_max", row.exceed_max},
                         {"ratio", row.ratio},
                         {"band_lo", row.band_lo},
                         {"band_hi", row.band_hi},
                         {"reliable", row.reliable}});
        std::ostringstream name;
        name << "tail_ratio[" << row.quantile << "]";
        Check c = make_check(name.str(), row.ratio, 1.0, cfg.ratio_lo, cfg.ratio_hi);
        c.pass = c.pass && row.reliable;
        report.checks.push_back(c);
    }
    report.details["tail_table"] = table;
}

void run_graph_demo(const ExperimentConfig& cfg, VerificationReport& report, OutputSet* files) {
    const DirectedGraph g = gen_power_law_graph(cfg.graph_n, cfg.graph_alpha,
                                                derive_stream(cfg.seed, "graph"));
    const auto q = cfg.graph_preference == "uniform"
                       ? uniform_preference(g.size())
                       : pareto_preference(g.size(), cfg.graph_beta, cfg.seed);
    const double c = cfg.damping;
    const RankVector pr = pagerank(g, c, q, 1e-13, 100'000);
    const RankVector ml = max_linear_rank(g, c, q, 1e-15, 100'000);

    double total = 0.0;
    for (double v : pr.scores) {
        total += v;
    }
    report.checks.push_back(make_check("pagerank_sum", total, 1.0, 1.0 - 1e-10, 1.0 + 1e-10));

    double worst_ratio = 0.0;
    for (std::size_t i = 1; i < pr.l1_history.size(); ++i) {
        if (pr.l1_history[i - 1] > 1e-14) {
            worst_ratio = std::max(worst_ratio, pr.l1_history[i] / pr.l1_history[i - 1]);
        }
    }
    report.checks.push_back(make_check("pagerank_l1_contraction", worst_ratio, c, 0.0,
                                       c * (1.0 + 1e-9)));
    report.checks.push_back(make_check("maxlinear_monotone", ml.monotone ? 1.0 : 0.0, 1.0, 1.0, 1.0));

    const auto top_pr = top_nodes(pr.scores, 10.0 / static_cast<double>(g.size()));
    const auto top_ml = top_nodes(ml.scores, 10.0 / static_cast<double>(g.size()));
    std::size_t overlap = 0;
    for (NodeId v : top_pr) {
        overlap += std::count(top_ml.begin(), top_ml.end(), v);
    }
    report.checks.push_back(make_check("top10_overlap", static_cast<double>(overlap),
                                       static_cast<double>(cfg.overlap_min),
                                       static_cast<double>(cfg.overlap_min), 10.0));

    nlohmann::json hitting = nlohmann::json::array();
    double previous = std::numeric_limits<double>::infinity();
    bool monotone = true;
    for (double top_p : cfg.top_ps) {
        const HittingStats hs = random_walk_hitting(g, c, q, pr, top_p, cfg.walk_trials,
                                                    derive_stream(cfg.seed, "walk"));
        hitting.push_back({{"top_p", top_p}, {"mean", hs.mean}, {"median", hs.median},
                           {"trials", hs.trials}});
        monotone = monotone && hs.mean <= previous;
        previous = hs.mean;
    }
    report.checks.push_back(make_check("hitting_time_decreasing", monotone ? 1.0 : 0.0, 1.0, 1.0, 1.0));
    report.details["graph"] = {{"nodes", g.size()},
                               {"edges", g.edge_count()},
                               {"pagerank_iterations", pr.iterations},
                               {"maxlinear_iterations", ml.iterations},
                               {"hitting", hitting}};

    if (files != nullptr) {
        auto edges = files->open("graph.txt");
        write_edge_list(edges, g);
        auto prs = files->open("pagerank.csv");
        write_rank_csv(prs, pr);
        auto mls = files->open("maxlinear.csv");
        write_rank_csv(mls, ml);
    }
}

}  // namespace

const EstimatorSummary* VerificationReport::find(const std::string& aggregate,
                                                 const std::string& estimator) const {
    for (const auto& s : estimates) {
        if (s.aggregate == aggregate && s.estimator == estimator) {
            return &s;
        }
    }
    return nullptr;
}

double median_of(std::vector<double> values) {
    values.erase(std::remove_if(values.begin(), values.end(),
                                [](double v) { return !std::isfinite(v); }),
                 values.end());
    if (values.empty()) {
        return kNaN;
    }
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

void parallel_for(std::size_t count, std::size_t jobs,
                  const std::function<void(std::size_t)>& body) {
    jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1));
    if (jobs == 1) {
        for (std::size_t i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (std::size_t w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    const std::lock_guard lock(error_mutex);
                    if (!error) {
                        error = std::current_exception();
                    }
                    next = count;
                }
            }
        });
    }
    for (auto& t : workers) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

const std::vector<std::string>& report_fields() {
    static const std::vector<std::string> fields{
        "schema", "experiment", "config_hash", "seed",   "timestamp", "config",
        "prediction", "estimates", "checks",   "details", "pass"};
    return fields;
}

nlohmann::json to_json(const VerificationReport& report) {
    nlohmann::json j = nlohmann::json::object();
    j["schema"] = kSchema;
    j["experiment"] = to_string(report.kind);
    j["config_hash"] = report.config_hash;
    j["seed"] = report.seed;
    j["timestamp"] = report.timestamp;
    nlohmann::json cfg = nlohmann::json::object();
    for (const auto& [k, v] : report.config) {
        cfg[k] = v;
    }
    j["config"] = cfg;
    if (report.prediction) {
        const auto& p = *report.prediction;
        j["prediction"] = {{"k", p.k_of_z},
                           {"theta", p.theta_of_z},
                           {"c", p.c_of_z},
                           {"regime", to_string(p.regime)},
                           {"c_series_unstable", p.c_series_unstable}};
    } else {
        j["prediction"] = nullptr;
    }
    nlohmann::json est = nlohmann::json::array();
    for (const auto& s : report.estimates) {
        est.push_back({{"aggregate", s.aggregate},
                       {"estimator", s.estimator},
                       {"median", s.median},
                       {"q10", s.q10},
                       {"q90", s.q90},
                       {"replications", s.values.size()},
                       {"failures", s.failures}});
    }
    j["estimates"] = est;
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : report.checks) {
        checks.push_back({{"name", c.name},
                          {"value", c.value},
                          {"target", c.target},
                          {"lo", c.lo},
                          {"hi", c.hi},
                          {"pass", c.pass}});
    }
    j["checks"] = checks;
    j["details"] = report.details;
    j["pass"] = report.pass;
    return j;
}

std::string validate_report_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        return "report is not a JSON object";
    }
    for (const auto& key : report_fields()) {
        if (!j.contains(key)) {
            return "missing field '" + key + "'";
        }
    }
    if (j.size() != report_fields().size()) {
        return "unexpected extra fields";
    }
    if (j["schema"] != kSchema) {
        return "unknown schema '" + j["schema"].dump() + "'";
    }
    if (!j["experiment"].is_string() || !j["config_hash"].is_string() ||
        !j["timestamp"].is_string()) {
        return "experiment, config_hash and timestamp must be strings";
    }
    if (!j["seed"].is_number_unsigned()) {
        return "seed must be an unsigned integer";
    }
    if (!j["config"].is_object() || !j["details"].is_object()) {
        return "config and details must be objects";
    }
    if (!j["prediction"].is_null()) {
        for (const char* key : {"k", "theta", "c", "regime", "c_series_unstable"}) {
            if (!j["prediction"].contains(key)) {
                return std::string("prediction lacks '") + key + "'";
            }
        }
    }
    if (!j["estimates"].is_array() || !j["checks"].is_array()) {
        return "estimates and checks must be arrays";
    }
    for (const auto& e : j["estimates"]) {
        for (const char* key : {"aggregate", "estimator", "median", "q10", "q90", "replications",
                                "failures"}) {
            if (!e.contains(key)) {
                return std::string("estimate entry lacks '") + key + "'";
            }
        }
    }
    bool all_pass = true;
    for (const auto& c : j["checks"]) {
        for (const char* key : {"name", "value", "target", "lo", "hi", "pass"}) {
            if (!c.contains(key)) {
                return std::string("check entry lacks '") + key + "'";
            }
        }
        all_pass = all_pass && c["pass"].get<bool>();
    }
    if (!j["pass"].is_boolean()) {
        return "pass must be a boolean";
    }
    if (j["pass"].get<bool>() != all_pass) {
        return "pass flag disagrees with the recorded checks";
    }
    return "";
}

VerificationReport run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
    cfg.validate();
    VerificationReport report;
    report.kind = cfg.kind;
    report.seed = cfg.seed;
    report.timestamp = utc_timestamp();
    // Output location and worker count do not influence results.
    ExperimentConfig canonical = cfg;
    canonical.out.clear();
    canonical.jobs = 1;
    report.config_hash = config_hash(canonical);
    for (auto& kv : to_key_values(canonical)) {
        if (kv.first != "out" && kv.first != "jobs") {
            report.config.push_back(std::move(kv));
        }
    }

    const std::string dir = options.out_dir.empty() ? cfg.out : options.out_dir;
    std::optional<OutputSet> files;
    if (options.write_files) {
        files.emplace(dir);
    }
    OutputSet* out = files ? &*files : nullptr;

    switch (cfg.kind) {
        case ExperimentKind::VerifyThm1:
        case ExperimentKind::VerifyThm2:
        case ExperimentKind::VerifyThm3: {
            report.prediction = predict_for(cfg);
            const auto columns = cfg.fixed_columns();
            run_replicated(
                cfg,
                [&columns](std::size_t n, RngSeed seed) {
                    return sample_fixed_aggregate(columns, n, seed);
                },
                report, out,
                [](const PairedPaths& p, OutputSet& f) {
                    auto os = f.open("path_fixed.csv");
                    os.precision(17);
                    os << "sum,max\n";
                    for (std::size_t t = 0; t < p.sum.size(); ++t) {
                        os << p.sum[t] << ',' << p.max[t] << '\n';
                    }
                });
            break;
        }
        case ExperimentKind::VerifyThm4: {
            report.prediction = predict_for(cfg);
            const RecursionConfig rc = cfg.recursion_config();
            report.details["c_series_unstable"] = report.prediction->c_series_unstable;
            run_replicated(
                cfg,
                [&rc](std::size_t n, RngSeed seed) { return sample_aggregate_pair(rc, n, seed); },
                report, out,
                [&rc, &cfg](const PairedPaths& p, OutputSet& f) {
                    AggregatePath path;
                    path.config = rc;
                    path.seed = derive_stream(cfg.seed, "replication", 0);
                    path.values = p.sum;
                    path.config.aggregate = Aggregate::Sum;
                    auto s = f.open("path_sum.csv");
                    write_path_csv(s, path);
                    path.values = p.max;
                    path.config.aggregate = Aggregate::Max;
                    auto m = f.open("path_max.csv");
                    write_path_csv(m, path);
                });
            break;
        }
        case ExperimentKind::TailEquivalence:
            report.prediction = predict_for(cfg);
            run_tail_equivalence(cfg, report);
            break;
        case ExperimentKind::GraphDemo:
            run_graph_demo(cfg, report, out);
            break;
    }

    report.pass = std::all_of(report.checks.begin(), report.checks.end(),
                              [](const Check& c) { return c.pass; });

    if (out != nullptr) {
        {
            auto os = out->open("report.json");
            os << to_json(report).dump(2) << '\n';
        }
        if (!report.estimates.empty()) {
            auto os = out->open("estimates.csv");
            write_estimates_csv(os, report);
        }
        out->commit();
    }
    return report;
}

}  // namespace rank_extremes
