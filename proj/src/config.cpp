#include "rank_extremes/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

#include "rank_extremes/errors.hpp"

namespace rank_extremes {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) {
        return "";
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string fmt_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& key, const std::string& text) {
    const std::string s = trim(text);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + text + "'");
    }
    return v;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& text) {
    const std::string s = trim(text);
    Int v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ConfigError("config key '" + key + "': expected an integer, got '" + text + "'");
    }
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    const std::string s = trim(text);
    if (s == "true" || s == "1" || s == "yes") {
        return true;
    }
    if (s == "false" || s == "0" || s == "no") {
        return false;
    }
    throw ConfigError("config key '" + key + "': expected true/false, got '" + text + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::string item;
    if (trim(text).empty()) {
        return out;
    }
    std::istringstream is(text + ",");
    while (std::getline(is, item, ',')) {
        if (trim(item).empty()) {
            throw ConfigError("empty list item for key '" + key + "'");
        }
        out.push_back(parse_double(key, item));
    }
    return out;
}

std::string fmt_list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        s += (i ? "," : "") + fmt_double(v[i]);
    }
    return s;
}

struct Field {
    std::string key;
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, const std::string&)> set;
};

template <class T>
Field bind(const char* key, T ExperimentConfig::*member) {
    Field f;
    f.key = key;
    if constexpr (std::is_same_v<T, double>) {
        f.get = [member](const ExperimentConfig& c) { return fmt_double(c.*member); };
        f.set = [member, key](ExperimentConfig& c, const std::string& v) {
            c.*member = parse_double(key, v);
        };
    } else if constexpr (std::is_same_v<T, bool>) {
        f.get = [member](const ExperimentConfig& c) { return c.*member ? "true" : "false"; };
        f.set = [member, key](ExperimentConfig& c, const std::string& v) {
            c.*member = parse_bool(key, v);
        };
    } else if constexpr (std::is_same_v<T, std::string>) {
        f.get = [member](const ExperimentConfig& c) { return c.*member; };
        f.set = [member](ExperimentConfig& c, const std::string& v) { c.*member = trim(v); };
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
        f.get = [member](const ExperimentConfig& c) { return fmt_list(c.*member); };
        f.set = [member, key](ExperimentConfig& c, const std::string& v) {
            c.*member = parse_list(key, v);
        };
    } else {
        static_assert(std::is_integral_v<T>);
        f.get = [member](const ExperimentConfig& c) { return std::to_string(c.*member); };
        f.set = [member, key](ExperimentConfig& c, const std::string& v) {
            c.*member = parse_int<T>(key, v);
        };
    }
    return f;
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = [] {
        std::vector<Field> t;
        t.push_back({"experiment",
                     [](const ExperimentConfig& c) { return to_string(c.kind); },
                     [](ExperimentConfig& c, const std::string& v) {
                         c.kind = parse_experiment_kind(trim(v));
                     }});
        t.push_back(bind("seed", &ExperimentConfig::seed));
        t.push_back(bind("replications", &ExperimentConfig::replications));
        t.push_back(bind("n", &ExperimentConfig::n));
        t.push_back(bind("jobs", &ExperimentConfig::jobs));
        t.push_back(bind("out", &ExperimentConfig::out));
        t.push_back(bind("write_paths", &ExperimentConfig::write_paths));
        t.push_back(bind("weights", &ExperimentConfig::weights));
        t.push_back(bind("tail_indices", &ExperimentConfig::tail_indices));
        t.push_back(bind("scales", &ExperimentConfig::scales));
        t.push_back(bind("thetas", &ExperimentConfig::thetas));
        t.push_back(bind("damping", &ExperimentConfig::damping));
        t.push_back(bind("alpha", &ExperimentConfig::alpha));
        t.push_back(bind("n_max", &ExperimentConfig::n_max));
        t.push_back(bind("follower_k", &ExperimentConfig::follower_k));
        t.push_back(bind("follower_c", &ExperimentConfig::follower_c));
        t.push_back(bind("follower_thetas", &ExperimentConfig::follower_thetas));
        t.push_back(bind("beta", &ExperimentConfig::beta));
        t.push_back(bind("preference_c", &ExperimentConfig::preference_c));
        t.push_back({"coupling",
                     [](const ExperimentConfig& c) { return to_string(c.coupling); },
                     [](ExperimentConfig& c, const std::string& v) {
                         const std::string s = trim(v);
                         if (s == "independent") {
                             c.coupling = Coupling::Independent;
                         } else if (s == "comonotone") {
                             c.coupling = Coupling::Comonotone;
                         } else {
                             throw ConfigError("config key 'coupling': expected independent or "
                                               "comonotone, got '" + v + "'");
                         }
                     }});
        t.push_back(bind("hill_fraction", &ExperimentConfig::hill_fraction));
        t.push_back(bind("blocks_quantile", &ExperimentConfig::blocks_quantile));
        t.push_back(bind("block_length", &ExperimentConfig::block_length));
        t.push_back(bind("intervals_quantile", &ExperimentConfig::intervals_quantile));
        t.push_back(bind("runs_quantile", &ExperimentConfig::runs_quantile));
        t.push_back(bind("run_gap", &ExperimentConfig::run_gap));
        t.push_back(bind("theta_estimators", &ExperimentConfig::theta_estimators));
        t.push_back(bind("k_aggregates", &ExperimentConfig::k_aggregates));
        t.push_back(bind("theta_aggregates", &ExperimentConfig::theta_aggregates));
        t.push_back(bind("definition_replications", &ExperimentConfig::definition_replications));
        t.push_back(bind("definition_n", &ExperimentConfig::definition_n));
        t.push_back(bind("definition_tau", &ExperimentConfig::definition_tau));
        t.push_back(bind("check_k", &ExperimentConfig::check_k));
        t.push_back(bind("check_theta", &ExperimentConfig::check_theta));
        t.push_back(bind("check_sum_max", &ExperimentConfig::check_sum_max));
        t.push_back(bind("tol_k_rel", &ExperimentConfig::tol_k_rel));
        t.push_back(bind("tol_theta", &ExperimentConfig::tol_theta));
        t.push_back(bind("tol_sum_max", &ExperimentConfig::tol_sum_max));
        t.push_back(bind("tail_quantiles", &ExperimentConfig::tail_quantiles));
        t.push_back(bind("ratio_lo", &ExperimentConfig::ratio_lo));
        t.push_back(bind("ratio_hi", &ExperimentConfig::ratio_hi));
        t.push_back(bind("graph_n", &ExperimentConfig::graph_n));
        t.push_back(bind("graph_alpha", &ExperimentConfig::graph_alpha));
        t.push_back(bind("top_ps", &ExperimentConfig::top_ps));
        t.push_back(bind("walk_trials", &ExperimentConfig::walk_trials));
        t.push_back(bind("overlap_min", &ExperimentConfig::overlap_min));
        t.push_back(bind("graph_preference", &ExperimentConfig::graph_preference));
        t.push_back(bind("graph_beta", &ExperimentConfig::graph_beta));
        return t;
    }();
    return table;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::VerifyThm1: return "verify-thm1";
        case ExperimentKind::VerifyThm2: return "verify-thm2";
        case ExperimentKind::VerifyThm3: return "verify-thm3";
        case ExperimentKind::VerifyThm4: return "verify-thm4";
        case ExperimentKind::TailEquivalence: return "tail-equivalence";
        case ExperimentKind::GraphDemo: return "graph-demo";
    }
    return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
    for (auto kind : {ExperimentKind::VerifyThm1, ExperimentKind::VerifyThm2,
                      ExperimentKind::VerifyThm3, ExperimentKind::VerifyThm4,
                      ExperimentKind::TailEquivalence, ExperimentKind::GraphDemo}) {
        if (to_string(kind) == name) {
            return kind;
        }
    }
    throw ConfigError("unknown experiment kind '" + name + "'");
}

void ExperimentConfig::validate() const {
    if (replications < 1) {
        throw ConfigError("replications must be >= 1");
    }
    if (n < 1000) {
        throw ConfigError("path length n must be >= 1000");
    }
    if (jobs < 1) {
        throw ConfigError("jobs must be >= 1");
    }
    switch (kind) {
        case ExperimentKind::VerifyThm1:
        case ExperimentKind::VerifyThm2:
        case ExperimentKind::VerifyThm3: {
            const auto l = weights.size();
            if (l == 0 || tail_indices.size() != l || scales.size() != l || thetas.size() != l) {
                throw ConfigError("weights, tail_indices, scales and thetas must have the same "
                                  "nonzero length");
            }
            for (const auto& col : fixed_columns()) {
                col.seq.validate();
            }
            break;
        }
        case ExperimentKind::VerifyThm4:
        case ExperimentKind::TailEquivalence:
            recursion_config().validate();
            break;
        case ExperimentKind::GraphDemo:
            if (graph_n < 2) {
                throw ConfigError("graph_n must be >= 2");
            }
            if (graph_preference != "uniform" && graph_preference != "pareto") {
                throw ConfigError("graph_preference must be uniform or pareto");
            }
            if (!(graph_beta > 0.0)) {
                throw ConfigError("graph_beta must be > 0");
            }
            break;
    }
}

RecursionConfig ExperimentConfig::recursion_config() const {
    RecursionConfig rc;
    rc.damping = damping;
    rc.in_degree = {alpha, n_max};
    rc.follower_tail = {follower_k, follower_c};
    rc.preference_tail = {beta, preference_c};
    rc.coupling = coupling;
    rc.follower_dep = cyclic_dependence(follower_thetas, follower_k,
                                        static_cast<std::size_t>(std::max<std::int64_t>(n_max, 1)));
    return rc;
}

std::vector<FixedColumn> ExperimentConfig::fixed_columns() const {
    std::vector<FixedColumn> cols;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const TailSpec tail{tail_indices.at(i), scales.at(i)};
        tail.validate();
        cols.push_back({weights[i], {tail, dependence_for_theta(thetas.at(i), tail.k)}});
    }
    return cols;
}

ExperimentConfig default_config(ExperimentKind kind) {
    ExperimentConfig c;
    c.kind = kind;
    switch (kind) {
        case ExperimentKind::VerifyThm1:
            c.weights = {1.0, 1.0};
            c.tail_indices = {1.5, 3.0};
            c.scales = {1.0, 1.0};
            c.thetas = {0.5, 1.0};
            break;
        case ExperimentKind::VerifyThm2:
            c.check_k = false;
            break;
        case ExperimentKind::VerifyThm3:
            c.weights = {1.0, 1.0, 1.0};
            c.tail_indices = {1.0, 2.0, 3.0};
            c.scales = {1.0, 1.0, 1.0};
            c.thetas = {0.5, 1.0, 1.0};
            break;
        case ExperimentKind::VerifyThm4:
            c.follower_thetas = {1.0, 0.5};
            c.tol_theta = 0.1;
            break;
        case ExperimentKind::TailEquivalence:
            c.n = 10'000'000;
            c.replications = 1;
            c.write_paths = false;
            break;
        case ExperimentKind::GraphDemo:
            c.damping = 0.85;
            c.check_k = false;
            c.check_theta = false;
            c.check_sum_max = false;
            break;
    }
    return c;
}

std::vector<std::pair<std::string, std::string>> to_key_values(const ExperimentConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> kv;
    for (const auto& f : fields()) {
        kv.emplace_back(f.key, f.get(cfg));
    }
    return kv;
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    const std::string k = trim(key);
    for (const auto& f : fields()) {
        if (f.key == k) {
            f.set(cfg, value);
            return;
        }
    }
    throw ConfigError("unknown config key '" + k + "'");
}

std::string serialize(const ExperimentConfig& cfg) {
    std::string out;
    for (const auto& [k, v] : to_key_values(cfg)) {
        out += k + " = " + v + "\n";
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> parse_assignments(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> assignments;
    std::istringstream is(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        if (trim(line).empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        assignments.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return assignments;
}

ExperimentConfig parse_config(const std::string& text) {
    const auto assignments = parse_assignments(text);
    ExperimentConfig cfg;
    for (const auto& [k, v] : assignments) {
        if (k == "experiment") {
            cfg = default_config(parse_experiment_kind(v));
        }
    }
    for (const auto& [k, v] : assignments) {
        apply_setting(cfg, k, v);
    }
    return cfg;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open file '" + path + "'");
    }
    std::ostringstream body;
    body << in.rdbuf();
    return body.str();
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_text_file(path)); }

std::string config_hash(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << tag_hash(serialize(cfg));
    return os.str();
}

}  // namespace rank_extremes
