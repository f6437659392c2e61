#include "rank_extremes/recursion.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <ostream>

#include "rank_extremes/errors.hpp"
#include "rank_extremes/estimators.hpp"

namespace rank_extremes {

namespace {

constexpr double kMaxTreeSize = 1e8;
constexpr std::size_t kMinReliableExceedances = 50;

struct AggregateSources {
    PowerLawInt in_degree;
    std::vector<StationaryColumn> columns;
    std::uint64_t in_degree_key;
    std::uint64_t preference_key;
    std::uint64_t coupling_key;  // stream whose uniform drives N_t under comonotone coupling

    AggregateSources(const RecursionConfig& config, RngSeed seed)
        : in_degree(config.in_degree),
          in_degree_key(derive_stream(seed, "in_degree")),
          preference_key(derive_stream(seed, "preference")),
          coupling_key(derive_stream(seed, "column", 0)) {
        const auto count = static_cast<std::size_t>(config.in_degree.n_max);
        columns.reserve(count);
        for (std::size_t j = 0; j < count; ++j) {
            columns.emplace_back(SequenceSpec{config.follower_tail, config.follower_dep[j]},
                                 derive_stream(seed, "column", j));
        }
    }
};

template <class Emit>
void run_aggregate(const RecursionConfig& config, std::size_t n, RngSeed seed, Emit&& emit) {
    config.validate();
    if (n < 1) {
        throw ParameterError("path length must be >= 1");
    }
    const AggregateSources src(config, seed);
    const double c = config.damping;
    const double z_star = config.z_star();
    for (std::size_t i = 0; i < n; ++i) {
        const auto t = static_cast<std::int64_t>(i);
        const double v = config.coupling == Coupling::Comonotone
                             ? counter_uniform(src.coupling_key, t)
                             : counter_uniform(src.in_degree_key, t);
        const auto in_deg = static_cast<std::size_t>(src.in_degree.from_survival(v));
        const double q = pareto_quantile(config.preference_tail,
                                         counter_uniform(src.preference_key, t));
        double sum = z_star * q;
        double max = z_star * q;
        for (std::size_t j = 0; j < in_deg; ++j) {
            const double term = c * src.columns[j].value(t);
            sum += term;
            max = std::max(max, term);
        }
        emit(i, sum, max);
    }
}

}  // namespace

std::string to_string(Aggregate a) { return a == Aggregate::Sum ? "SUM" : "MAX"; }

std::string to_string(Coupling c) {
    return c == Coupling::Independent ? "independent" : "comonotone";
}

void RecursionConfig::validate() const {
    if (!(damping > 0.0 && damping < 1.0)) {
        throw ParameterError("damping c must lie in (0, 1)");
    }
    in_degree.validate();
    follower_tail.validate();
    preference_tail.validate();
    if (out_degree) {
        out_degree->validate();
    }
    if (follower_dep.size() < static_cast<std::size_t>(in_degree.n_max)) {
        throw ConfigError("column shortage: in-degree truncation n_max=" +
                          std::to_string(in_degree.n_max) + " but only " +
                          std::to_string(follower_dep.size()) + " follower columns configured");
    }
    for (const auto& dep : follower_dep) {
        rank_extremes::validate(dep);
    }
}

std::vector<DependenceSpec> cyclic_dependence(std::span<const double> thetas, double k,
                                              std::size_t count) {
    if (thetas.empty()) {
        throw ParameterError("cyclic dependence needs at least one extremal index");
    }
    std::vector<DependenceSpec> base;
    base.reserve(thetas.size());
    for (double th : thetas) {
        base.push_back(dependence_for_theta(th, k));
    }
    std::vector<DependenceSpec> out;
    out.reserve(count);
    for (std::size_t j = 0; j < count; ++j) {
        out.push_back(base[j % base.size()]);
    }
    return out;
}

double aggregate_step(std::span<const double> followers, double q, double damping,
                      Aggregate aggregate) {
    double acc = (1.0 - damping) * q;
    for (double y : followers) {
        const double term = damping * y;
        acc = aggregate == Aggregate::Sum ? acc + term : std::max(acc, term);
    }
    return acc;
}

AggregatePath sample_aggregate(const RecursionConfig& config, std::size_t n, RngSeed seed) {
    AggregatePath path;
    path.config = config;
    path.seed = seed;
    path.values.resize(n);
    const bool use_sum = config.aggregate == Aggregate::Sum;
    run_aggregate(config, n, seed, [&](std::size_t i, double sum, double max) {
        path.values[i] = use_sum ? sum : max;
    });
    return path;
}

PairedPaths sample_aggregate_pair(const RecursionConfig& config, std::size_t n, RngSeed seed) {
    PairedPaths out;
    out.sum.resize(n);
    out.max.resize(n);
    run_aggregate(config, n, seed, [&](std::size_t i, double sum, double max) {
        out.sum[i] = sum;
        out.max[i] = max;
    });
    return out;
}

PairedPaths sample_fixed_aggregate(std::span<const FixedColumn> columns, std::size_t n,
                                   RngSeed seed) {
    if (columns.empty()) {
        throw ParameterError("fixed aggregate needs at least one column");
    }
    if (n < 1) {
        throw ParameterError("path length must be >= 1");
    }
    PairedPaths out;
    out.sum.assign(n, 0.0);
    out.max.assign(n, 0.0);
    std::vector<double> buf(n);
    for (std::size_t i = 0; i < columns.size(); ++i) {
        const auto& col = columns[i];
        if (!(col.weight > 0.0)) {
            throw ParameterError("column weights must be > 0");
        }
        StationaryColumn(col.seq, derive_stream(seed, "column", i)).fill(0, buf);
        for (std::size_t t = 0; t < n; ++t) {
            const double term = col.weight * buf[t];
            out.sum[t] += term;
            out.max[t] = std::max(out.max[t], term);
        }
    }
    return out;
}

void write_path_csv(std::ostream& os, const AggregatePath& path) {
    const auto& cfg = path.config;
    const auto old_precision = os.precision(17);
    os << "# damping=" << cfg.damping << '\n'
       << "# in_degree.alpha=" << cfg.in_degree.alpha << '\n'
       << "# in_degree.n_max=" << cfg.in_degree.n_max << '\n'
       << "# follower.k=" << cfg.follower_tail.k << '\n'
       << "# follower.c=" << cfg.follower_tail.c << '\n'
       << "# preference.beta=" << cfg.preference_tail.k << '\n'
       << "# preference.c=" << cfg.preference_tail.c << '\n'
       << "# aggregate=" << to_string(cfg.aggregate) << '\n'
       << "# coupling=" << to_string(cfg.coupling) << '\n'
       << "# columns=" << cfg.follower_dep.size() << '\n'
       << "# seed=" << path.seed << '\n'
       << "# n=" << path.values.size() << '\n'
       << "value\n";
    for (double v : path.values) {
        os << v << '\n';
    }
    os.precision(old_precision);
}

TbtLaws make_tbt_laws(const RecursionConfig& config) {
    config.validate();
    TbtLaws laws;
    auto in_law = std::make_shared<PowerLawInt>(config.in_degree);
    laws.mean_in_degree = in_law->mean();
    laws.in_degree = [in_law](Rng& rng) { return in_law->from_survival(rng.unit()); };
    if (config.out_degree) {
        auto out_law = std::make_shared<PowerLawInt>(*config.out_degree);
        laws.out_degree = [out_law](Rng& rng) { return out_law->from_survival(rng.unit()); };
    } else {
        laws.out_degree = [](Rng&) -> std::int64_t { return 1; };
    }
    const TailSpec pref = config.preference_tail;
    laws.preference = [pref](Rng& rng) { return pareto_quantile(pref, rng.unit()); };
    laws.damping = config.damping;
    laws.aggregate = config.aggregate;
    return laws;
}

double expected_tree_size(double mean_in_degree, std::size_t depth) {
    double total = 0.0;
    double level = 1.0;
    for (std::size_t d = 0; d <= depth; ++d) {
        total += level;
        level *= mean_in_degree;
        if (total >= kMaxTreeSize) {
            break;
        }
    }
    return total;
}

namespace {

double expand_node(const TbtLaws& laws, Rng& rng, std::size_t depth) {
    const double leaf = (1.0 - laws.damping) * laws.preference(rng);
    if (depth == 0) {
        return leaf;
    }
    const std::int64_t children = laws.in_degree(rng);
    double acc = leaf;
    for (std::int64_t j = 0; j < children; ++j) {
        const auto out_deg = static_cast<double>(laws.out_degree(rng));
        const double term = laws.damping / out_deg * expand_node(laws, rng, depth - 1);
        acc = laws.aggregate == Aggregate::Sum ? acc + term : std::max(acc, term);
    }
    return acc;
}

}  // namespace

TbtSample simulate_tbt(const TbtLaws& laws, std::size_t depth, std::size_t n_roots,
                       RngSeed seed) {
    if (n_roots < 1) {
        throw ParameterError("simulate_tbt needs n_roots >= 1");
    }
    if (!(laws.damping > 0.0 && laws.damping < 1.0)) {
        throw ParameterError("damping c must lie in (0, 1)");
    }
    const double size = expected_tree_size(laws.mean_in_degree, depth);
    if (size >= kMaxTreeSize) {
        throw ResourceError("expected tree size " + std::to_string(size) + " at depth " +
                            std::to_string(depth) + " reaches the 1e8 node bound");
    }
    TbtSample out;
    out.depth = depth;
    out.root_values.resize(n_roots);
    for (std::size_t r = 0; r < n_roots; ++r) {
        Rng rng(derive_stream(seed, "tbt_root", r));
        out.root_values[r] = expand_node(laws, rng, depth);
    }
    return out;
}

TbtSample simulate_tbt(const RecursionConfig& config, std::size_t depth, std::size_t n_roots,
                       RngSeed seed) {
    return simulate_tbt(make_tbt_laws(config), depth, n_roots, seed);
}

std::vector<TailRatioRow> compare_tail_sum_max(const RecursionConfig& config, std::size_t n,
                                               std::span<const double> quantiles, RngSeed seed) {
    for (double q : quantiles) {
        if (!(q > 0.9 && q < 1.0)) {
            throw ParameterError("tail comparison quantiles must lie in (0.9, 1)");
        }
    }
    std::vector<TailRatioRow> rows;
    if (quantiles.empty()) {
        return rows;
    }
    const PairedPaths paths = sample_aggregate_pair(config, n, seed);
    for (double q : quantiles) {
        TailRatioRow row;
        row.quantile = q;
        row.threshold = nearest_rank_quantile(paths.max, q);
        const double x = row.threshold;
        row.exceed_sum = static_cast<std::size_t>(
            std::count_if(paths.sum.begin(), paths.sum.end(), [x](double v) { return v > x; }));
        row.exceed_max = static_cast<std::size_t>(
            std::count_if(paths.max.begin(), paths.max.end(), [x](double v) { return v > x; }));
        row.reliable = row.exceed_sum >= kMinReliableExceedances &&
                       row.exceed_max >= kMinReliableExceedances;
        if (row.exceed_max > 0 && row.exceed_sum > 0) {
            row.ratio = static_cast<double>(row.exceed_sum) / static_cast<double>(row.exceed_max);
            const double se = std::sqrt(1.0 / static_cast<double>(row.exceed_sum) +
                                        1.0 / static_cast<double>(row.exceed_max));
            row.band_lo = row.ratio * std::exp(-2.0 * se);
            row.band_hi = row.ratio * std::exp(2.0 * se);
        } else {
            row.reliable = false;
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace rank_extremes
