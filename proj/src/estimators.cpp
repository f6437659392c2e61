#include "rank_extremes/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "rank_extremes/errors.hpp"

namespace rank_extremes {

namespace {

// Lower clamp for extremal-index estimates, which must stay in (0, 1].
constexpr double kThetaFloor = 1e-6;

void clamp_theta(EstimateReport& r) {
    r.estimate = r.raw_estimate;
    if (r.raw_estimate > 1.0) {
        r.estimate = 1.0;
        r.clamped = true;
    } else if (!(r.raw_estimate >= kThetaFloor)) {
        r.estimate = kThetaFloor;
        r.clamped = true;
    }
}

std::size_t count_above(std::span<const double> x, double u) {
    return static_cast<std::size_t>(
        std::count_if(x.begin(), x.end(), [u](double v) { return v > u; }));
}

template <class T>
std::string opt_str(const std::optional<T>& v) {
    if (!v) {
        return "";
    }
    std::ostringstream os;
    os.precision(17);
    os << *v;
    return os.str();
}

}  // namespace

void to_json(nlohmann::json& j, const EstimateReport& r) {
    j = nlohmann::json{{"method", r.method},
                       {"estimate", r.estimate},
                       {"raw_estimate", r.raw_estimate},
                       {"clamped", r.clamped},
                       {"n", r.n},
                       {"threshold", r.threshold},
                       {"exceedances", r.exceedances}};
    const auto put = [&j](const char* key, const auto& v) {
        j[key] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    };
    put("block_length", r.block_length);
    put("blocks", r.blocks);
    put("run_gap", r.run_gap);
    put("replications", r.replications);
    put("non_exceeding_maxima", r.non_exceeding_maxima);
    put("tau", r.tau);
    put("seed", r.seed);
}

std::string estimate_csv_header() {
    return "method,estimate,raw_estimate,clamped,n,threshold,exceedances,block_length,blocks,"
           "run_gap,replications,non_exceeding_maxima,tau,seed";
}

std::string estimate_csv_row(const EstimateReport& r) {
    std::ostringstream os;
    os.precision(17);
    os << r.method << ',' << r.estimate << ',' << r.raw_estimate << ',' << (r.clamped ? 1 : 0)
       << ',' << r.n << ',' << r.threshold << ',' << r.exceedances << ','
       << opt_str(r.block_length) << ',' << opt_str(r.blocks) << ',' << opt_str(r.run_gap) << ','
       << opt_str(r.replications) << ',' << opt_str(r.non_exceeding_maxima) << ','
       << opt_str(r.tau) << ',' << opt_str(r.seed);
    return os.str();
}

double nearest_rank_quantile(std::span<const double> x, double q) {
    if (x.empty()) {
        throw DataError("quantile of an empty sample");
    }
    if (!(q >= 0.0 && q <= 1.0)) {
        throw ParameterError("quantile level must lie in [0, 1]");
    }
    const auto n = x.size();
    auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
    rank = std::clamp<std::size_t>(rank, 1, n);
    std::vector<double> copy(x.begin(), x.end());
    std::nth_element(copy.begin(), copy.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                     copy.end());
    return copy[rank - 1];
}

std::size_t default_block_length(std::size_t n) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(n))));
}

std::size_t default_run_gap(std::size_t n) {
    if (n < 2) {
        return 1;
    }
    return std::max<std::size_t>(1,
                                 static_cast<std::size_t>(std::ceil(std::log(static_cast<double>(n)))));
}

EstimateReport hill(std::span<const double> path, const ThresholdRule& rule,
                    std::size_t min_count) {
    const std::size_t n = path.size();
    std::size_t m = 0;
    if (const auto* f = std::get_if<TopFraction>(&rule)) {
        if (!(f->p > 0.0 && f->p < 1.0)) {
            throw ParameterError("TopFraction needs p in (0, 1)");
        }
        m = static_cast<std::size_t>(std::floor(f->p * static_cast<double>(n)));
    } else if (const auto* c = std::get_if<TopCount>(&rule)) {
        if (c->count < 1) {
            throw ParameterError("TopCount needs count >= 1");
        }
        m = c->count;
    } else {
        const double q = std::get<QuantileRule>(rule).q;
        if (!(q > 0.0 && q < 1.0)) {
            throw ParameterError("Quantile rule needs q in (0, 1)");
        }
        m = count_above(path, nearest_rank_quantile(path, q));
    }
    if (m < std::max<std::size_t>(min_count, 1) || m + 1 > n) {
        throw DataError("Hill estimator needs at least " + std::to_string(min_count) +
                        " order statistics above the threshold and one at it; got m=" +
                        std::to_string(m) + " of n=" + std::to_string(n));
    }

    std::vector<double> top(path.begin(), path.end());
    const auto cut = top.begin() + static_cast<std::ptrdiff_t>(m + 1);
    std::partial_sort(top.begin(), cut, top.end(), std::greater<>());
    const double base = top[m];
    if (!(base > 0.0)) {
        throw DataError("Hill estimator needs positive values in the tail region");
    }
    double sum_log = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        sum_log += std::log(top[i] / base);
    }
    if (!(sum_log > 0.0)) {
        throw DataError("Hill estimator undefined: all tail log-ratios are zero");
    }
    EstimateReport r;
    r.method = "hill";
    r.estimate = r.raw_estimate = static_cast<double>(m) / sum_log;
    r.n = n;
    r.threshold = base;
    r.exceedances = m;
    return r;
}

EstimateReport blocks_theta(std::span<const double> path, double u, std::size_t block_length) {
    const std::size_t n = path.size();
    if (block_length < 1 || n < 10 * block_length) {
        throw ParameterError("blocks estimator needs n >= 10 b and b >= 1");
    }
    const std::size_t n_blocks = n / block_length;
    const std::size_t used = n_blocks * block_length;
    std::size_t exceed = 0;
    std::size_t quiet_blocks = 0;
    for (std::size_t b = 0; b < n_blocks; ++b) {
        const auto block = path.subspan(b * block_length, block_length);
        const std::size_t e = count_above(block, u);
        exceed += e;
        quiet_blocks += e == 0 ? 1 : 0;
    }
    if (exceed == 0) {
        throw DataError("blocks estimator: no exceedances of the threshold");
    }
    if (quiet_blocks == 0) {
        throw DataError("blocks estimator undefined: every block exceeds the threshold "
                        "(threshold too low)");
    }
    const double p = static_cast<double>(exceed) / static_cast<double>(used);
    const double share = static_cast<double>(quiet_blocks) / static_cast<double>(n_blocks);
    EstimateReport r;
    r.method = "blocks";
    r.raw_estimate = std::log(share) / (static_cast<double>(block_length) * std::log1p(-p));
    clamp_theta(r);
    r.n = n;
    r.threshold = u;
    r.exceedances = exceed;
    r.block_length = block_length;
    r.blocks = n_blocks;
    return r;
}

EstimateReport intervals_theta(std::span<const double> path, double u) {
    std::vector<std::size_t> times;
    for (std::size_t t = 0; t < path.size(); ++t) {
        if (path[t] > u) {
            times.push_back(t);
        }
    }
    if (times.size() < 2) {
        throw DataError("intervals estimator needs at least two exceedances");
    }
    const double gaps = static_cast<double>(times.size() - 1);
    double s1 = 0.0;
    double s2 = 0.0;
    std::size_t max_gap = 0;
    for (std::size_t i = 1; i < times.size(); ++i) {
        max_gap = std::max(max_gap, times[i] - times[i - 1]);
    }
    if (max_gap <= 2) {
        for (std::size_t i = 1; i < times.size(); ++i) {
            const double g = static_cast<double>(times[i] - times[i - 1]);
            s1 += g;
            s2 += g * g;
        }
    } else {
        for (std::size_t i = 1; i < times.size(); ++i) {
            const double g = static_cast<double>(times[i] - times[i - 1]);
            s1 += g - 1.0;
            s2 += (g - 1.0) * (g - 2.0);
        }
    }
    EstimateReport r;
    r.method = "intervals";
    r.raw_estimate = 2.0 * s1 * s1 / (gaps * s2);
    clamp_theta(r);
    // The estimator is defined as min(1, .); exceeding 1 is not a clamp event.
    if (r.raw_estimate > 1.0) {
        r.clamped = false;
    }
    r.n = path.size();
    r.threshold = u;
    r.exceedances = times.size();
    return r;
}

DefinitionThetaAccumulator::DefinitionThetaAccumulator(std::size_t path_length,
                                                       std::size_t replications, double tau)
    : path_length_(path_length), replications_(replications), tau_(tau) {
    if (replications < 100) {
        throw ParameterError("definition estimator needs at least 100 replications");
    }
    if (!(tau > 0.0)) {
        throw ParameterError("definition estimator needs tau > 0");
    }
    if (path_length < 1 || tau >= static_cast<double>(path_length)) {
        throw ParameterError("definition estimator needs tau < n");
    }
    // Nearest-rank index of the (1 - tau/n) quantile among N pooled values,
    // expressed as a rank from the top.
    const double total = static_cast<double>(path_length) * static_cast<double>(replications);
    const double q = 1.0 - tau / static_cast<double>(path_length);
    const auto rank = std::clamp(std::ceil(q * total), 1.0, total);
    keep_ = static_cast<std::size_t>(total - rank) + 1;
    maxima_.reserve(replications);
}

void DefinitionThetaAccumulator::add_path(std::span<const double> path) {
    if (path.size() != path_length_) {
        throw ParameterError("definition estimator: replication length mismatch");
    }
    if (maxima_.size() == replications_) {
        throw ParameterError("definition estimator: more replications than declared");
    }
    maxima_.push_back(*std::max_element(path.begin(), path.end()));
    for (double v : path) {
        if (top_.size() < keep_) {
            top_.push(v);
        } else if (v > top_.top()) {
            top_.pop();
            top_.push(v);
        }
    }
}

EstimateReport DefinitionThetaAccumulator::finish() const {
    if (maxima_.size() != replications_) {
        throw ParameterError("definition estimator: fewer replications than declared");
    }
    const double u = top_.top();
    const auto quiet = static_cast<std::size_t>(
        std::count_if(maxima_.begin(), maxima_.end(), [u](double m) { return m <= u; }));
    if (quiet == 0) {
        throw DataError("definition estimator: every replication maximum exceeds u_n "
                        "(threshold failure)");
    }
    std::size_t exceed = 0;
    // Pooled exceedances of u are the retained values strictly above it.
    auto copy = top_;
    while (!copy.empty()) {
        exceed += copy.top() > u ? 1 : 0;
        copy.pop();
    }
    EstimateReport r;
    r.method = "definition";
    r.raw_estimate = -std::log(static_cast<double>(quiet) / static_cast<double>(replications_)) /
                     tau_;
    clamp_theta(r);
    r.n = path_length_;
    r.threshold = u;
    r.exceedances = exceed;
    r.replications = replications_;
    r.non_exceeding_maxima = quiet;
    r.tau = tau_;
    return r;
}

EstimateReport definition_theta(std::span<const std::vector<double>> paths, double tau) {
    if (paths.empty()) {
        throw ParameterError("definition estimator needs replications");
    }
    DefinitionThetaAccumulator acc(paths.front().size(), paths.size(), tau);
    for (const auto& p : paths) {
        acc.add_path(p);
    }
    return acc.finish();
}

ClusterStats mean_cluster_size(std::span<const double> path, double u, std::size_t run_gap) {
    if (run_gap < 1) {
        throw ParameterError("run gap must be >= 1");
    }
    ClusterStats s;
    std::size_t last = 0;
    for (std::size_t t = 0; t < path.size(); ++t) {
        if (!(path[t] > u)) {
            continue;
        }
        if (s.exceedances == 0 || t - last - 1 >= run_gap) {
            ++s.clusters;
        }
        ++s.exceedances;
        last = t;
    }
    if (s.exceedances == 0) {
        throw DataError("cluster statistics need at least one exceedance");
    }
    s.mean_size = static_cast<double>(s.exceedances) / static_cast<double>(s.clusters);
    s.theta_runs = static_cast<double>(s.clusters) / static_cast<double>(s.exceedances);
    return s;
}

}  // namespace rank_extremes
