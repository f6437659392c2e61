#include "rank_extremes/heavytail.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rank_extremes/errors.hpp"

namespace rank_extremes {

namespace {

std::string num(double v) { return std::to_string(v); }

}  // namespace

void TailSpec::validate() const {
    if (!(k > 0.0) || !std::isfinite(k)) {
        throw ParameterError("tail index k must be finite and > 0, got " + num(k));
    }
    if (!(c > 0.0) || !std::isfinite(c)) {
        throw ParameterError("scale constant c must be finite and > 0, got " + num(c));
    }
}

double TailSpec::support_min() const { return std::pow(c, 1.0 / k); }

double TailSpec::survival(double x) const {
    if (x <= support_min()) {
        return 1.0;
    }
    return c * std::pow(x, -k);
}

void validate(const DependenceSpec& dep) {
    if (const auto* mm = std::get_if<MovingMaxima>(&dep)) {
        if (mm->coeffs.empty()) {
            throw ParameterError("moving maxima needs at least one coefficient");
        }
        bool any_positive = false;
        for (double a : mm->coeffs) {
            if (!(a >= 0.0) || !std::isfinite(a)) {
                throw ParameterError("moving maxima coefficients must be finite and >= 0");
            }
            any_positive = any_positive || a > 0.0;
        }
        if (!any_positive) {
            throw ParameterError("moving maxima coefficients are all zero");
        }
    }
}

void SequenceSpec::validate() const {
    tail.validate();
    rank_extremes::validate(dep);
}

void InDegreeSpec::validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw ParameterError("in-degree tail index alpha must be > 0, got " + num(alpha));
    }
    if (n_max < 1) {
        throw ParameterError("in-degree truncation n_max must be >= 1, got " +
                             std::to_string(n_max));
    }
}

double pareto_quantile(const TailSpec& spec, double v) {
    return std::pow(spec.c / v, 1.0 / spec.k);
}

double frechet_quantile(double k, double scale_k, double v) {
    return std::pow(scale_k / -std::log1p(-v), 1.0 / k);
}

std::vector<double> sample_pareto(const TailSpec& spec, std::size_t n, RngSeed seed) {
    spec.validate();
    if (n < 1) {
        throw ParameterError("sample size must be >= 1");
    }
    StationaryColumn column({spec, Iid{}}, derive_stream(seed, "column", 0));
    std::vector<double> out(n);
    column.fill(0, out);
    return out;
}

double theoretical_mm_theta(const DependenceSpec& dep, double k) {
    if (!(k > 0.0)) {
        throw ParameterError("tail index k must be > 0, got " + num(k));
    }
    validate(dep);
    const auto* mm = std::get_if<MovingMaxima>(&dep);
    if (mm == nullptr) {
        return 1.0;
    }
    double largest = 0.0;
    double total = 0.0;
    for (double a : mm->coeffs) {
        const double w = std::pow(a, k);
        largest = std::max(largest, w);
        total += w;
    }
    return largest / total;
}

DependenceSpec dependence_for_theta(double theta, double k) {
    if (!(theta > 0.0 && theta <= 1.0)) {
        throw ParameterError("extremal index must lie in (0, 1], got " + num(theta));
    }
    if (!(k > 0.0)) {
        throw ParameterError("tail index k must be > 0, got " + num(k));
    }
    // Guard against 1/theta landing a hair above an integer through rounding.
    const auto m = static_cast<std::size_t>(std::ceil(1.0 / theta - 1e-9));
    if (m <= 1) {
        return Iid{};
    }
    const double trailing_k = (1.0 / theta - 1.0) / static_cast<double>(m - 1);
    MovingMaxima mm;
    mm.coeffs.assign(m, std::pow(trailing_k, 1.0 / k));
    mm.coeffs[0] = 1.0;
    return mm;
}

StationaryColumn::StationaryColumn(const SequenceSpec& spec, std::uint64_t key)
    : spec_(spec), key_(key) {
    spec_.validate();
    if (const auto* mm = std::get_if<MovingMaxima>(&spec_.dep)) {
        coeffs_ = mm->coeffs;
        double total = 0.0;
        for (double a : coeffs_) {
            total += std::pow(a, spec_.tail.k);
        }
        // Marginal P{Y <= x} = exp(-s * sum_j a_j^k * x^-k); match c.
        innovation_scale_k_ = spec_.tail.c / total;
        theta_ = theoretical_mm_theta(spec_.dep, spec_.tail.k);
    }
}

double StationaryColumn::innovation(std::int64_t t) const {
    return frechet_quantile(spec_.tail.k, innovation_scale_k_, counter_uniform(key_, t));
}

double StationaryColumn::value(std::int64_t t) const {
    if (coeffs_.empty()) {
        return pareto_quantile(spec_.tail, counter_uniform(key_, t));
    }
    double y = 0.0;
    for (std::size_t j = 0; j < coeffs_.size(); ++j) {
        if (coeffs_[j] > 0.0) {
            y = std::max(y, coeffs_[j] * innovation(t - static_cast<std::int64_t>(j)));
        }
    }
    return y;
}

void StationaryColumn::fill(std::int64_t t0, std::span<double> out) const {
    if (coeffs_.empty()) {
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = pareto_quantile(spec_.tail,
                                     counter_uniform(key_, t0 + static_cast<std::int64_t>(i)));
        }
        return;
    }
    const std::size_t m = coeffs_.size();
    const std::int64_t first = t0 - static_cast<std::int64_t>(m) + 1;
    std::vector<double> z(out.size() + m - 1);
    for (std::size_t i = 0; i < z.size(); ++i) {
        z[i] = innovation(first + static_cast<std::int64_t>(i));
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        // out[i] sits at z index i + m - 1; lag j reads z[i + m - 1 - j].
        double y = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            if (coeffs_[j] > 0.0) {
                y = std::max(y, coeffs_[j] * z[i + m - 1 - j]);
            }
        }
        out[i] = y;
    }
}

std::vector<double> gen_moving_maxima(const SequenceSpec& seq, std::size_t n, RngSeed seed) {
    if (n < 1) {
        throw ParameterError("path length must be >= 1");
    }
    SequenceSpec spec = seq;
    if (std::holds_alternative<Iid>(spec.dep)) {
        spec.dep = MovingMaxima{{1.0}};
    }
    StationaryColumn column(spec, derive_stream(seed, "column", 0));
    std::vector<double> out(n);
    column.fill(0, out);
    return out;
}

PowerLawInt::PowerLawInt(const InDegreeSpec& spec) : spec_(spec) {
    spec_.validate();
    const auto n_max = static_cast<std::size_t>(spec_.n_max);
    surv_.assign(n_max + 1, 0.0);
    // Accumulate from the smallest terms upwards to limit rounding loss.
    double tail = 0.0;
    double first_moment = 0.0;
    for (std::size_t l = n_max; l >= 1; --l) {
        surv_[l] = tail;
        const double w = std::pow(static_cast<double>(l), -spec_.alpha - 1.0);
        tail += w;
        first_moment += static_cast<double>(l) * w;
    }
    norm_ = tail;
    surv_[0] = tail;
    for (double& s : surv_) {
        s /= norm_;
    }
    surv_[0] = 1.0;
    mean_ = first_moment / norm_;
}

double PowerLawInt::pmf(std::int64_t l) const {
    if (l < 1 || l > spec_.n_max) {
        return 0.0;
    }
    return std::pow(static_cast<double>(l), -spec_.alpha - 1.0) / norm_;
}

double PowerLawInt::survival(std::int64_t l) const {
    if (l < 1) {
        return 1.0;
    }
    if (l >= spec_.n_max) {
        return 0.0;
    }
    return surv_[static_cast<std::size_t>(l)];
}

std::int64_t PowerLawInt::from_survival(double v) const {
    // surv_ is nonincreasing; find the first l >= 1 with surv_[l] < v.
    const auto first = surv_.begin() + 1;
    const auto it = std::partition_point(first, surv_.end(), [v](double s) { return s >= v; });
    if (it == surv_.end()) {
        return spec_.n_max;
    }
    return static_cast<std::int64_t>(it - surv_.begin());
}

std::vector<std::int64_t> sample_power_law_int(const InDegreeSpec& spec, std::size_t n,
                                               RngSeed seed) {
    if (n < 1) {
        throw ParameterError("sample size must be >= 1");
    }
    const PowerLawInt law(spec);
    const std::uint64_t key = derive_stream(seed, "in_degree", 0);
    std::vector<std::int64_t> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = law.from_survival(counter_uniform(key, static_cast<std::int64_t>(i)));
    }
    return out;
}

std::vector<VonMisesPoint> von_mises_check(const InDegreeSpec& spec) {
    spec.validate();
    if (spec.n_max < 10) {
        throw ParameterError("von Mises diagnostic needs n_max >= 10");
    }
    const PowerLawInt law(spec);
    std::vector<VonMisesPoint> out;
    out.reserve(static_cast<std::size_t>(spec.n_max - 1));
    for (std::int64_t n = 1; n < spec.n_max; ++n) {
        VonMisesPoint p;
        p.n = n;
        p.ratio = static_cast<double>(n) * law.pmf(n) / law.survival(n);
        // Share of the untruncated tail beyond n that lies past n_max,
        // integral approximation of the Hurwitz zeta ratio.
        const double removed = std::pow((static_cast<double>(spec.n_max) + 0.5) /
                                            (static_cast<double>(n) + 0.5),
                                        -spec.alpha);
        p.truncation_affected = removed > 0.01;
        out.push_back(p);
    }
    return out;
}

}  // namespace rank_extremes
