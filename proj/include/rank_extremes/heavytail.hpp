#pragma once

// Samplers for regularly varying laws, truncated power-law integers, and
// stationary moving-maxima sequences with closed-form extremal index.

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "rank_extremes/rng.hpp"

namespace rank_extremes {

/// Exact Pareto tail P{X > x} = c * x^-k for x >= c^(1/k).
struct TailSpec {
    double k = 1.0;  ///< tail index
    double c = 1.0;  ///< scale constant

    void validate() const;
    /// Lower end of the support, c^(1/k).
    double support_min() const;
    double survival(double x) const;

    friend bool operator==(const TailSpec&, const TailSpec&) = default;
};

struct Iid {
    friend bool operator==(const Iid&, const Iid&) = default;
};

/// Y_t = max_j a_j Z_{t-j} over coefficients a_0..a_{m-1}.
struct MovingMaxima {
    std::vector<double> coeffs;

    friend bool operator==(const MovingMaxima&, const MovingMaxima&) = default;
};

using DependenceSpec = std::variant<Iid, MovingMaxima>;

void validate(const DependenceSpec& dep);

/// Marginal law plus time dependence of one stationary column.
struct SequenceSpec {
    TailSpec tail;
    DependenceSpec dep = Iid{};

    void validate() const;

    friend bool operator==(const SequenceSpec&, const SequenceSpec&) = default;
};

/// Truncated power law on {1..n_max} with P{N = l} proportional to
/// l^(-alpha-1), so the survival function has index alpha.
struct InDegreeSpec {
    double alpha = 1.5;
    std::int64_t n_max = 1000;

    void validate() const;

    friend bool operator==(const InDegreeSpec&, const InDegreeSpec&) = default;
};

/// Inverse transform for the exact Pareto law: the x with P{X > x} = v.
/// v must lie in (0, 1].
double pareto_quantile(const TailSpec& spec, double v);

/// Frechet variate with P{Z > x} = v, where the law is
/// P{Z <= x} = exp(-scale_k * x^-k).
double frechet_quantile(double k, double scale_k, double v);

std::vector<double> sample_pareto(const TailSpec& spec, std::size_t n, RngSeed seed);

/// Extremal index of the moving-maxima generator: 1 for IID, otherwise
/// max_j a_j^k / sum_j a_j^k.
double theoretical_mm_theta(const DependenceSpec& dep, double k);

/// Coefficients realising a requested extremal index theta in (0, 1] for
/// tail index k. Returns Iid for theta == 1; otherwise m = ceil(1/theta)
/// coefficients with a_0 = 1 and equal trailing weights
/// a_j^k = (1/theta - 1) / (m - 1).
DependenceSpec dependence_for_theta(double theta, double k);

/// Random-access stationary column. The value at time t is a pure function
/// of (spec, key, t), so a column can be read lazily at arbitrary times and
/// two aggregates built from the same key see identical columns.
///
/// IID columns are exact Pareto. Moving-maxima columns use Frechet
/// innovations scaled so the marginal is Frechet with P{Y > x} ~ c x^-k.
class StationaryColumn {
public:
    StationaryColumn(const SequenceSpec& spec, std::uint64_t key);

    double value(std::int64_t t) const;
    /// Values at t0 .. t0+out.size()-1, sharing innovations between lags.
    void fill(std::int64_t t0, std::span<double> out) const;

    double theta() const { return theta_; }
    const SequenceSpec& spec() const { return spec_; }

private:
    double innovation(std::int64_t t) const;

    SequenceSpec spec_;
    std::uint64_t key_;
    std::vector<double> coeffs_;  // empty for IID
    double innovation_scale_k_ = 0.0;
    double theta_ = 1.0;
};

/// Stationary moving-maxima path; IID dependence degenerates to m = 1.
std::vector<double> gen_moving_maxima(const SequenceSpec& seq, std::size_t n, RngSeed seed);

/// Truncated power-law law with a precomputed survival table for inverse
/// transform sampling. The normalising constant is a direct summation.
class PowerLawInt {
public:
    explicit PowerLawInt(const InDegreeSpec& spec);

    const InDegreeSpec& spec() const { return spec_; }
    double pmf(std::int64_t l) const;
    /// P{N > l}; 1 for l < 1 and 0 for l >= n_max.
    double survival(std::int64_t l) const;
    double mean() const { return mean_; }

    /// Smallest l with P{N > l} < v. Larger values for smaller v, so a
    /// survival-probability uniform maps monotonically onto the tail.
    std::int64_t from_survival(double v) const;

private:
    InDegreeSpec spec_;
    double norm_ = 0.0;
    double mean_ = 0.0;
    std::vector<double> surv_;  // surv_[l] = P{N > l}, l = 0..n_max
};

std::vector<std::int64_t> sample_power_law_int(const InDegreeSpec& spec, std::size_t n,
                                               RngSeed seed);

struct VonMisesPoint {
    std::int64_t n = 0;
    double ratio = 0.0;  ///< n P{N = n} / P{N > n}
    /// Set when the truncation at n_max removes more than 1% of the
    /// untruncated tail mass beyond n, so the ratio no longer tracks alpha.
    bool truncation_affected = false;
};

/// Ratio sequence for n = 1 .. n_max - 1.
std::vector<VonMisesPoint> von_mises_check(const InDegreeSpec& spec);

}  // namespace rank_extremes
