#pragma once

// Closed-form tail index and extremal index of weighted sums and maxima of
// independent regularly varying stationary sequences.

#include <string>
#include <vector>

#include "rank_extremes/heavytail.hpp"

namespace rank_extremes {

struct Component {
    double weight = 1.0;  ///< z_i
    TailSpec tail;        ///< (k_i, c_i)
    double theta = 1.0;   ///< extremal index of the column
};

/// Nonempty list of weighted components.
struct ComponentSpec {
    std::vector<Component> components;

    void validate() const;
};

enum class Regime { MinRule, EqualTails, PreferenceDominates, FollowersDominate };

std::string to_string(Regime r);

struct TheoryPrediction {
    double k_of_z = 0.0;
    double theta_of_z = 1.0;
    double c_of_z = 0.0;
    Regime regime = Regime::MinRule;
    /// Set when the truncated scale series sum_i c_i z_i^k had not
    /// stabilised (last term above 1e-9 of the partial sum).
    bool c_series_unstable = false;
};

/// Unique minimal tail index wins: k(z) = k_m, theta(z) = theta_m,
/// c(z) = c_m z_m^k_m. Throws ParameterError on a tied minimum.
TheoryPrediction predict_min_rule(const ComponentSpec& spec);

/// Common tail index k: theta(z) is the c_i z_i^k weighted mean of theta_i.
TheoryPrediction predict_equal_tails(const ComponentSpec& spec);

struct Theorem4Inputs {
    ComponentSpec followers;  ///< the first M follower columns, common k
    double alpha = 1.0;       ///< in-degree tail index
    double beta = 1.0;        ///< preference tail index
    double z_star = 0.5;      ///< preference weight 1 - c
};

/// Random-length aggregate. k(z) = min(k, alpha, beta); theta(z) = z*^beta
/// when k >= beta, else the truncated weighted mean over the M followers.
/// alpha does not enter theta(z).
TheoryPrediction predict_theorem4(const Theorem4Inputs& in);

}  // namespace rank_extremes
