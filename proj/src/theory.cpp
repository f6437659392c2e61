#include "rank_extremes/theory.hpp"

#include <algorithm>
#include <cmath>

#include "rank_extremes/errors.hpp"

namespace rank_extremes {

void ComponentSpec::validate() const {
    if (components.empty()) {
        throw ParameterError("component list is empty");
    }
    for (const auto& comp : components) {
        if (!(comp.weight > 0.0) || !std::isfinite(comp.weight)) {
            throw ParameterError("component weights must be finite and > 0");
        }
        comp.tail.validate();
        if (!(comp.theta > 0.0 && comp.theta <= 1.0)) {
            throw ParameterError("component extremal index must lie in (0, 1]");
        }
    }
}

std::string to_string(Regime r) {
    switch (r) {
        case Regime::MinRule: return "MIN_RULE";
        case Regime::EqualTails: return "EQUAL_TAILS";
        case Regime::PreferenceDominates: return "PREFERENCE_DOMINATES";
        case Regime::FollowersDominate: return "FOLLOWERS_DOMINATE";
    }
    return "UNKNOWN";
}

TheoryPrediction predict_min_rule(const ComponentSpec& spec) {
    spec.validate();
    const auto& comps = spec.components;
    const auto best = std::min_element(comps.begin(), comps.end(), [](const auto& a, const auto& b) {
        return a.tail.k < b.tail.k;
    });
    const auto ties = std::count_if(comps.begin(), comps.end(),
                                    [&](const auto& c) { return c.tail.k == best->tail.k; });
    if (ties > 1) {
        throw ParameterError(
            "minimal tail index is attained by several components; use predict_equal_tails "
            "when all tail indices are equal");
    }
    TheoryPrediction p;
    p.k_of_z = best->tail.k;
    p.theta_of_z = best->theta;
    p.c_of_z = best->tail.c * std::pow(best->weight, best->tail.k);
    p.regime = Regime::MinRule;
    return p;
}

TheoryPrediction predict_equal_tails(const ComponentSpec& spec) {
    spec.validate();
    const double k = spec.components.front().tail.k;
    double scale = 0.0;
    double weighted_theta = 0.0;
    for (const auto& comp : spec.components) {
        if (comp.tail.k != k) {
            throw ParameterError("predict_equal_tails needs a common tail index");
        }
        const double w = comp.tail.c * std::pow(comp.weight, k);
        scale += w;
        weighted_theta += w * comp.theta;
    }
    TheoryPrediction p;
    p.k_of_z = k;
    p.theta_of_z = std::min(1.0, weighted_theta / scale);
    p.c_of_z = scale;
    p.regime = Regime::EqualTails;
    return p;
}

TheoryPrediction predict_theorem4(const Theorem4Inputs& in) {
    in.followers.validate();
    if (!(in.alpha > 0.0) || !(in.beta > 0.0)) {
        throw ParameterError("alpha and beta must be > 0");
    }
    if (!(in.z_star > 0.0 && in.z_star < 1.0)) {
        throw ParameterError("preference weight z* must lie in (0, 1)");
    }
    const double k = in.followers.components.front().tail.k;
    double scale = 0.0;
    double weighted_theta = 0.0;
    double last_term = 0.0;
    for (const auto& comp : in.followers.components) {
        if (comp.tail.k != k) {
            throw ParameterError("followers must share one tail index");
        }
        last_term = comp.tail.c * std::pow(comp.weight, k);
        scale += last_term;
        weighted_theta += last_term * comp.theta;
    }

    TheoryPrediction p;
    p.k_of_z = std::min({k, in.alpha, in.beta});
    p.c_of_z = scale;
    p.c_series_unstable = last_term > 1e-9 * scale;
    // Closed inequality: the tie k == beta goes to the preference branch.
    if (k >= in.beta) {
        p.theta_of_z = std::pow(in.z_star, in.beta);
        p.regime = Regime::PreferenceDominates;
    } else {
        p.theta_of_z = std::min(1.0, weighted_theta / scale);
        p.regime = Regime::FollowersDominate;
    }
    return p;
}

}  // namespace rank_extremes
