#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rank_extremes/errors.hpp"
#include "rank_extremes/heavytail.hpp"

using namespace rank_extremes;

namespace {

// Empirical P{X > x} must sit within `sigmas` binomial standard errors of p.
void check_survival(const std::vector<double>& x, double at, double p, double sigmas) {
    const auto hits = std::count_if(x.begin(), x.end(), [&](double v) { return v > at; });
    const double n = static_cast<double>(x.size());
    const double se = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(static_cast<double>(hits) / n - p) < sigmas * se);
}

}  // namespace

TEST_CASE("pareto inverse transform") {
    CHECK(pareto_quantile({1.0, 1.0}, 0.5) == doctest::Approx(2.0));
    CHECK(pareto_quantile({2.0, 1.0}, 0.25) == doctest::Approx(2.0));
    // v = 1 maps to the support minimum
    CHECK(pareto_quantile({2.0, 4.0}, 1.0) == doctest::Approx(2.0));
}

TEST_CASE("pareto sampler matches its survival function") {
    const TailSpec spec{1.5, 1.0};
    const auto x = sample_pareto(spec, 1'000'000, 11);
    check_survival(x, 10.0, std::pow(10.0, -1.5), 3.0);
}

TEST_CASE("pareto survival at multiples of the support minimum") {
    for (const TailSpec spec : {TailSpec{1.0, 1.0}, TailSpec{2.5, 3.0}, TailSpec{0.7, 0.2}}) {
        const auto x = sample_pareto(spec, 1'000'000, 12);
        for (const double m : {2.0, 5.0, 10.0}) {
            const double at = m * spec.support_min();
            check_survival(x, at, spec.c * std::pow(at, -spec.k), 4.0);
        }
        CHECK(*std::min_element(x.begin(), x.end()) >= spec.support_min());
    }
}

TEST_CASE("invalid tail specs are rejected") {
    CHECK_THROWS_AS(sample_pareto({0.0, 1.0}, 10, 1), ParameterError);
    CHECK_THROWS_AS(sample_pareto({1.0, -1.0}, 10, 1), ParameterError);
    CHECK_THROWS_AS(gen_moving_maxima({{1.0, 1.0}, MovingMaxima{{0.0, 0.0}}}, 10, 1),
                    ParameterError);
    CHECK_THROWS_AS(sample_power_law_int({1.0, 0}, 10, 1), ParameterError);
}

TEST_CASE("samplers are deterministic per seed") {
    CHECK(sample_pareto({1.2, 1.0}, 1000, 5) == sample_pareto({1.2, 1.0}, 1000, 5));
    CHECK(sample_pareto({1.2, 1.0}, 1000, 5) != sample_pareto({1.2, 1.0}, 1000, 6));
    const SequenceSpec seq{{2.0, 1.0}, MovingMaxima{{2, 1, 1}}};
    CHECK(gen_moving_maxima(seq, 1000, 5) == gen_moving_maxima(seq, 1000, 5));
    CHECK(sample_power_law_int({1.5, 100}, 1000, 5) == sample_power_law_int({1.5, 100}, 1000, 5));
}

TEST_CASE("closed form moving-maxima theta") {
    CHECK(theoretical_mm_theta(Iid{}, 3.0) == 1.0);
    CHECK(theoretical_mm_theta(MovingMaxima{{1}}, 2.0) == 1.0);
    CHECK(theoretical_mm_theta(MovingMaxima{{1, 1}}, 1.0) == doctest::Approx(0.5));
    CHECK(theoretical_mm_theta(MovingMaxima{{2, 1, 1}}, 2.0) == doctest::Approx(2.0 / 3.0));
    CHECK(theoretical_mm_theta(MovingMaxima{{1, 1, 1, 1}}, 1.0) == doctest::Approx(0.25));
    CHECK(theoretical_mm_theta(MovingMaxima{{3, 1}}, 1.0) == doctest::Approx(0.75));
}

TEST_CASE("theta is scale invariant in the coefficients") {
    const std::vector<double> a{0.3, 1.7, 0.9, 2.2};
    for (const double k : {0.5, 1.0, 2.5}) {
        const double base = theoretical_mm_theta(MovingMaxima{a}, k);
        for (const double t : {1e-3, 0.5, 7.0, 1e4}) {
            std::vector<double> b = a;
            for (auto& v : b) {
                v *= t;
            }
            CHECK(theoretical_mm_theta(MovingMaxima{b}, k) == doctest::Approx(base).epsilon(1e-12));
        }
    }
}

TEST_CASE("theta equals one only with a single nonzero coefficient") {
    CHECK(theoretical_mm_theta(MovingMaxima{{0, 5, 0}}, 1.3) == 1.0);
    CHECK(theoretical_mm_theta(MovingMaxima{{1e-6, 5}}, 1.3) < 1.0);
    CHECK(theoretical_mm_theta(MovingMaxima{{1, 1, 1}}, 0.4) <= 1.0);
}

TEST_CASE("dependence_for_theta round trip") {
    CHECK(std::holds_alternative<Iid>(dependence_for_theta(1.0, 2.0)));
    for (const double k : {0.8, 1.2, 3.0}) {
        for (const double th : {0.9, 0.75, 0.5, 1.0 / 3.0, 0.25, 0.1}) {
            CHECK(theoretical_mm_theta(dependence_for_theta(th, k), k) ==
                  doctest::Approx(th).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(dependence_for_theta(0.0, 1.0), ParameterError);
    CHECK_THROWS_AS(dependence_for_theta(1.5, 1.0), ParameterError);
}

TEST_CASE("single coefficient moving maxima is i.i.d. with the requested tail") {
    const SequenceSpec seq{{1.0, 1.0}, MovingMaxima{{1}}};
    StationaryColumn col(seq, 99);
    CHECK(col.theta() == 1.0);
    const auto x = gen_moving_maxima(seq, 1'000'000, 13);
    // Frechet marginal: P{Y > x} = 1 - exp(-1/x) ~ 1/x
    for (const double at : {100.0, 1000.0}) {
        check_survival(x, at, -std::expm1(-1.0 / at), 4.0);
    }
}

TEST_CASE("moving-maxima marginal tail matches the configured Frechet law") {
    const SequenceSpec seq{{2.0, 3.0}, MovingMaxima{{2, 1, 1}}};
    const auto x = gen_moving_maxima(seq, 1'000'000, 14);
    // exact marginal is Frechet with scale_k = c
    for (const double at : {10.0, 30.0}) {
        check_survival(x, at, -std::expm1(-seq.tail.c * std::pow(at, -seq.tail.k)), 4.0);
    }
}

TEST_CASE("column random access agrees with sequential fill") {
    const SequenceSpec seq{{1.5, 1.0}, MovingMaxima{{1, 0.5, 2}}};
    StationaryColumn col(seq, 1234);
    std::vector<double> block(50);
    col.fill(100, block);
    for (std::size_t i = 0; i < block.size(); ++i) {
        CHECK(block[i] == col.value(100 + static_cast<std::int64_t>(i)));
    }
}

TEST_CASE("moving-maxima lag structure") {
    // a = (1, 1): an innovation appears at two consecutive times
    const SequenceSpec seq{{1.0, 1.0}, MovingMaxima{{1, 1}}};
    const auto x = gen_moving_maxima(seq, 10'000, 15);
    std::size_t repeats = 0;
    for (std::size_t t = 1; t < x.size(); ++t) {
        repeats += x[t] == x[t - 1];
    }
    // x[t] == x[t-1] iff Z_{t-1} is the largest of Z_{t-2..t}: probability 1/3
    const double se = std::sqrt(x.size() * (1.0 / 3.0) * (2.0 / 3.0));
    CHECK(std::abs(static_cast<double>(repeats) - x.size() / 3.0) < 4 * se);
}

TEST_CASE("truncated power law: degenerate support") {
    const auto n = sample_power_law_int({2.7, 1}, 500, 3);
    CHECK(std::all_of(n.begin(), n.end(), [](std::int64_t v) { return v == 1; }));
}

TEST_CASE("truncated power law: pmf by hand") {
    PowerLawInt law({2.0, 3});
    const double z = 1.0 + 0.125 + 1.0 / 27.0;
    CHECK(z == doctest::Approx(1.162037).epsilon(1e-6));
    CHECK(law.pmf(1) == doctest::Approx(1.0 / z));
    CHECK(law.pmf(1) == doctest::Approx(0.8606).epsilon(1e-4));
    CHECK(law.pmf(2) == doctest::Approx(0.125 / z));
    CHECK(law.pmf(3) == doctest::Approx(1.0 / 27.0 / z));
    CHECK(law.pmf(0) == 0.0);
    CHECK(law.pmf(4) == 0.0);
    CHECK(law.survival(0) == 1.0);
    CHECK(law.survival(3) == 0.0);
    CHECK(law.mean() == doctest::Approx((1 + 2 * 0.125 + 3 / 27.0) / z));
}

TEST_CASE("truncated power law: survival ratio against direct summation") {
    const InDegreeSpec spec{1.5, 10'000};
    // oracle: sum the pmf weights directly
    double w10 = 0, w100 = 0;
    for (std::int64_t l = 11; l <= spec.n_max; ++l) {
        const double w = std::pow(static_cast<double>(l), -spec.alpha - 1);
        w10 += w;
        if (l > 100) {
            w100 += w;
        }
    }
    const double ratio = w100 / w10;
    // untruncated ratio is close to (100/10)^-1.5
    CHECK(ratio == doctest::Approx(std::pow(10.0, -1.5)).epsilon(0.15));

    const auto n = sample_power_law_int(spec, 1'000'000, 21);
    const double c10 = static_cast<double>(std::count_if(n.begin(), n.end(), [](auto v) { return v > 10; }));
    const double c100 = static_cast<double>(std::count_if(n.begin(), n.end(), [](auto v) { return v > 100; }));
    const double est = c100 / c10;
    const double se = std::sqrt(ratio * (1 - ratio) / c10);
    CHECK(std::abs(est - ratio) < 3 * se);
}

TEST_CASE("truncated power law: sampled frequencies") {
    const InDegreeSpec spec{2.0, 3};
    PowerLawInt law(spec);
    const auto n = sample_power_law_int(spec, 200'000, 22);
    for (std::int64_t l = 1; l <= 3; ++l) {
        const double f = static_cast<double>(std::count(n.begin(), n.end(), l)) / 200'000.0;
        const double p = law.pmf(l);
        CHECK(std::abs(f - p) < 4 * std::sqrt(p * (1 - p) / 200'000.0));
    }
}

TEST_CASE("von Mises ratio approaches alpha inside the support") {
    const auto pts = von_mises_check({2.0, 100'000});
    REQUIRE(pts.size() == 99'999);
    const auto& p = pts[999];
    CHECK(p.n == 1000);
    CHECK(std::abs(p.ratio - 2.0) < 0.01 * 2.0);
    CHECK_FALSE(p.truncation_affected);
}

TEST_CASE("von Mises ratio against direct summation") {
    for (const double alpha : {2.0, 0.5}) {
        const InDegreeSpec spec{alpha, 100'000};
        const auto pts = von_mises_check(spec);
        for (const std::int64_t n : {10, 1000, 50'000}) {
            double tail = 0.0;
            for (std::int64_t l = spec.n_max; l > n; --l) {
                tail += std::pow(static_cast<double>(l), -alpha - 1);
            }
            const double oracle = n * std::pow(static_cast<double>(n), -alpha - 1) / tail;
            CHECK(pts[n - 1].ratio == doctest::Approx(oracle).epsilon(1e-9));
        }
    }
    // alpha = 0.5 keeps about 10% of its tail mass beyond 1e5 at n = 1e3
    const auto slow = von_mises_check({0.5, 100'000});
    CHECK(slow[999].truncation_affected);
    CHECK(std::abs(slow[999].ratio - 0.5) < 0.15 * 0.5);
}

TEST_CASE("von Mises ratio is flagged near the truncation") {
    const auto pts = von_mises_check({1.5, 1000});
    const auto& last = pts.back();
    CHECK(last.n == 999);
    CHECK(last.truncation_affected);
    CHECK(last.ratio > 10 * 1.5);
    CHECK_THROWS_AS(von_mises_check({1.5, 5}), ParameterError);
}
