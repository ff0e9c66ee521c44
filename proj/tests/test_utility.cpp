#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "rumax/error.hpp"
#include "rumax/utility.hpp"

namespace rumax {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Utility tabulated(std::vector<Knot> knots, double right_slope = 0.0, LeftTail tail = {2.0, 1.0},
                  std::vector<double> scales = {}) {
    return Utility(TabulatedUtility{std::move(knots), right_slope, tail}, std::move(scales));
}

Utility smooth_table() {
    // -exp(-x) sampled at -2..2 step 0.5, tail continuing the left slope.
    std::vector<Knot> knots;
    for (int i = -4; i <= 4; ++i) {
        const double x = 0.5 * i;
        knots.push_back({x, -std::exp(-x)});
    }
    return tabulated(knots, 0.0, {std::exp(2.0), 0.5 * std::exp(2.0)});
}

TEST(Utility, ExponentialValues) {
    EXPECT_DOUBLE_EQ(Utility::exponential(1.0).value(0, 0.0), -1.0);
    EXPECT_NEAR(Utility::exponential(2.0).value(0, 50.0), 0.0, 1e-12);
    EXPECT_EQ(Utility::exponential(2.0).supremum(0), 0.0);
}

TEST(Utility, TabulatedInterpolates) {
    const auto u = tabulated({{-1.0, -3.0}, {0.0, -1.0}, {1.0, 0.0}});
    EXPECT_DOUBLE_EQ(u.value(0, 0.5), -0.5);
    EXPECT_DOUBLE_EQ(u.value(0, 0.0), -1.0);
    EXPECT_DOUBLE_EQ(u.value(0, 3.0), 0.0);
    // Tail: u0 - slope * gap - curvature * gap^2 at gap = 2.
    EXPECT_DOUBLE_EQ(u.value(0, -3.0), -3.0 - 2.0 * 2.0 - 1.0 * 4.0);
}

TEST(Utility, LeafScales) {
    const Utility u(ExponentialUtility{1.0}, {1.0, 2.0});
    EXPECT_DOUBLE_EQ(u.value(1, 0.5), -std::exp(-1.0));
    EXPECT_FALSE(u.uniform_lambda().has_value());
    EXPECT_EQ(Utility::exponential(3.0).uniform_lambda(), 3.0);
}

TEST(Utility, RejectsBadSpecs) {
    EXPECT_THROW(Utility::exponential(-1.0), Error);
    EXPECT_THROW(Utility::exponential(0.0), Error);
    EXPECT_THROW(tabulated({{0.0, 0.0}, {0.0, 1.0}}), Error);
}

TEST(Conjugate, ExponentialClosedForm) {
    const Conjugate one(Utility::exponential(1.0));
    EXPECT_NEAR(one.value(0, 1.0), -1.0, 1e-15);
    EXPECT_EQ(one.value(0, 0.0), 0.0);
    EXPECT_NEAR(Conjugate(Utility::exponential(2.0)).value(0, 2.0), -1.0, 1e-15);
    try {
        (void)one.value(0, -0.5);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kNegativeSlope);
    }
}

TEST(Conjugate, ExponentialMatchesGrid) {
    for (double lambda : {0.5, 1.0, 2.0}) {
        const Utility u = Utility::exponential(lambda);
        const Conjugate v(u);
        for (double y : {0.05, 0.3, 1.0, 2.0, 7.5}) {
            const double ref = oracle::grid_conjugate([&](double x) { return u.value(0, x); }, y, -20.0, 20.0);
            EXPECT_NEAR(v.value(0, y), ref, 1e-9) << lambda << " " << y;
        }
    }
    // Spec grid example: lambda = 2, y = 2 on [-20, 20] step 1e-4.
    const Utility u2 = Utility::exponential(2.0);
    double best = -kInf;
    for (int i = 0; i <= 400000; ++i) {
        const double x = -20.0 + 1e-4 * i;
        best = std::max(best, u2.value(0, x) - 2.0 * x);
    }
    EXPECT_NEAR(best, -1.0, 1e-8);
}

TEST(Conjugate, TabulatedMatchesGrid) {
    const Utility u = smooth_table();
    const Conjugate v(u);
    for (double y : {0.0, 0.01, 0.2, 0.9, 1.0, 2.5, 7.0, 7.389, 12.0, 40.0}) {
        const double ref = oracle::grid_conjugate([&](double x) { return u.value(0, x); }, y, -40.0, 10.0, 200001);
        EXPECT_NEAR(v.value(0, y), ref, 1e-8) << "y " << y;
    }
}

TEST(Conjugate, ScaledLeafMatchesGrid) {
    const Utility u(smooth_table().base(), {1.0, 0.5, 3.0});
    const Conjugate v(u);
    for (std::size_t leaf = 0; leaf < 3; ++leaf) {
        for (double y : {0.1, 1.0, 4.0}) {
            const double ref =
                oracle::grid_conjugate([&](double x) { return u.value(leaf, x); }, y, -80.0, 30.0, 400001);
            EXPECT_NEAR(v.value(leaf, y), ref, 1e-7) << leaf << " " << y;
        }
    }
}

TEST(Conjugate, DivergesBelowRightSlope) {
    const Conjugate v(tabulated({{0.0, 0.0}, {1.0, 1.0}}, 0.5));
    EXPECT_EQ(v.value(0, 0.25), kInf);
    EXPECT_TRUE(std::isfinite(v.value(0, 0.75)));
}

TEST(Conjugate, FenchelYoung) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ux(-5.0, 5.0), uy(0.0, 10.0);
    const Conjugate e(Utility::exponential(1.3));
    const Conjugate t(smooth_table());
    for (int i = 0; i < 2000; ++i) {
        const double x = ux(rng), y = uy(rng);
        EXPECT_GE(e.value(0, y) + 1e-12, e.utility().value(0, x) - x * y);
        EXPECT_GE(t.value(0, y) + 1e-12, t.utility().value(0, x) - x * y);
    }
}

TEST(Conjugate, MaximizerAttains) {
    const Conjugate t(smooth_table());
    const Conjugate e(Utility::exponential(0.7));
    for (double y : {0.1, 0.5, 1.0, 3.0, 20.0}) {
        for (const Conjugate* c : {&t, &e}) {
            const double x = c->maximizer(0, y);
            ASSERT_TRUE(std::isfinite(x));
            EXPECT_NEAR(c->utility().value(0, x) - x * y, c->value(0, y), 1e-10);
        }
    }
    EXPECT_EQ(e.maximizer(0, 0.0), kInf);
}

TEST(Conjugate, Perspective) {
    const Conjugate v(Utility::exponential(1.0));
    EXPECT_EQ(v.perspective(0, 0.0, 0.0), 0.0);
    EXPECT_EQ(v.perspective(0, 0.5, 0.0), kInf);
    EXPECT_NEAR(v.perspective(0, 0.6, 0.3), 0.3 * v.value(0, 2.0), 1e-15);
    // d/dp by central differences.
    const double h = 1e-6;
    const double fd = (v.perspective(0, 0.6, 0.3 + h) - v.perspective(0, 0.6, 0.3 - h)) / (2 * h);
    EXPECT_NEAR(v.perspective_slope(0, 0.6, 0.3), fd, 1e-6);
}

TEST(Divergence, Examples) {
    const auto lat = fixture::binomial();
    const Conjugate v(Utility::exponential(1.0));
    const auto P = Measure::uniform(lat);
    EXPECT_NEAR(divergence_dv(v, 1.0, P, P), -1.0, 1e-15);
    EXPECT_EQ(divergence_dv(v, 0.0, Measure::dirac(lat, 0), P), 0.0);
    EXPECT_EQ(divergence_dv(v, 1.0, Measure::dirac(lat, 0), Measure::dirac(lat, 1)), kInf);
}

TEST(Divergence, MatchesDirectSum) {
    std::mt19937_64 rng(9);
    const Conjugate v(Utility::exponential(1.5));
    for (int rep = 0; rep < 20; ++rep) {
        const auto lat = fixture::random_lattice(rng, 2, 3);
        const auto Q = fixture::random_measure(rng, lat);
        const auto P = fixture::random_measure(rng, lat);
        double ref = 0.0;
        for (std::size_t l = 0; l < lat.num_leaves(); ++l) {
            const double y = 0.8 * Q[l] / P[l];
            ref += P[l] * (y / 1.5) * (std::log(y / 1.5) - 1.0);
        }
        EXPECT_NEAR(divergence_dv(v, 0.8, Q, P), ref, 1e-12);
    }
}

TEST(Conditions, ExponentialPasses) {
    EXPECT_TRUE(check_conditions(Utility::exponential(1.0), 2).all_passed());
}

TEST(Conditions, ConvexTableFailsConcavity) {
    const auto u = tabulated({{-1.0, -1.0}, {0.0, 0.0}, {1.0, 2.0}}, 2.0);
    const auto report = check_conditions(u, 1);
    EXPECT_FALSE(report.find("U1").passed);
    EXPECT_FALSE(report.find("U1").witness.empty());
}

TEST(Conditions, LinearLeftTailFailsDecay) {
    const auto u = tabulated({{-1.0, -3.0}, {0.0, -1.0}, {1.0, 0.0}}, 0.0, {2.0, 0.0});
    // u(x)/|x| at x = -10^k tends to -2, not -infinity.
    for (int k = 1; k <= 6; ++k) {
        const double x = -std::pow(10.0, k);
        EXPECT_NEAR(u.value(0, x) / std::abs(x), -2.0, 5.0 / std::abs(x));
    }
    const auto report = check_conditions(u, 1);
    EXPECT_FALSE(report.find("U3").passed);
    EXPECT_TRUE(report.find("U1").passed);
}

TEST(Conditions, SmoothTablePasses) {
    EXPECT_TRUE(check_conditions(smooth_table(), 1).all_passed());
}

}  // namespace
}  // namespace rumax
