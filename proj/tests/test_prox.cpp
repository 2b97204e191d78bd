#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "recon/recon.hpp"

using namespace recon;

namespace {

double scan_minimizer(const ProxSpec& spec, double u, double step, double lo, double hi, double resolution) {
    double best = lo;
    double best_q = INFINITY;
    const auto n = static_cast<long>((hi - lo) / resolution);
    for (long i = 0; i <= n; ++i) {
        const double f = lo + static_cast<double>(i) * resolution;
        const double q = 0.5 * (u - f) * (u - f) + step * spec.potential(f);
        if (q < best_q) {
            best_q = q;
            best = f;
        }
    }
    return best;
}

} // namespace

TEST(Prox, SoftThresholdExamples) {
    const ProxSpec abs{Penalty::abs, 1.0};
    const ProxResult r = prox_apply(abs, Vec{2.0, 0.5, -3.0, 0.0, -1.0}, 1.0);
    EXPECT_EQ(r.values, (Vec{1.0, 0.0, -2.0, 0.0, 0.0}));
    EXPECT_EQ(r.fallbacks, 0u);
    // lambda and step enter only through their product
    const ProxSpec half{Penalty::abs, 0.5};
    EXPECT_EQ(prox_apply(half, Vec{2.0}, 2.0).values, Vec{1.0});
}

TEST(Prox, QuadraticClosedForm) {
    const ProxSpec q{Penalty::quadratic, 1.0, 1.0};
    EXPECT_DOUBLE_EQ(prox_apply(q, Vec{2.0}, 1.0).values[0], 1.0);
    const ProxSpec q2{Penalty::quadratic, 1.0, 0.25};
    EXPECT_DOUBLE_EQ(prox_apply(q2, Vec{3.0}, 0.5).values[0], 1.0);
}

TEST(Prox, IndicatorProjects) {
    const ProxSpec ind{Penalty::indicator_nonneg};
    EXPECT_EQ(prox_apply(ind, Vec{-1.0, 0.0, 2.5}, 3.0).values, (Vec{0.0, 0.0, 2.5}));
    EXPECT_TRUE(std::isinf(ind.potential(-1e-9)));
    EXPECT_EQ(ind.potential(0.0), 0.0);
}

TEST(Prox, StudentMatchesBruteForceScan) {
    const ProxSpec st{Penalty::student, 1.0, 1.0, 1.0};
    const double got = prox_apply(st, Vec{3.0}, 1.0).values[0];
    const double scan = scan_minimizer(st, 3.0, 1.0, -1.0, 4.0, 1e-6);
    EXPECT_NEAR(got, scan, 1e-6);
}

TEST(Prox, StudentScanGridOfInputs) {
    for (double r : {0.0, 1.0, 3.0})
        for (double step : {0.3, 1.0, 2.0})
            for (double u : {-6.0, -2.5, -0.4, 0.7, 1.9, 2.6, 4.0, 9.0}) {
                const ProxSpec st{Penalty::student, 1.0, 1.0, r};
                const double got = prox_apply(st, Vec{u}, step).values[0];
                const double lo = std::min(0.0, u) - 0.5, hi = std::max(0.0, u) + 0.5;
                const double scan = scan_minimizer(st, u, step, lo, hi, 1e-5);
                auto q = [&](double f) { return 0.5 * (u - f) * (u - f) + step * st.potential(f); };
                // compare objective values: near-ties between two local minima may pick either
                EXPECT_LE(q(got), q(scan) + 1e-9) << "r=" << r << " step=" << step << " u=" << u;
                EXPECT_TRUE(std::isfinite(got));
            }
}

TEST(Prox, StudentIsOddAndShrinks) {
    const ProxSpec st{Penalty::student, 1.0, 1.0, 2.0};
    for (double u : {0.1, 1.0, 5.0, 50.0}) {
        const double p = prox_apply(st, Vec{u}, 0.7).values[0];
        const double m = prox_apply(st, Vec{-u}, 0.7).values[0];
        EXPECT_DOUBLE_EQ(p, -m);
        EXPECT_GE(p, 0.0);
        EXPECT_LE(p, u);
    }
    EXPECT_EQ(prox_apply(st, Vec{0.0}, 1.0).values[0], 0.0);
}

TEST(Prox, FallbackScanAgreesWithRootFinder) {
    const double u = 3.0, hw = 1.5;
    double root = 0.0;
    ASSERT_TRUE(detail::student_prox_positive(u, 2.0 * hw, hw, root));
    EXPECT_NEAR(detail::student_prox_scan(u, hw), root, 1e-6);
}

TEST(Prox, RejectsBadInput) {
    const ProxSpec abs{Penalty::abs, 1.0};
    EXPECT_THROW(prox_apply(abs, Vec{1.0}, 0.0), ValidationError);
    EXPECT_THROW(prox_apply(abs, Vec{1.0}, -1.0), ValidationError);
    EXPECT_THROW(prox_apply(abs, Vec{std::numeric_limits<double>::quiet_NaN()}, 1.0), ValidationError);
    EXPECT_THROW(prox_apply(ProxSpec{Penalty::abs, -1.0}, Vec{1.0}, 1.0), ValidationError);
    EXPECT_THROW(prox_apply(ProxSpec{Penalty::quadratic, 1.0, 0.0}, Vec{1.0}, 1.0), ValidationError);
    EXPECT_THROW(prox_apply(ProxSpec{Penalty::student, 1.0, 1.0, -0.5}, Vec{1.0}, 1.0), ValidationError);
}

TEST(Prox, IsMinimizerOfScalarProblem) {
    SplitMix64 rng(Seed{31});
    for (Penalty kind : {Penalty::quadratic, Penalty::abs, Penalty::student}) {
        const ProxSpec spec{kind, 0.8, 1.3, 1.5};
        for (int t = 0; t < 50; ++t) {
            const double u = 4.0 * rng.normal();
            const double step = 0.1 + rng.uniform();
            const double f = prox_apply(spec, Vec{u}, step).values[0];
            auto q = [&](double x) { return 0.5 * (u - x) * (u - x) + step * spec.potential(x); };
            for (double d : {1e-3, -1e-3, 1e-1, -1e-1}) EXPECT_LE(q(f), q(f + d) + 1e-12);
        }
    }
}
