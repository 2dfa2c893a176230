#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "divfront/generators.hpp"
#include "test_util.hpp"

using namespace divfront;
using divfront::testing::all_families;
using divfront::testing::finite_constant_families;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST(GeneratorValue, FrontierIntegralAtOneAndZero) {
    const auto fi = GeneratorFamily::frontier_integral();
    EXPECT_EQ(generator_value(fi, 1.0), 0.0);
    EXPECT_EQ(generator_value(fi, 0.0), 0.5);
}

TEST(GeneratorValue, InterpolatedKlAtTwo) {
    // t ln(t / (lt + 1 - l)) - (1 - l)(t - 1) at l = 1/2, t = 2.
    const double expected = 2.0 * std::log(4.0 / 3.0) - 0.5;
    EXPECT_NEAR(generator_value(GeneratorFamily::interpolated_kl(0.5), 2.0), expected, 1e-15);
    EXPECT_NEAR(expected, 0.0753641449, 1e-10);
}

TEST(GeneratorValue, ClosedFormsAtSamplePoints) {
    EXPECT_NEAR(generator_value(GeneratorFamily::kl(), 2.0), 2.0 * std::log(2.0) - 1.0, 1e-15);
    EXPECT_NEAR(generator_value(GeneratorFamily::interpolated_chi2(0.25), 3.0), 4.0 / 1.5, 1e-15);
    EXPECT_NEAR(generator_value(GeneratorFamily::le_cam(), 3.0), 4.0 / 8.0, 1e-15);
    EXPECT_NEAR(generator_value(GeneratorFamily::hellinger(), 4.0), 1.0, 1e-15);
    // FI at t = 3: 2 - 3 ln 3 / 2
    EXPECT_NEAR(generator_value(GeneratorFamily::frontier_integral(), 3.0), 2.0 - 1.5 * std::log(3.0), 1e-15);
    // JS at t = 3: 1.5 ln(1.5) - 0.5 ln 2
    EXPECT_NEAR(generator_value(GeneratorFamily::js(), 3.0), 1.5 * std::log(1.5) - 0.5 * std::log(2.0), 1e-15);
}

TEST(GeneratorValue, FrontierSeriesMatchesClosedFormAtSwitchover) {
    const auto fi = GeneratorFamily::frontier_integral();
    for (double d : {-0.05, -0.0500001, 0.05, 0.0499999, 0.05000001}) {
        const long double t = 1.0L + d;
        const long double closed = (t + 1) / 2 - t * std::log(t) / (t - 1);
        EXPECT_NEAR(generator_value(fi, 1.0 + d), static_cast<double>(closed), 1e-15) << d;
    }
}

TEST(GeneratorValue, FrontierNearOneIsSecondOrder) {
    const auto fi = GeneratorFamily::frontier_integral();
    for (double d : {1e-3, 1e-6, -1e-6, 1e-9}) {
        EXPECT_NEAR(generator_value(fi, 1.0 + d) / (d * d), 1.0 / 6.0, 1e-3) << d;
    }
}

TEST(GeneratorValue, RejectsBadArguments) {
    const auto fi = GeneratorFamily::frontier_integral();
    EXPECT_THROW(generator_value(fi, -1e-3), DomainError);
    EXPECT_THROW(generator_value(fi, std::nan("")), DomainError);
    EXPECT_THROW(generator_value(fi, kInf), DomainError);
    EXPECT_THROW(conjugate_value(fi, -1.0), DomainError);
}

TEST(GeneratorValue, VanishesAtOneAndIsNonnegative) {
    const auto grid = log_grid(1e-6, 1e3, 200);
    for (const auto& f : all_families()) {
        EXPECT_NEAR(generator_value(f, 1.0), 0.0, 1e-15) << f.name();
        EXPECT_NEAR(conjugate_value(f, 1.0), 0.0, 1e-15) << f.name();
        EXPECT_GE(generator_value(f, 0.0), 0.0) << f.name();
        for (double t : grid) {
            EXPECT_GE(generator_value(f, t), -1e-15) << f.name() << " t=" << t;
            EXPECT_GE(conjugate_value(f, t), -1e-15) << f.name() << " t=" << t;
        }
    }
}

TEST(ConjugateValue, FrontierIntegralIsSelfConjugate) {
    const auto fi = GeneratorFamily::frontier_integral();
    for (double t : log_grid(1e-6, 1e3, 97)) EXPECT_EQ(conjugate_value(fi, t), generator_value(fi, t));
}

TEST(ConjugateValue, MatchesTTimesFOfReciprocal) {
    for (const auto& f : all_families()) {
        for (double t : log_grid(1e-3, 1e3, 61)) {
            const double via_f = t * generator_value(f, 1.0 / t);
            EXPECT_NEAR(conjugate_value(f, t), via_f, 1e-12 * std::max(1.0, std::abs(via_f))) << f.name() << " t=" << t;
        }
    }
}

TEST(ConjugateValue, LimitsAtZero) {
    EXPECT_NEAR(conjugate_value(GeneratorFamily::skew_js(0.3), 0.0), 0.3 * std::log(1.0 / 0.3), 1e-15);
    EXPECT_NEAR(conjugate_value(GeneratorFamily::skew_js(0.3), 0.0), 0.361192, 1e-6);
    EXPECT_EQ(conjugate_value(GeneratorFamily::kl(), 0.0), kInf);
    EXPECT_NEAR(conjugate_value(GeneratorFamily::interpolated_kl(0.2), 0.0), std::log(5.0) - 0.8, 1e-15);
    EXPECT_NEAR(conjugate_value(GeneratorFamily::interpolated_chi2(0.2), 0.0), 5.0, 1e-15);
    // f*(0+) as a limit of t f(1/t)
    for (const auto& f : finite_constant_families()) {
        const double t = 1e-9;
        EXPECT_NEAR(conjugate_value(f, 0.0), t * generator_value(f, 1.0 / t), 1e-6) << f.name();
    }
}

TEST(Psi, ZeroConventions) {
    const auto fi = GeneratorFamily::frontier_integral();
    EXPECT_DOUBLE_EQ(psi(fi, 0.3, 0.0), 0.15);
    for (const auto& f : all_families()) EXPECT_EQ(psi(f, 0.0, 0.0), 0.0) << f.name();
    EXPECT_NEAR(psi(fi, 0.5, 0.25), 0.375 - 0.5 * std::log(2.0), 1e-15);
    EXPECT_NEAR(psi(fi, 0.5, 0.25), 0.028426, 1e-6);
    EXPECT_EQ(psi(GeneratorFamily::kl(), 0.2, 0.0), kInf);
    EXPECT_DOUBLE_EQ(psi(GeneratorFamily::kl(), 0.0, 0.4), 0.4);
    EXPECT_THROW(psi(fi, -0.1, 0.2), DomainError);
}

TEST(Constants, TableRows) {
    const auto fi = constants(GeneratorFamily::frontier_integral());
    EXPECT_EQ(fi.c0, 0.5);
    EXPECT_EQ(fi.c0_star, 0.5);
    EXPECT_EQ(fi.c1, 1.0);
    EXPECT_EQ(fi.c1_star, 1.0);
    EXPECT_EQ(fi.c2, 0.5);
    EXPECT_EQ(fi.c2_star, 0.5);

    const auto js = constants(GeneratorFamily::js());
    EXPECT_DOUBLE_EQ(js.c0, 0.5 * std::log(2.0));
    EXPECT_DOUBLE_EQ(js.c0_star, 0.5 * std::log(2.0));
    EXPECT_DOUBLE_EQ(js.c1, 0.5);
    EXPECT_DOUBLE_EQ(js.c1_star, 0.5);
    EXPECT_DOUBLE_EQ(js.c2, 0.25);
    EXPECT_DOUBLE_EQ(js.c2_star, 0.25);

    const double l = 0.3;
    const double lb = 0.7;
    const auto chi = constants(GeneratorFamily::interpolated_chi2(l));
    EXPECT_DOUBLE_EQ(chi.c0, 1.0 / lb);
    EXPECT_DOUBLE_EQ(chi.c0_star, 1.0 / l);
    EXPECT_DOUBLE_EQ(chi.c1, 2.0 / (lb * lb));
    EXPECT_DOUBLE_EQ(chi.c1_star, 2.0 / (l * l));
    EXPECT_DOUBLE_EQ(chi.c2, 4.0 / (27.0 * l * lb * lb));
    EXPECT_DOUBLE_EQ(chi.c2_star, 4.0 / (27.0 * l * l * lb));

    const auto kl = constants(GeneratorFamily::kl());
    EXPECT_EQ(kl.c0_star, kInf);
    EXPECT_FALSE(kl.all_finite());
    const auto h = constants(GeneratorFamily::hellinger());
    EXPECT_EQ(h.c1, kInf);
    EXPECT_EQ(h.c1_star, kInf);
    EXPECT_FALSE(h.all_finite());
}

TEST(Constants, ZeroLimitsMatchGenerator) {
    for (const auto& f : finite_constant_families()) {
        const auto c = constants(f);
        EXPECT_NEAR(c.c0, generator_value(f, 0.0), 1e-15) << f.name();
        EXPECT_NEAR(c.c0_star, conjugate_value(f, 0.0), 1e-15) << f.name();
    }
}

TEST(Constants, DerivedSums) {
    const auto fi = constants(GeneratorFamily::frontier_integral());
    EXPECT_EQ(fi.lipschitz_sum(), 2.0);
    EXPECT_EQ(fi.offset_sum(), 1.0);
}

TEST(VerifyConstants, FrontierAndSkewJsPass) {
    const auto grid = log_grid(1e-6, 1e3, 400);
    for (const auto& f : {GeneratorFamily::frontier_integral(), GeneratorFamily::skew_js(0.5)}) {
        const auto audit = verify_constants(f, grid);
        EXPECT_TRUE(audit.applicable);
        EXPECT_TRUE(audit.passed) << f.name() << ": " << (audit.failures.empty() ? "" : audit.failures.front());
        EXPECT_GT(audit.checks, grid.size());
    }
}

TEST(VerifyConstants, EveryFiniteFamilyPasses) {
    const auto grid = log_grid(1e-6, 1e3, 400);
    for (const auto& f : finite_constant_families()) {
        const auto audit = verify_constants(f, grid);
        EXPECT_TRUE(audit.passed) << f.name() << ": " << (audit.failures.empty() ? "" : audit.failures.front());
    }
}

TEST(VerifyConstants, InfiniteConstantsAreNotApplicable) {
    const auto grid = log_grid(1e-6, 1e3, 50);
    const auto h = verify_constants(GeneratorFamily::hellinger(), grid);
    EXPECT_FALSE(h.applicable);
    EXPECT_TRUE(h.passed);
    EXPECT_FALSE(verify_constants(GeneratorFamily::kl(), grid).applicable);
}

TEST(VerifyConstants, DetectsUnderstatedConstants) {
    const auto grid = log_grid(1e-6, 1e3, 400);
    const auto fi = GeneratorFamily::frontier_integral();
    auto c = constants(fi);
    c.c2 *= 0.9;
    EXPECT_FALSE(verify_constants(fi, grid, c).passed);
    c = constants(fi);
    c.c1_star *= 0.5;
    EXPECT_FALSE(verify_constants(fi, grid, c).passed);
    c = constants(fi);
    c.c0 = 0.4;
    EXPECT_FALSE(verify_constants(fi, grid, c).passed);
}

TEST(GeneratorFamily, ParseAndNameRoundTrip) {
    for (const auto& f : all_families()) EXPECT_EQ(GeneratorFamily::parse(f.name()), f) << f.name();
    EXPECT_THROW(GeneratorFamily::parse("ikl"), DomainError);
    EXPECT_THROW(GeneratorFamily::parse("ikl:1.0"), DomainError);
    EXPECT_THROW(GeneratorFamily::parse("sjs:0"), DomainError);
    EXPECT_THROW(GeneratorFamily::parse("fi:0.5"), DomainError);
    EXPECT_THROW(GeneratorFamily::parse("tv"), DomainError);
    EXPECT_THROW(GeneratorFamily::interpolated_chi2(-0.2), DomainError);
}
