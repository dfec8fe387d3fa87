#include "wghp/problem.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>

using namespace wghp;

TEST(MakeProblem, DerivesBPrime)
{
    const ProblemSpec pb = make_problem(1e-5, 1e-2, "cos(x)", "1+x", "exp(x)");
    for (double x : {0.0, 0.3, 1.0}) {
        EXPECT_NEAR(pb.b_prime(x), -std::sin(x), 1e-15);
    }
}

TEST(MakeProblem, RejectsParametersOutsideUnitInterval)
{
    EXPECT_THROW(make_problem(0.0, 0.5, "1", "1", "1"), std::invalid_argument);
    EXPECT_THROW(make_problem(1.5, 0.5, "1", "1", "1"), std::invalid_argument);
    EXPECT_THROW(make_problem(0.5, 0.0, "1", "1", "1"), std::invalid_argument);
    EXPECT_THROW(make_problem(0.5, -1.0, "1", "1", "1"), std::invalid_argument);
    EXPECT_THROW(make_problem(NAN, 0.5, "1", "1", "1"), std::invalid_argument);
    EXPECT_NO_THROW(make_problem(1.0, 1.0, "1", "1", "1"));
}

TEST(MakeProblem, PropagatesSyntaxErrors) { EXPECT_THROW(make_problem(0.1, 0.1, "cos(", "1", "1"), ParseError); }

TEST(Validate, ModelProblem)
{
    const ProblemSpec pb = make_problem(1e-5, 1e-2, "cos(x)", "1+x", "exp(x)");
    const Validation v = validate(pb);
    // 1 + x + eps2 sin(x)/2 is increasing, minimum 1 at x = 0
    EXPECT_NEAR(v.gamma_hat, 1.0, 1e-15);
    EXPECT_FALSE(v.marginal);
}

TEST(Validate, NegativeConvection)
{
    try {
        validate(make_problem(0.1, 0.1, "-1", "1", "1"));
        FAIL();
    } catch (const AssumptionViolation& e) {
        EXPECT_NE(std::string(e.what()).find("b > 0"), std::string::npos);
    }
}

TEST(Validate, NegativeReaction) { EXPECT_THROW(validate(make_problem(0.1, 0.1, "1", "x - 0.5", "1")), AssumptionViolation); }

TEST(Validate, GammaZero)
{
    // r - eps2 b'/2 = 0 - 1/2 * 0 = 0
    try {
        validate(make_problem(0.1, 1.0, "1", "0", "1"));
        FAIL();
    } catch (const AssumptionViolation& e) {
        EXPECT_NE(std::string(e.what()).find("gamma"), std::string::npos);
    }
}

TEST(Validate, MarginalGammaIsFlagged)
{
    const Validation v = validate(make_problem(0.1, 1.0, "1", "1e-10", "1"));
    EXPECT_TRUE(v.marginal);
}

TEST(Validate, NeedsTwoSamples) { EXPECT_THROW(validate(make_problem(0.1, 0.1, "1", "1", "1"), 1), std::invalid_argument); }

TEST(Regime, ModelValues)
{
    EXPECT_EQ(classify_regime(1e-5, 1e-2), Regime::ReactionConvectionDiffusion);
    EXPECT_EQ(classify_regime(1e-6, 1.0), Regime::ConvectionDiffusion);
    EXPECT_EQ(classify_regime(1e-4, 1e-4), Regime::ReactionDiffusion);
    EXPECT_EQ(classify_regime(1e-8, 1e-3), Regime::ReactionConvectionDiffusion);
    EXPECT_EQ(classify_regime(1e-6, 1e-6), Regime::ReactionDiffusion);
    EXPECT_EQ(classify_regime(1e-4, 1e-5), Regime::ReactionDiffusion);
    EXPECT_STREQ(to_string(Regime::ReactionConvectionDiffusion), "RCD");
}

TEST(Regime, ThresholdBoundaries)
{
    EXPECT_EQ(classify_regime(0.1, 0.9), Regime::ReactionConvectionDiffusion);
    EXPECT_EQ(classify_regime(0.1, 0.900001), Regime::ConvectionDiffusion);
    // 4 eps1 = eps2^2 is reaction-diffusion
    EXPECT_EQ(classify_regime(0.25e-4, 1e-2), Regime::ReactionDiffusion);
    EXPECT_EQ(classify_regime(0.2499e-4, 1e-2), Regime::ReactionConvectionDiffusion);
}

TEST(Regime, UnitConvectionIsAlwaysConvectionDiffusion)
{
    for (double e1 = 1.0; e1 > 1e-12; e1 /= 3.0) {
        EXPECT_EQ(classify_regime(e1, 1.0), Regime::ConvectionDiffusion);
    }
}

TEST(Mu, ConstantCoefficientsClosedForm)
{
    // roots of eps1 l^2 - eps2 l - 1 = 0, computed independently in long double
    const long double e1 = 1e-4L, e2 = 0.1L, root = std::sqrt(e2 * e2 + 4 * e1);
    const double mu0 = static_cast<double>((-e2 + root) / (2 * e1));
    const double mu1 = static_cast<double>((e2 + root) / (2 * e1));
    const MuPair mu = compute_mu(make_problem(1e-4, 0.1, "1", "1", "1"));
    EXPECT_NEAR(mu.mu0, mu0, 1e-11 * mu0);
    EXPECT_NEAR(mu.mu1, mu1, 1e-11 * mu1);
    EXPECT_NEAR(mu.mu0, 9.9019513592785, 1e-9);
    EXPECT_NEAR(mu.mu1, 1009.9019513592785, 1e-9);
}

TEST(Mu, ReactionDiffusionLimit)
{
    const MuPair mu = compute_mu(1e-6, 0.0, parse("1"), parse("1"));
    EXPECT_NEAR(mu.mu0, 1000.0, 1e-9);
    EXPECT_NEAR(mu.mu1, 1000.0, 1e-9);
}

TEST(Mu, ModelProblemMinimisesOverX)
{
    const ProblemSpec pb = make_problem(1e-5, 1e-2, "cos(x)", "1+x", "exp(x)");
    const MuPair mu = compute_mu(pb);
    double lo0 = INFINITY, lo1 = INFINITY;
    for (int i = 0; i <= 100000; ++i) {
        const double x = i / 100000.0, eb = 1e-2 * std::cos(x), r = 1 + x;
        const double s = std::sqrt(eb * eb + 4e-5 * r);
        lo0 = std::min(lo0, (-eb + s) / 2e-5);
        lo1 = std::min(lo1, (eb + s) / 2e-5);
    }
    EXPECT_NEAR(mu.mu0, lo0, 1e-8 * lo0);
    EXPECT_NEAR(mu.mu1, lo1, 1e-8 * lo1);
}

TEST(Mu, RandomSpecsProperties)
{
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> logu(-10, 0), coef(0.1, 3.0), scale(1.0, 10.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double e1 = std::pow(10.0, logu(rng)), e2 = std::pow(10.0, logu(rng));
        const double b0 = coef(rng), b1 = coef(rng), r0 = coef(rng), r1 = coef(rng);
        const Expr b = parse(std::to_string(b0) + " + " + std::to_string(b1) + "*x^2");
        const Expr r = parse(std::to_string(r0) + " + " + std::to_string(r1) + "*sin(3*x)^2");
        const MuPair mu = compute_mu(e1, e2, b, r, 257);
        EXPECT_GT(mu.mu0, 0.0);
        EXPECT_LE(mu.mu0, mu.mu1);
        EXPECT_LE(mu.mu0 * std::sqrt(e1), 10.0);
        // scaling r up never decreases mu0
        const double c = scale(rng);
        const MuPair scaled = compute_mu(e1, e2, b, Expr::number(c) * r, 257);
        EXPECT_GE(scaled.mu0, mu.mu0 * (1 - 1e-14));
    }
}

TEST(Mu, NeedsTwoSamples) { EXPECT_THROW(compute_mu(0.1, 0.1, parse("1"), parse("1"), 1), std::invalid_argument); }

TEST(Mu, PropagatesDomainErrors) { EXPECT_THROW(compute_mu(0.1, 0.1, parse("1"), parse("log(x)")), DomainError); }
