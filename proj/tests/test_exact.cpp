#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "hybridcool/exact.hpp"
#include "oracles.hpp"

using namespace hybridcool;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

SystemParams fig4a()
{
    auto p = oracle::fig2();
    p.g1as = 0.336;
    p.g0as = 0.013;
    p.delta = 0.376;
    return p;
}

SystemParams decoupled()
{
    auto p = oracle::fig2();
    p.g0as = 0.0;
    p.g1as = 0.0;
    p.gamma0 = 1e-3;
    p.gamma1 = 2e-3;
    return p;
}

/// Swaps each operator with its adjoint: d <-> d^+, b0 <-> b0^+, b1 <-> b1^+.
int partner(int i) { return i ^ 1; }

/// Distance from `z` to the nearest element of `set`.
double nearest(cplx z, const std::array<cplx, 6>& set)
{
    double best = INFINITY;
    for (auto s : set) best = std::min(best, std::abs(z - s));
    return best;
}

} // namespace

TEST(Drift, DecoupledEigenvalues)
{
    const auto p = decoupled();
    const auto ev = drift_eigenvalues(build_drift(p));
    const std::array<cplx, 6> expected{I * p.delta - p.kappa / 2.0,      -I * p.delta - p.kappa / 2.0,
                                       -I * p.omega0 - p.gamma0 / 2.0, I * p.omega0 - p.gamma0 / 2.0,
                                       -I * p.omega1 - p.gamma1 / 2.0, I * p.omega1 - p.gamma1 / 2.0};
    for (auto e : expected) EXPECT_LT(nearest(e, ev), 1e-9);
}

TEST(Drift, ConjugationStructure)
{
    const auto s = build_drift(oracle::fig2());
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
            EXPECT_EQ(s.M(partner(i), partner(j)), std::conj(s.M(i, j))) << i << "," << j;
            EXPECT_EQ(s.noise_map(partner(i), partner(j)), std::conj(s.noise_map(i, j))) << i << "," << j;
        }
}

TEST(Drift, DocumentedEntries)
{
    const auto p = oracle::fig2();
    const auto s = build_drift(p);
    const double G0 = p.g0as, G1 = p.g1as, D = p.delta, k = p.kappa;
    EXPECT_EQ(s.M(idx::d, idx::d), I * D - k / 2.0);
    EXPECT_EQ(s.M(idx::d, idx::b0), I * G0);
    EXPECT_EQ(s.M(idx::d, idx::b1_dag), -G1 * (I * D + k / 2.0));
    EXPECT_EQ(s.M(idx::b0, idx::b0), -(I * p.omega0 + p.gamma0 / 2.0));
    EXPECT_EQ(s.M(idx::b0, idx::d_dag), I * G0);
    EXPECT_EQ(s.M(idx::b1, idx::d), -I * G1 * D - G1 * k / 2.0);
    EXPECT_EQ(s.M(idx::b1, idx::d_dag), -I * G1 * D + G1 * k / 2.0);
    // b1 sees both its own bath and the laser noise
    EXPECT_EQ(s.noise_map(idx::b1, 4), -std::sqrt(p.gamma1));
    EXPECT_EQ(s.noise_map(idx::b1, 0), -G1 * std::sqrt(k));
    EXPECT_EQ(s.noise_map(idx::b1, 1), G1 * std::sqrt(k));
    EXPECT_EQ(s.noise_map(idx::b0, 0), 0.0);
}

TEST(Drift, PolesOfClosedFormMatchEigenvalues)
{
    auto p_a = fig4a();
    auto p_b = fig4a();
    p_b.delta = 0.377;
    p_b.g0as = 0.1;
    for (const auto& p : {p_a, p_b, oracle::fig2()}) {
        auto f = [&](cplx w) { return -closed_form_denominator(p, w); };
        auto roots = oracle::monic_roots(f, 6, p.kappa);
        const auto ev = drift_eigenvalues(build_drift(p));
        for (auto& r : roots) {
            r = oracle::newton_polish(f, r);
            const cplx lambda = -I * r; // w = i lambda
            EXPECT_LT(nearest(lambda, ev), 1e-6 * std::max(1.0, std::abs(lambda))) << lambda;
        }
        // and every eigenvalue is hit
        std::array<cplx, 6> lambdas;
        for (std::size_t i = 0; i < 6; ++i) lambdas[i] = -I * roots[i];
        for (auto e : ev) EXPECT_LT(nearest(e, lambdas), 1e-6 * std::max(1.0, std::abs(e)));
    }
}

TEST(Stability, DecoupledMargin)
{
    const auto p = decoupled();
    const auto st = stability(build_drift(p));
    EXPECT_TRUE(st.stable);
    EXPECT_NEAR(st.margin, std::min(p.gamma0, p.gamma1) / 2.0, 1e-12);
}

TEST(Stability, Fig4aPoint)
{
    auto p = fig4a();
    p.delta = 0.377;
    p.g0as = 0.1;
    EXPECT_TRUE(stability(build_drift(p)).stable);
}

TEST(Stability, BlueSwapUnstable)
{
    auto p = oracle::fig2();
    p.delta = -p.omega1;
    p.g1as = 0.336;
    const auto st = stability(build_drift(p));
    EXPECT_FALSE(st.stable);
    EXPECT_LT(st.margin, 0.0);
}

TEST(Stability, MarginalCountsAsUnstable)
{
    auto p = decoupled();
    p.gamma0 = 1e-13; // Re(lambda) = -5e-14, inside the tolerance
    EXPECT_FALSE(stability(build_drift(p)).stable);
    EXPECT_TRUE(stability(build_drift(p), 1e-15).stable);
}

TEST(ClosedForm, DecoupledTarget)
{
    auto p = oracle::fig2();
    p.g0as = 0.0;
    for (double w : {-1.0, -0.3, 0.2, 0.7, 3.0}) {
        const auto c = closed_form_coefficients(p, w);
        EXPECT_EQ(std::abs(c.A_d()), 0.0);
        EXPECT_EQ(std::abs(c.B_d()), 0.0);
        EXPECT_EQ(std::abs(c.B0()), 0.0);
        EXPECT_EQ(std::abs(c.A1()), 0.0);
        EXPECT_EQ(std::abs(c.B1()), 0.0);
        const cplx ref = -std::sqrt(p.gamma0) * chi_osc(p, Oscillator::target, w);
        EXPECT_LT(std::abs(c.A0() - ref), 1e-12 * std::abs(ref));
    }
}

TEST(ClosedForm, MatchesLinearSolveFig2)
{
    const auto p = oracle::fig2();
    const auto s = build_drift(p);
    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 100; ++i) {
        const double w = u(rng);
        const auto a = closed_form_coefficients(p, w);
        const auto b = solve_coefficients(s, w);
        for (std::size_t j = 0; j < 6; ++j)
            EXPECT_LT(std::abs(a.c[j] - b.c[j]), 1e-9 * std::abs(b.c[j])) << "w=" << w << " j=" << j;
    }
}

TEST(ClosedForm, MatchesLinearSolveRandomParameters)
{
    std::mt19937_64 rng(72);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    for (int i = 0; i < 200; ++i) {
        const auto p = oracle::random_params(rng);
        const double w = u(rng);
        const auto a = closed_form_coefficients(p, w);
        const auto b = solve_coefficients(build_drift(p), w);
        double scale = 0.0;
        for (auto c : b.c) scale = std::max(scale, std::abs(c));
        for (std::size_t j = 0; j < 6; ++j) EXPECT_LT(std::abs(a.c[j] - b.c[j]), 1e-9 * scale);
    }
}

TEST(ClosedForm, HighFrequencyDecay)
{
    const auto p = oracle::fig2();
    const double small = std::abs(closed_form_coefficients(p, 10.0 * p.kappa).A_d());
    const double large = std::abs(closed_form_coefficients(p, p.kappa).A_d());
    EXPECT_LT(small, large / 5.0);
}

TEST(ClosedForm, PoleGuard)
{
    auto p = decoupled();
    p.gamma0 = 0.0; // puts a pole on the real axis at w = omega0
    try {
        closed_form_coefficients(p, p.omega0);
        ADD_FAILURE() << "expected pole error";
    } catch (const Error& e) {
        EXPECT_EQ(std::string(e.what()), "evaluated at system pole");
    }
}

TEST(Integrand, NonNegative)
{
    std::mt19937_64 rng(81);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (const auto& p : {oracle::fig2(), oracle::fig3(), fig4a()}) {
        const auto s = build_drift(p);
        for (int i = 0; i < 500; ++i) {
            const double w = (i % 5 == 0) ? p.kappa * u(rng) : u(rng);
            for (double v : n0_integrand(solve_coefficients(s, w), p.nth0, p.nth1)) EXPECT_GE(v, 0.0);
        }
    }
}

TEST(ExactN0, ThermalEquilibriumWhenDecoupled)
{
    auto p = decoupled();
    p.gamma0 = 1e-6;
    p.gamma1 = 1e-6;
    const auto r = exact_n0(p);
    EXPECT_LT(rel(r.n0, p.nth0), 1e-6);
    EXPECT_EQ(r.n0_drive, 0.0);
    EXPECT_EQ(r.n0_ancilla, 0.0);
}

TEST(ExactN0, Fig4aBelowFivePercent)
{
    const auto r = exact_n0(fig4a());
    EXPECT_TRUE(r.stable);
    EXPECT_LT(r.n0, 0.05);
}

TEST(ExactN0, Fig4bBelowOnePointOne)
{
    auto p = fig4a();
    p.kappa = 7000.0;
    p.g0as = 0.03;
    p.delta = 0.37;
    EXPECT_LT(exact_n0(p).n0, 1.1);
}

TEST(ExactN0, ContributionsSumToTotal)
{
    const auto r = exact_n0(oracle::fig3());
    EXPECT_LE(std::abs(r.n0_drive + r.n0_local + r.n0_ancilla - r.n0), 1e-12 * r.n0);
    EXPECT_GE(r.n0_drive, 0.0);
    EXPECT_GE(r.n0_local, 0.0);
    EXPECT_GE(r.n0_ancilla, 0.0);
    EXPECT_LT(r.integration_error_estimate, 1e-6 * r.n0);
}

TEST(ExactN0, RoutesAgree)
{
    QuadratureSpec closed;
    closed.route = CoefficientRoute::closed_form;
    for (const auto& p : {oracle::fig3(), fig4a()}) EXPECT_LT(rel(exact_n0(p, closed).n0, exact_n0(p).n0), 1e-8);
}

TEST(ExactN0, WiderWindowChangesLittle)
{
    QuadratureSpec wide;
    wide.tail_factor = 20.0;
    for (const auto& p : {oracle::fig2(), fig4a()}) EXPECT_LT(rel(exact_n0(p, wide).n0, exact_n0(p).n0), 1e-4);
}

TEST(ExactN0, Deterministic)
{
    const auto p = oracle::fig3();
    EXPECT_EQ(exact_n0(p).n0, exact_n0(p).n0);
}

TEST(ExactN0, UnstableIsAnError)
{
    auto p = oracle::fig2();
    p.delta = -1.0;
    p.g1as = 0.336;
    try {
        exact_n0(p);
        ADD_FAILURE() << "expected instability";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::instability);
        EXPECT_NE(std::string(e.what()).find("divergent integral"), std::string::npos);
    }
}

TEST(ExactN0, QuadratureReportsDivergenceForUnstableSpectrum)
{
    auto p = oracle::fig2();
    p.delta = -1.0;
    p.g1as = 0.336;
    const auto s = build_drift(p);
    const auto q = integrate_n0(p, s, drift_eigenvalues(s), QuadratureSpec{});
    EXPECT_EQ(q.status, QuadStatus::divergent);
}

TEST(ExactN0, BudgetExhaustionIsAConvergenceError)
{
    QuadratureSpec tight;
    tight.rel_tol = 1e-14;
    tight.max_evaluations = 2000;
    try {
        exact_n0(oracle::fig3(), tight);
        ADD_FAILURE() << "expected convergence error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::convergence);
        EXPECT_NE(std::string(e.what()).find("estimate"), std::string::npos);
    }
}

TEST(Lyapunov, Decoupled)
{
    const auto p = decoupled();
    const auto C = steady_state_covariance(build_drift(p));
    EXPECT_NEAR(occupation(C, Oscillator::target), p.nth0, 1e-9 * p.nth0);
    EXPECT_NEAR(occupation(C, Oscillator::ancilla), p.nth1, 1e-9 * p.nth1);
    EXPECT_NEAR(lyapunov_n0(p).n0, p.nth0, 1e-9 * p.nth0);
}

TEST(Lyapunov, CovarianceIsHermitian)
{
    const auto C = steady_state_covariance(build_drift(fig4a()));
    EXPECT_LT((C - C.adjoint()).norm(), 1e-9 * C.norm());
}

TEST(Lyapunov, AgreesWithFrequencyIntegral)
{
    for (const auto& p : {oracle::fig2(), oracle::fig3(), fig4a()}) {
        const auto a = exact_n0(p);
        const auto b = lyapunov_n0(p);
        EXPECT_LT(rel(a.n0, b.n0), 1e-3);
        EXPECT_LT(rel(a.n0_drive, b.n0_drive), 1e-3);
        EXPECT_LT(rel(a.n0_local, b.n0_local), 1e-3);
        EXPECT_LT(rel(a.n0_ancilla, b.n0_ancilla), 1e-3);
    }
}

TEST(Lyapunov, ChannelsSumToTotal)
{
    const auto r = lyapunov_n0(oracle::fig3());
    EXPECT_LT(rel(r.n0_drive + r.n0_local + r.n0_ancilla, r.n0), 1e-9);
}

TEST(Lyapunov, UnstableRejected)
{
    auto p = oracle::fig2();
    p.delta = -1.0;
    p.g1as = 0.336;
    EXPECT_THROW(lyapunov_n0(p), Error);
}

TEST(Profile, SmallCouplingMatchesGoldenRule)
{
    auto p = oracle::fig3();
    p.delta = 0.377;
    const auto prof = contribution_profile(p, {1e-4, 3e-4, 1e-3});
    for (const auto& pt : prof) {
        ASSERT_TRUE(pt.exact) << pt.error;
        ASSERT_TRUE(pt.qnoise_n0);
        EXPECT_LT(rel(*pt.qnoise_n0, pt.exact->n0), 0.10);
        EXPECT_LT(rel(pt.exact->n0_local, *pt.qnoise_n0), 0.15);
    }
}

TEST(Profile, DriveDominatesAtLargeCoupling)
{
    auto p = oracle::fig3();
    p.delta = 0.377;
    for (const auto& pt : contribution_profile(p, {0.1, 0.15, 0.2})) {
        ASSERT_TRUE(pt.exact) << pt.error;
        EXPECT_GT(pt.exact->n0_drive, pt.exact->n0_local);
        EXPECT_GT(pt.exact->n0_drive, pt.exact->n0_ancilla);
    }
}

TEST(Profile, FailuresRecordedPerPoint)
{
    auto p = oracle::fig2();
    p.delta = -1.0;
    p.g1as = 0.336;
    const auto prof = contribution_profile(p, {0.01, 0.1});
    ASSERT_EQ(prof.size(), 2u);
    for (const auto& pt : prof) {
        EXPECT_FALSE(pt.exact);
        EXPECT_NE(pt.error.find("unstable"), std::string::npos);
    }
}
