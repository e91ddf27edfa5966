#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "moment_quadrature.hpp"
#include "prion/oracle.hpp"
#include "support.hpp"

using namespace prion;

namespace {

MomentOdeParams random_params(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 2.0);
    MomentOdeParams p;
    p.lambda = unit(rng);
    p.gamma = unit(rng);
    p.nu = unit(rng);
    p.y0 = 0.5 + unit(rng);
    p.tau_const = unit(rng);
    p.mu_const = unit(rng);
    p.beta_coef = unit(rng);
    p.eta_const = unit(rng);
    return p;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> t(n);
    for (std::size_t k = 0; k < n; ++k) t[k] = a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1);
    return t;
}

}  // namespace

TEST(MomentRhs, BalanceIdentityProperty) {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> unit(0.0, 3.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto p = random_params(rng);
        const double v = unit(rng), P = unit(rng), U = unit(rng);
        const auto r = closed_moment_rhs(v, P, U, p);
        const double rhs = p.lambda - p.gamma * v - p.mu_const * U;
        const double attach = v * p.tau_const * P / (1.0 + p.nu * U);
        const double scale = p.lambda + p.gamma * v + p.mu_const * U + attach + p.beta_coef * p.y0 * p.y0 * P;
        EXPECT_LE(std::abs(r.dv + r.dU - rhs), 1e-15 * std::max(1.0, scale));
    }
}

TEST(MomentRhs, NoPolymers) {
    std::mt19937_64 rng(67);
    const auto p = random_params(rng);
    const auto r = closed_moment_rhs(1.7, 0.0, 0.0, p);
    EXPECT_EQ(r.dP, 0.0);
    EXPECT_EQ(r.dU, 0.0);
    EXPECT_EQ(r.dv, p.lambda - p.gamma * 1.7);
}

TEST(MomentRhs, NonnegativityAtFaces) {
    std::mt19937_64 rng(71);
    std::uniform_real_distribution<double> unit(0.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        const auto p = random_params(rng);
        const double P = unit(rng);
        EXPECT_GE(closed_moment_rhs(0.0, P, unit(rng), p).dv, 0.0);
        // U >= y0 P holds for densities on (y0, inf); at U = y0 P the U equation is
        // attach + y0 P (-mu - beta y0) which can be negative only through losses
        const double U = p.y0 * P * (1.0 + unit(rng));
        EXPECT_GE(closed_moment_rhs(unit(rng), 0.0, U, p).dP, 0.0);
        EXPECT_GE(closed_moment_rhs(unit(rng), 0.0, 0.0, p).dU, 0.0);
    }
}

TEST(MomentRhs, MatchesWeakFormQuadrature) {
    // smooth density vanishing at y0, negligible beyond y = 12
    auto u = [](double y) { return (y - 1.0) * (y - 1.0) * std::exp(-0.5 * (y - 2.5) * (y - 2.5) / 0.25); };
    std::mt19937_64 rng(73);
    for (int trial = 0; trial < 3; ++trial) {
        auto p = random_params(rng);
        p.y0 = 1.0;
        const double v = 1.3;
        const auto q = prion::testing::weak_form_moments(p, v, u, 12.0);
        const auto r = closed_moment_rhs(v, q.P, q.U, p);
        EXPECT_NEAR(q.dP, r.dP, 1e-6 * std::abs(r.dP));
        EXPECT_NEAR(q.dU, r.dU, 1e-6 * std::abs(r.dU));
        EXPECT_NEAR(q.dv, r.dv, 1e-6 * std::abs(r.dv));
    }
}

TEST(MomentOde, PureAttachmentClosedForm) {
    MomentOdeParams p;
    p.tau_const = 0.8;
    const double v0 = 2.0, P0 = 0.7, U0 = 1.5;
    const auto s = solve_moment_ode(p, v0, P0, U0, linspace(0.0, 5.0, 51));
    ASSERT_EQ(s.samples.size(), 51u);
    for (const auto& x : s.samples) {
        EXPECT_NEAR(x.v, v0 * std::exp(-0.8 * P0 * x.t), 1e-9);
        EXPECT_DOUBLE_EQ(x.P, P0);
        EXPECT_NEAR(x.v + x.U, v0 + U0, 1e-12);
    }
}

TEST(MomentOde, AllZeroRatesConstant) {
    const auto s = solve_moment_ode(MomentOdeParams{}, 1.0, 2.0, 3.0, linspace(0.0, 3.0, 7));
    for (const auto& x : s.samples) {
        EXPECT_EQ(x.v, 1.0);
        EXPECT_EQ(x.P, 2.0);
        EXPECT_EQ(x.U, 3.0);
    }
}

TEST(MomentOde, SplittingOnlyReturnsMonomers) {
    MomentOdeParams p;
    p.beta_coef = 0.6;
    p.y0 = 1.0;
    const auto s = solve_moment_ode(p, 0.5, 1.0, 4.0, linspace(0.0, 4.0, 41));
    for (std::size_t k = 1; k < s.samples.size(); ++k) {
        EXPECT_LE(s.samples[k].U, s.samples[k - 1].U);
        EXPECT_GE(s.samples[k].v, s.samples[k - 1].v);
        EXPECT_NEAR(s.samples[k].v + s.samples[k].U, 4.5, 1e-10);
    }
    EXPECT_FALSE(s.negative_P);
}

TEST(MomentOde, SamplesOnlyRequestedTimes) {
    MomentOdeParams p;
    p.lambda = 1.0;
    p.gamma = 1.0;
    const auto s = solve_moment_ode(p, 0.0, 0.0, 0.0, {0.5, 1.0});
    ASSERT_EQ(s.samples.size(), 2u);
    EXPECT_NEAR(s.samples[0].v, 1.0 - std::exp(-0.5), 1e-10);
    EXPECT_NEAR(s.samples[1].v, 1.0 - std::exp(-1.0), 1e-10);
}

TEST(MomentOde, RejectsBadInput) {
    EXPECT_THROW(solve_moment_ode(MomentOdeParams{}, -1.0, 0.0, 0.0, {0.0}), InvalidParameter);
    EXPECT_THROW(solve_moment_ode(MomentOdeParams{}, 1.0, 0.0, 0.0, {1.0, 0.5}), InvalidParameter);
    MomentOdeParams bad;
    bad.mu_const = -1.0;
    EXPECT_THROW(solve_moment_ode(bad, 1.0, 0.0, 0.0, {0.0}), InvalidParameter);
}

TEST(MomentParams, OnlyClosedFamily) {
    const auto p = moment_params(prion::testing::baseline_rates(0.5));
    EXPECT_EQ(p.nu, 0.5);
    EXPECT_EQ(p.beta_coef, 1.0);
    EXPECT_EQ(p.eta_const, 1.0);
    const auto parabolic = make_power_law_rates({1, 1, 1, 0, 1, 0, 1}, {1, 1, 0, 1}, DaughterProfile::parabolic());
    EXPECT_THROW(moment_params(parabolic), InvalidParameter);
    const auto quadratic = make_power_law_rates({1, 2, 1, 0, 1, 0, 1}, {1, 1, 0, 1});
    EXPECT_THROW(moment_params(quadratic), InvalidParameter);
}

TEST(Comparison, ZeroRatesExact) {
    RunConfig c;
    c.rates.B = c.rates.M = c.rates.S = c.rates.eta = 0.0;
    c.rates.lambda = c.rates.gamma = 0.0;
    c.grid.cells = 60;
    c.time.T = 1.0;
    const auto s = make_setup(c);
    const auto traj = simulate(s);
    const auto& r0 = traj.records.front();
    const auto cmp = compare_to_oracle(traj, moment_params(s.rates), r0.v, r0.P, r0.M1);
    EXPECT_EQ(cmp.err_v, 0.0);
    EXPECT_EQ(cmp.err_P, 0.0);
    EXPECT_EQ(cmp.err_U, 0.0);
    EXPECT_TRUE(cmp.valid);
}

TEST(Comparison, MismatchedSaturationRejected) {
    const auto s = prion::testing::baseline_setup(50, 1.0);
    auto short_run = s;
    short_run.T = 0.2;
    const auto traj = simulate(short_run);
    auto other = moment_params(s.rates);
    other.nu = 0.0;
    const auto& r0 = traj.records.front();
    std::vector<double> ts;
    for (const auto& r : traj.records) ts.push_back(r.t);
    const auto series = solve_moment_ode(other, r0.v, r0.P, r0.M1, ts);
    try {
        compare_to_simulation(traj, moment_params(s.rates), series);
        FAIL() << "expected a mismatch";
    } catch (const InvalidParameter& e) {
        EXPECT_NE(std::string(e.what()).find("nu"), std::string::npos);
    }
    auto truncated = series;
    truncated.params = moment_params(s.rates);
    truncated.samples.pop_back();
    EXPECT_THROW(compare_to_simulation(traj, moment_params(s.rates), truncated), InvalidParameter);
}

TEST(Comparison, ErrorsShrinkUnderRefinement) {
    double prev = 1.0;
    for (std::size_t cells : {50, 100, 200}) {
        auto s = prion::testing::baseline_setup(cells, 1.0);
        s.T = 2.0;
        s.dt = 2e-3;
        const auto traj = simulate(s);
        const auto& r0 = traj.records.front();
        const auto cmp = compare_to_oracle(traj, moment_params(s.rates), r0.v, r0.P, r0.M1);
        EXPECT_TRUE(cmp.valid);
        EXPECT_LT(cmp.max_error(), prev);
        prev = cmp.max_error();
        for (std::size_t k = 0; k < cmp.t.size(); ++k) EXPECT_GE(cmp.U_sim[k], s.grid.y0() * cmp.P_sim[k]);
    }
    EXPECT_LT(prev, 0.02);
}
