#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "prion/integrator.hpp"
#include "support.hpp"

using namespace prion;

namespace {

RateSet rates_with(double lambda, double gamma, double M, double B, double eta, double S = 1.0, double nu = 0.0) {
    return make_power_law_rates({B, 1.0, M, 0.0, S, 0.0, eta}, {lambda, gamma, nu, 1.0});
}

State random_state(std::mt19937_64& rng, const Grid& g, double v = 1.5) {
    State x;
    x.v = v;
    x.u = prion::testing::random_density(rng, g.size());
    return x;
}

SimulationSetup small_setup(RateSet r, std::size_t cells = 100, double T = 1.0) {
    RunConfig c;
    c.grid.cells = cells;
    c.time.T = T;
    auto s = make_setup(c);
    s.rates = std::move(r);
    return s;
}

}  // namespace

TEST(Rhs, NoPolymers) {
    const Grid g = Grid::uniform(1.0, 20.0, 40);
    const Model m(g, rates_with(1.0, 0.5, 1.0, 1.0, 1.0));
    State x;
    x.v = 1.0;
    x.u.assign(40, 0.0);
    const auto d = m.rhs(x);
    EXPECT_DOUBLE_EQ(d.dv, 0.5);
    for (double a : d.du) EXPECT_EQ(a, 0.0);
}

TEST(Rhs, RejectsNegativeMonomers) {
    const Grid g = Grid::uniform(1.0, 20.0, 40);
    const Model m(g, rates_with(1.0, 0.5, 1.0, 1.0, 1.0));
    State x;
    x.v = -0.1;
    x.u.assign(40, 0.0);
    EXPECT_THROW(m.rhs(x), ContractViolation);
}

TEST(Rhs, BalanceIdentityProperty) {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> unit(0.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        const Grid g = trial % 2 ? Grid::geometric(1.0, 300.0, 80) : Grid::uniform(1.0, 40.0, 80);
        const auto r = make_power_law_rates({unit(rng), unit(rng), unit(rng), unit(rng), unit(rng),
                                             0.5 * unit(rng), unit(rng)},
                                            {unit(rng), unit(rng), unit(rng), 1.0});
        const Model m(g, r);
        const auto x = random_state(rng, g, unit(rng));
        const auto d = m.rhs(x);
        double dm1 = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) dm1 += g.centers()[i] * d.du[i] * g.widths()[i];
        const double lhs = d.dv + dm1 + d.dledger.overflow;
        const double rhs = r.lambda - r.gamma * x.v - d.dledger.degradation_moment;
        const double scale = std::abs(d.dv) + std::abs(dm1) + d.dledger.overflow + std::abs(rhs) + d.consumption;
        EXPECT_LE(std::abs(lhs - rhs), 1e-12 * scale) << trial;
    }
}

TEST(Rhs, SaturationSuppressesConsumption) {
    std::mt19937_64 rng(43);
    const Grid g = Grid::uniform(1.0, 30.0, 60);
    const auto x = random_state(rng, g);
    double prev_dv = -std::numeric_limits<double>::infinity();
    double prev_c = std::numeric_limits<double>::infinity();
    for (double nu : {0.0, 0.1, 0.5, 1.0, 5.0, 50.0}) {
        const auto d = Model(g, rates_with(1, 1, 1, 1, 1, 1.0, nu)).rhs(x);
        EXPECT_GE(d.dv, prev_dv);
        EXPECT_LE(d.consumption, prev_c);
        prev_dv = d.dv;
        prev_c = d.consumption;
    }
}

TEST(Step, ConsistentWithRhs) {
    std::mt19937_64 rng(47);
    const Grid g = Grid::uniform(1.0, 20.0, 40);
    const Model m(g, rates_with(1, 1, 1, 1, 1));
    const auto x = random_state(rng, g);
    const auto d = m.rhs(x);
    auto defect = [&](double dt) {
        const auto y = step_unchecked(m, x, dt, Scheme::rk4);
        double e = std::abs((y.v - x.v) / dt - d.dv);
        for (std::size_t i = 0; i < g.size(); ++i) e = std::max(e, std::abs((y.u[i] - x.u[i]) / dt - d.du[i]));
        return e;
    };
    const double e1 = defect(1e-3), e2 = defect(5e-4), e3 = defect(2.5e-4);
    EXPECT_LT(e3, e2);
    EXPECT_NEAR(e1 / e2, 2.0, 0.1);
    EXPECT_NEAR(e2 / e3, 2.0, 0.1);
    // Richardson: 2 D(dt/2) - D(dt) removes the first-order term
    auto quotient = [&](double dt) { return (step_unchecked(m, x, dt, Scheme::rk4).v - x.v) / dt; };
    EXPECT_LT(std::abs(2.0 * quotient(2.5e-4) - quotient(5e-4) - d.dv), 0.05 * e3);
}

TEST(Step, RefusesOversizedStep) {
    std::mt19937_64 rng(53);
    const Grid g = Grid::uniform(1.0, 20.0, 40);
    const Model m(g, rates_with(1, 1, 1, 1, 1));
    const auto x = random_state(rng, g);
    for (auto scheme : {Scheme::rk4, Scheme::euler}) {
        const double bound = m.dt_bound(x, scheme);
        try {
            step(m, x, 2.0 * bound, scheme);
            FAIL() << "expected a step-size refusal";
        } catch (const CflViolation& e) {
            EXPECT_EQ(e.required_dt, bound);
            EXPECT_EQ(e.requested_dt, 2.0 * bound);
        }
        EXPECT_NO_THROW(step(m, x, bound, scheme));
    }
    EXPECT_THROW(step(m, x, 0.0, Scheme::rk4), ContractViolation);
}

TEST(Step, EulerPositivityProperty) {
    std::mt19937_64 rng(59);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const Grid g = Grid::uniform(1.0, 30.0, 60);
        const auto r = rates_with(unit(rng), unit(rng), unit(rng), unit(rng), 2.0 * unit(rng), unit(rng), unit(rng));
        const Model m(g, r);
        auto x = random_state(rng, g, 3.0 * unit(rng));
        for (int k = 0; k < 200; ++k) {
            x = step(m, x, 0.9 * m.euler_dt_bound(x), Scheme::euler);
            ASSERT_GE(x.v, 0.0);
            for (double a : x.u) ASSERT_GE(a, 0.0);
        }
    }
}

TEST(Simulate, ConservedWithoutSourcesOrDegradation) {
    auto s = small_setup(rates_with(0.0, 0.0, 0.0, 1.0, 1.0), 100, 2.0);
    const auto traj = simulate(s);
    const auto& r0 = traj.records.front();
    const double total0 = r0.v + r0.M1;
    for (const auto& r : traj.records) EXPECT_NEAR(r.v + r.M1 + r.overflow, total0, 1e-10 * total0);
    for (double e : balance_residual(traj)) EXPECT_LE(e, 1e-10);
}

TEST(Simulate, MonomerRelaxationMatchesClosedForm) {
    auto s = small_setup(rates_with(1.0, 0.5, 1.0, 1.0, 1.0), 50, 5.0);
    s.u0.assign(s.grid.size(), 0.0);
    s.v0 = 3.0;
    const auto traj = simulate(s);
    for (const auto& r : traj.records) {
        const double exact = 2.0 + (3.0 - 2.0) * std::exp(-0.5 * r.t);
        EXPECT_NEAR(r.v, exact, 1e-8);
        EXPECT_EQ(r.P, 0.0);
    }
}

TEST(Simulate, ZeroRatesConstant) {
    auto s = small_setup(rates_with(0.0, 0.0, 0.0, 0.0, 0.0, 0.0), 80, 1.0);
    const auto traj = simulate(s);
    for (const auto& x : traj.states) {
        EXPECT_EQ(x.v, s.v0);
        EXPECT_EQ(x.u, s.u0);
    }
    for (double e : balance_residual(traj)) EXPECT_EQ(e, 0.0);
}

TEST(Simulate, CadenceDoesNotChangeStates) {
    auto coarse = small_setup(prion::testing::baseline_rates(1.0), 80, 1.0);
    auto fine = coarse;
    coarse.output_every = 0.2;
    fine.output_every = 0.1;
    const auto a = simulate(coarse), b = simulate(fine);
    ASSERT_EQ(a.states.size(), 6u);
    ASSERT_EQ(b.states.size(), 11u);
    for (std::size_t k = 0; k < a.states.size(); ++k) {
        const auto& x = a.states[k];
        const auto& y = b.states[2 * k];
        EXPECT_EQ(x.t, y.t);
        EXPECT_EQ(x.v, y.v);
        EXPECT_EQ(x.u, y.u);
        EXPECT_EQ(x.ledger.overflow, y.ledger.overflow);
    }
}

TEST(Simulate, Deterministic) {
    const auto s = small_setup(prion::testing::baseline_rates(1.0), 80, 0.5);
    const auto a = simulate(s), b = simulate(s);
    ASSERT_EQ(a.states.size(), b.states.size());
    for (std::size_t k = 0; k < a.states.size(); ++k) {
        EXPECT_EQ(a.states[k].u, b.states[k].u);
        EXPECT_EQ(a.states[k].v, b.states[k].v);
    }
}

TEST(Simulate, OutputTimesIncreasing) {
    auto s = small_setup(prion::testing::baseline_rates(), 60, 0.35);
    s.output_every = 0.1;
    s.dt = 0.0025;
    const auto traj = simulate(s);
    // last record lands on T even though T is not a multiple of the cadence
    ASSERT_EQ(traj.records.size(), 5u);
    EXPECT_DOUBLE_EQ(traj.records.back().t, 0.35);
    for (std::size_t k = 1; k < traj.records.size(); ++k) EXPECT_GT(traj.records[k].t, traj.records[k - 1].t);
}

TEST(Simulate, CflModeHitsOutputTimes) {
    auto s = small_setup(prion::testing::baseline_rates(), 60, 0.5);
    s.cfl = 0.5;
    const auto traj = simulate(s);
    ASSERT_EQ(traj.records.size(), 6u);
    for (std::size_t k = 0; k < traj.records.size(); ++k) EXPECT_DOUBLE_EQ(traj.records[k].t, 0.1 * k);
    for (double e : balance_residual(traj)) EXPECT_LE(e, 1e-10);
}

TEST(Simulate, RejectsIncommensurateCadence) {
    auto s = small_setup(prion::testing::baseline_rates(), 40, 1.0);
    s.output_every = 0.0125;
    s.dt = 0.01;
    EXPECT_THROW(simulate(s), InvalidParameter);
    s.output_every = 0.1;
    s.T = 1.0005;
    EXPECT_THROW(simulate(s), InvalidParameter);
}

TEST(Simulate, AbortsOnNonFiniteState) {
    auto s = small_setup(prion::testing::baseline_rates(), 60, 1.0);
    s.rates.tau = RateFunction::from_callable(
        [](double y) { return y > 5.0 ? std::numeric_limits<double>::quiet_NaN() : 1.0; },
        [](double) { return 0.0; });
    s.rates.power_law.reset();
    try {
        simulate(s);
        FAIL() << "expected an abort";
    } catch (const SimulationAborted& e) {
        EXPECT_EQ(e.last_valid.t, 0.0);
        EXPECT_EQ(e.last_valid.u, s.u0);
    }
}

TEST(Balance, RungeKuttaAndEulerLedgers) {
    for (auto scheme : {Scheme::rk4, Scheme::euler}) {
        auto s = small_setup(prion::testing::baseline_rates(1.0), 100, 2.0);
        s.scheme = scheme;
        s.dt = scheme == Scheme::rk4 ? 1e-3 : 5e-4;
        const auto traj = simulate(s);
        double worst = 0.0;
        for (double e : balance_residual(traj)) worst = std::max(worst, e);
        EXPECT_LE(worst, 1e-10) << to_string(scheme);
    }
}

TEST(Balance, DetectsTamperedLedger) {
    auto s = small_setup(prion::testing::baseline_rates(), 60, 0.5);
    auto traj = simulate(s);
    traj.records.back().degradation_moment += 1e-3;
    EXPECT_GT(balance_residual(traj).back(), 1e-5);
}
