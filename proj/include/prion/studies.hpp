#pragma once

#include <atomic>
#include <cmath>
#include <limits>
#include <thread>
#include <vector>

#include "prion/config.hpp"
#include "prion/diagnostics.hpp"
#include "prion/integrator.hpp"
#include "prion/oracle.hpp"

namespace prion {

/// Step for a rung with `cells` cells: the configured dt scaled by
/// (configured cells / cells), halved until it satisfies the scheme's bound
/// at the initial state.
inline double ladder_dt(const RunConfig& base, std::size_t cells) {
    RunConfig c = base;
    c.grid.cells = cells;
    const auto setup = make_setup(c);
    const Model model(setup.grid, setup.rates);
    State x;
    x.v = setup.v0;
    x.u = setup.u0;
    const double bound = model.dt_bound(x, setup.scheme);
    double dt = base.time.dt * static_cast<double>(base.grid.cells) / static_cast<double>(cells);
    while (dt > bound) dt *= 0.5;
    return dt;
}

/// Least-squares slope of log(err) against log(h); NaN with fewer than two
/// positive entries.
inline double empirical_order(const std::vector<double>& h, const std::vector<double>& err) {
    std::vector<double> x, y;
    for (std::size_t k = 0; k < h.size() && k < err.size(); ++k) {
        if (err[k] > 0.0 && h[k] > 0.0 && std::isfinite(err[k])) {
            x.push_back(std::log(h[k]));
            y.push_back(std::log(err[k]));
        }
    }
    if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxy += (x[k] - mx) * (y[k] - my);
        sxx += (x[k] - mx) * (x[k] - mx);
    }
    return sxy / sxx;
}

struct RungResult {
    std::size_t cells = 0;
    double h = 0.0;
    double dt = 0.0;
    bool has_oracle = false;
    double err_v = 0.0, err_P = 0.0, err_U = 0.0;
    bool oracle_valid = false;
    double overflow_share = 0.0;
    double balance_max = 0.0;
    std::vector<double> weak;  // max relative residual per test function
    double weak_max = 0.0;
    /// Distance at T to the next finer rung (restricted to this grid); NaN on
    /// the finest rung.
    double cross_grid = std::numeric_limits<double>::quiet_NaN();
};

struct LadderResult {
    std::vector<RungResult> rungs;
    double order_v = 0.0, order_P = 0.0, order_U = 0.0;
    double order_weak = 0.0;
    double order_cross_grid = 0.0;
};

struct LadderOptions {
    std::size_t threads = 1;
    std::uint64_t seed = 7;
    bool weak_residual = true;
    bool cross_grid = true;
};

/// Runs the configuration on every rung of the ladder with output at every
/// step and collects oracle errors (closed-moment rates only), balance and
/// weak-form residuals, and the distance between consecutive rungs.
inline LadderResult run_ladder(const RunConfig& base, const LadderOptions& opt = {}) {
    const auto& cells = base.diagnostics.ladder;
    const auto n = cells.size();
    LadderResult out;
    out.rungs.resize(n);
    std::vector<Trajectory> finals(n);
    const auto phis = random_test_functions(base.diagnostics.test_functions, base.diagnostics.test_function_knots,
                                            base.grid.y0, base.grid.ymax, opt.seed);
    const RateSet rates = make_rates(base);
    const bool closed = has_closed_moments(rates);

    auto work = [&](std::size_t k) {
        RunConfig c = base;
        c.grid.cells = cells[k];
        c.time.cfl.reset();
        c.time.dt = ladder_dt(base, cells[k]);
        c.time.output_every = c.time.dt;
        auto setup = make_setup(c);
        auto traj = simulate(setup);
        auto& r = out.rungs[k];
        r.cells = cells[k];
        r.h = (c.grid.ymax - c.grid.y0) / static_cast<double>(cells[k]);
        if (c.grid.mode == GridMode::geometric) r.h = *std::max_element(setup.grid.widths().begin(), setup.grid.widths().end());
        r.dt = c.time.dt;
        for (double b : balance_residual(traj)) r.balance_max = std::max(r.balance_max, b);
        r.overflow_share = overflow_share(traj);
        if (closed) {
            const auto profile = make_initial_profile(c.initial);
            const double P0 = profile.integral(c.grid.y0, c.grid.ymax, 0);
            const double U0 = profile.integral(c.grid.y0, c.grid.ymax, 1);
            const auto cmp = compare_to_oracle(traj, moment_params(setup.rates), c.v0, P0, U0);
            r.has_oracle = true;
            r.err_v = cmp.err_v;
            r.err_P = cmp.err_P;
            r.err_U = cmp.err_U;
            r.oracle_valid = cmp.valid;
        }
        if (opt.weak_residual && !phis.empty()) {
            for (const auto& w : weak_form_residual(traj, setup.rates, phis)) {
                r.weak.push_back(w.max_relative());
                r.weak_max = std::max(r.weak_max, w.max_relative());
            }
        }
        // only the final state is needed afterwards
        Trajectory last;
        last.grid = traj.grid;
        last.states.push_back(traj.states.back());
        finals[k] = std::move(last);
    };

    const std::size_t threads = std::max<std::size_t>(1, std::min(opt.threads, n));
    if (threads == 1) {
        for (std::size_t k = 0; k < n; ++k) work(k);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(threads);
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                try {
                    for (std::size_t k; (k = next++) < n;) work(k);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    if (opt.cross_grid) {
        const auto g = WeightFunction::for_alpha(base.diagnostics.alpha, base.grid.y0);
        for (std::size_t k = 0; k + 1 < n; ++k) {
            if (cells[k + 1] % cells[k] != 0) continue;
            out.rungs[k].cross_grid = cross_grid_distance(finals[k], finals[k + 1], g);
        }
    }

    std::vector<double> h, ev, eP, eU, ew, hc, ec;
    for (const auto& r : out.rungs) {
        h.push_back(r.h);
        ev.push_back(r.err_v);
        eP.push_back(r.err_P);
        eU.push_back(r.err_U);
        ew.push_back(r.weak_max);
        if (std::isfinite(r.cross_grid)) {
            hc.push_back(r.h);
            ec.push_back(r.cross_grid);
        }
    }
    out.order_v = empirical_order(h, ev);
    out.order_P = empirical_order(h, eP);
    out.order_U = empirical_order(h, eU);
    out.order_weak = empirical_order(h, ew);
    out.order_cross_grid = empirical_order(hc, ec);
    return out;
}

}  // namespace prion
