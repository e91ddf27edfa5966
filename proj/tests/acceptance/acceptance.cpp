// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "moment_quadrature.hpp"
#include "prion/prion.hpp"
#include "support.hpp"

using namespace prion;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void run(int id, const char* name, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("%s  %d %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(3);
    os << x;
    return os.str();
}

double number_sum(const Grid& g, const std::vector<double>& du) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += du[i] * g.widths()[i];
    return s;
}

double moment_sum(const Grid& g, const std::vector<double>& du) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s += g.centers()[i] * du[i] * g.widths()[i];
    return s;
}

RunConfig baseline_config(double nu) {
    RunConfig c;
    c.rates.nu = nu;
    c.diagnostics.ladder = {100, 200, 400, 800};
    return c;
}

std::size_t worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

const RungResult& rung(const LadderResult& l, std::size_t cells) {
    for (const auto& r : l.rungs)
        if (r.cells == cells) return r;
    throw std::runtime_error("ladder has no rung with " + std::to_string(cells) + " cells");
}

}  // namespace

int main() {
    run(1, "kernel identities", [] {
        const auto ys = log_samples(1.0, 1e3, 100);
        double worst = 0.0;
        bool ok = true;
        for (auto k0 : {DaughterProfile::uniform(), DaughterProfile::parabolic()}) {
            const auto r = make_power_law_rates({1, 1, 1, 0, 1, 0, 1}, {1, 1, 0, 1}, k0);
            const auto rep = check_kernel_identities(r, ys, 1e-10);
            ok = ok && rep.status == Status::pass;
            worst = std::max({worst, rep.constants.at("normalization_deviation"),
                              rep.constants.at("moment_deviation")});
        }
        return Outcome{ok, "max deviation " + fmt(worst) + " (tol 1e-10, uniform and parabolic)"};
    });

    run(2, "discrete conservation (bitwise)", [] {
        const Grid g = Grid::uniform(1.0, 65.0, 256);
        const auto r = prion::testing::baseline_rates();
        std::mt19937_64 rng(2024);
        int join_bad = 0, transport_bad = 0;
        for (int trial = 0; trial < 100; ++trial) {
            const auto u = prion::testing::dyadic_density(rng, g.size());
            const auto j = joining_operator(u, g, r.eta);
            if (moment_sum(g, j.du) + j.overflow != 0.0) ++join_bad;
            const auto t = transport_operator(u, 1.25, g, r, 0.0);
            if (number_sum(g, t.du) + t.overflow_number != 0.0) ++transport_bad;
        }
        return Outcome{join_bad == 0 && transport_bad == 0,
                       "nonzero joining moment sums " + std::to_string(join_bad) + "/100, transport number sums " +
                           std::to_string(transport_bad) + "/100"};
    });

    // Both ladders feed criteria 3, 4, 6 and 7. Every rung outputs every step.
    LadderResult ladder[2];
    const auto lt0 = std::chrono::steady_clock::now();
    std::string ladder_error;
    try {
        LadderOptions opt;
        opt.threads = worker_count();
        opt.seed = 7;
        ladder[0] = run_ladder(baseline_config(0.0), opt);
        opt.weak_residual = false;
        opt.cross_grid = false;
        ladder[1] = run_ladder(baseline_config(1.0), opt);
    } catch (const std::exception& e) {
        ladder_error = e.what();
    }
    const double ladder_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - lt0).count();
    std::printf("      ladders N = 100..800 for nu = 0 and nu = 1: %.1f s\n", ladder_secs);
    auto need_ladder = [&] {
        if (!ladder_error.empty()) throw std::runtime_error("ladder failed: " + ladder_error);
    };

    run(3, "balance law", [&] {
        need_ladder();
        double bal = 0.0, share = 0.0;
        for (const auto& l : ladder) {
            bal = std::max(bal, rung(l, 400).balance_max);
            share = std::max(share, rung(l, 400).overflow_share);
        }
        return Outcome{bal <= 1e-8 && share <= 1e-3,
                       "N=400 max residual " + fmt(bal) + " (tol 1e-8), overflow share " + fmt(share) +
                           " (tol 1e-3), nu in {0,1}"};
    });

    run(4, "oracle equivalence", [&] {
        need_ladder();
        auto u = [](double y) { return (y - 1.0) * (y - 1.0) * std::exp(-0.5 * (y - 2.5) * (y - 2.5) / 0.25); };
        double quad_err = 0.0;
        for (double nu : {0.0, 1.0}) {
            const auto p = moment_params(prion::testing::baseline_rates(nu));
            const double v = 2.0;
            const auto q = prion::testing::weak_form_moments(p, v, u, 12.0);
            const auto rhs = closed_moment_rhs(v, q.P, q.U, p);
            quad_err = std::max({quad_err, std::abs(q.dP - rhs.dP) / std::abs(rhs.dP),
                                 std::abs(q.dU - rhs.dU) / std::abs(rhs.dU),
                                 std::abs(q.dv - rhs.dv) / std::abs(rhs.dv)});
        }
        bool ok = quad_err <= 1e-6;
        std::string d = "quadrature check " + fmt(quad_err) + " (tol 1e-6)";
        for (int k = 0; k < 2; ++k) {
            const auto& l = ladder[k];
            const auto& r = rung(l, 400);
            const double e = std::max({r.err_v, r.err_P, r.err_U});
            bool mono = true;
            for (std::size_t i = 1; i < l.rungs.size(); ++i) {
                const auto& a = l.rungs[i - 1];
                const auto& b = l.rungs[i];
                mono = mono && b.err_v < a.err_v && b.err_P < a.err_P && b.err_U < a.err_U;
            }
            const double order = std::min({l.order_v, l.order_P, l.order_U});
            bool valid = true;
            for (const auto& x : l.rungs) valid = valid && x.has_oracle && x.oracle_valid;
            ok = ok && valid && e <= 0.02 && order >= 1.0 && mono;
            d += "; nu=" + std::to_string(k) + ": N=400 err " + fmt(e) + " (tol 0.02), order " + fmt(order) +
                 (mono ? ", decreasing" : ", NOT decreasing") + (valid ? "" : ", oracle invalid");
        }
        return Outcome{ok, d};
    });

    run(5, "hypothesis audit ground truths", [] {
        const auto r = prion::testing::baseline_rates();
        const auto natural = check_natural_space_conditions(r, SampleGrid{1.0});
        const double delta = find_report(natural, "splitting_spread")->constants.at("delta");
        const auto lin = compute_xi_alpha(DaughterProfile::uniform(), 1.0, 0.0, 0.0);
        double xi_dev = 0.0;
        for (double x : lin.xi) xi_dev = std::max(xi_dev, std::abs(x - 1.0));
        const double sup0 = compute_xi_alpha(DaughterProfile::uniform(), 0.0, 0.0, 0.0).sup_xi;
        const double eta = 1.0, y0 = 1.0;
        const auto a = check_joining_bound_sublinear(JoiningRate::constant(eta), 1.0, SampleGrid{y0});
        const double K0 = a.constants.at("K0");
        const auto no_mu = make_power_law_rates({1, 1, 0, 0, 1, 0, eta}, {1, 1, 0, 1});
        const auto em = find_report(check_natural_space_conditions(no_mu, SampleGrid{1.0}), "joining_vs_degradation");
        const bool ok = std::abs(delta - 1.0 / 6.0) <= 1e-9 && xi_dev <= 1e-12 && sup0 >= 1.98 && sup0 <= 2.0 &&
                        a.status == Status::pass && std::abs(K0 - eta / (2.0 * y0)) <= 0.01 * eta / (2.0 * y0) &&
                        em->status == Status::fail;
        return Outcome{ok, "delta " + fmt(delta) + ", xi dev " + fmt(xi_dev) + ", sup xi(b=0) " + fmt(sup0) +
                               ", K0 " + fmt(K0) + " (" + to_string(a.status) + "), joining vs degradation at mu=0 " +
                               to_string(em->status)};
    });

    run(6, "weak-form residual", [&] {
        need_ladder();
        const auto& l = ladder[0];
        const double w = rung(l, 400).weak_max;
        std::string d = "N=400 max relative " + fmt(w) + " (tol 1e-3), order " + fmt(l.order_weak) + ", by rung";
        for (const auto& r : l.rungs) d += " " + fmt(r.weak_max);
        return Outcome{w <= 1e-3 && l.order_weak >= 1.0, d};
    });

    run(7, "empirical uniqueness", [&] {
        need_ladder();
        const auto c = baseline_config(0.0);
        const auto setup = make_setup(c);
        const auto bump = make_initial_profile(c.diagnostics.bump).cell_averages(setup.grid);
        const auto probe = uniqueness_probe(setup, bump, 1e-4, 1.0);
        const auto& l = ladder[0];
        // smallest rate whose 5% envelope covers D, reported alongside the fit
        double c_env = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 1; k < probe.t.size(); ++k)
            c_env = std::max(c_env, std::log(probe.D[k] / ((1.0 + kProbeTolerance) * probe.D[0])) / probe.t[k]);
        std::string d = "fitted c " + fmt(probe.c) + ", worst D/(D0 e^ct) " + fmt(probe.worst_ratio) +
                        " (tol 1.05), envelope holds from c = " + fmt(c_env) + "; cross-grid order " + fmt(l.order_cross_grid) + ", distances";
        for (const auto& r : l.rungs)
            if (std::isfinite(r.cross_grid)) d += " " + fmt(r.cross_grid);
        return Outcome{probe.holds && l.order_cross_grid >= 1.0, d};
    });

    run(8, "Euler positivity", [] {
        std::mt19937_64 rng(8);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const Grid g = Grid::uniform(1.0, 100.0, 400);
        int violations = 0;
        double min_u = 0.0, min_v = std::numeric_limits<double>::infinity();
        for (int trial = 0; trial < 50; ++trial) {
            const Model m(g, prion::testing::baseline_rates(trial % 2 == 0 ? 0.0 : 1.0));
            State x;
            x.v = 3.0 * unit(rng);
            x.u = prion::testing::random_density(rng, g.size(), 0.5);
            for (auto& a : x.u) a *= 2.0 * unit(rng);
            for (int k = 0; k < 1000; ++k) {
                x = step(m, x, 0.9 * m.euler_dt_bound(x), Scheme::euler);
                bool bad = x.v < 0.0;
                for (double a : x.u) {
                    bad = bad || a < 0.0;
                    min_u = std::min(min_u, a);
                }
                min_v = std::min(min_v, x.v);
                if (bad) {
                    ++violations;
                    break;
                }
            }
        }
        return Outcome{violations == 0, "runs with negative values " + std::to_string(violations) +
                                            "/50, min u " + fmt(min_u) + ", min v " + fmt(min_v)};
    });

    std::printf("%s: %d criteria failed\n", failures == 0 ? "ALL PASS" : "FAILED", failures);
    return failures == 0 ? 0 : 1;
}
