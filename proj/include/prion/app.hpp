#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "prion/config.hpp"
#include "prion/diagnostics.hpp"
#include "prion/hypothesis.hpp"
#include "prion/integrator.hpp"
#include "prion/io.hpp"
#include "prion/oracle.hpp"
#include "prion/studies.hpp"

namespace prion {

inline const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"simulate",         "check-hypotheses", "oracle-compare",
                                                "probe-uniqueness", "residuals",        "convergence"};
    return names;
}

struct RunOptions {
    std::uint64_t seed = 7;
    std::size_t threads = 1;
};

enum ExitCode : int { exit_ok = 0, exit_failure = 1, exit_config = 2, exit_aborted = 3 };

namespace detail {

inline bool on_cadence(double t, double every) {
    const double k = std::round(t / every);
    return std::abs(t - k * every) <= 1e-9 * std::max(1.0, t);
}

inline std::vector<std::string> run_simulate(const RunConfig& c, const std::filesystem::path& out) {
    const auto setup = make_setup(c);
    const auto traj = simulate(setup);
    const auto bal = balance_residual(traj);
    std::vector<std::string> cols{"t", "v", "P", "M1"};
    for (double s : c.diagnostics.moment_orders) cols.push_back("M" + format_double(s));
    for (const char* x : {"overflow", "overflow_number", "balance_residual"}) cols.push_back(x);
    std::vector<std::string> files{"moments.csv"};
    {
        CsvWriter csv(out / "moments.csv", cols);
        for (std::size_t k = 0; k < traj.records.size(); ++k) {
            const auto& r = traj.records[k];
            std::vector<double> row{r.t, r.v, r.P, r.M1};
            row.insert(row.end(), r.higher.begin(), r.higher.end());
            row.push_back(r.overflow);
            row.push_back(r.overflow_number);
            row.push_back(bal[k]);
            csv.row(row);
        }
    }
    if (c.diagnostics.snapshots) {
        std::filesystem::create_directories(out / "snapshots");
        std::size_t index = 0;
        for (const auto& s : traj.states) {
            if (!on_cadence(s.t, c.diagnostics.snapshot_every) && &s != &traj.states.back()) continue;
            char name[64];
            std::snprintf(name, sizeof name, "snapshots/u_%05zu.txt", index++);
            write_snapshot(out / name, traj.grid, s.u);
            files.push_back(name);
        }
    }
    return files;
}

inline std::vector<std::string> run_check(const RunConfig& c, const std::filesystem::path& out) {
    const auto reports = audit_hypotheses(make_rates(c));
    Json j;
    j["reports"] = to_json(reports);
    std::size_t failed = 0;
    for (const auto& r : reports) failed += r.status == Status::fail;
    j["failed"] = failed;
    write_json(out / "hypotheses.json", j);
    return {"hypotheses.json"};
}

inline std::vector<std::string> run_oracle(const RunConfig& c, const std::filesystem::path& out) {
    const auto setup = make_setup(c);
    const auto params = moment_params(setup.rates);
    const auto traj = simulate(setup);
    const auto profile = make_initial_profile(c.initial);
    const auto cmp = compare_to_oracle(traj, params, c.v0, profile.integral(c.grid.y0, c.grid.ymax, 0),
                                       profile.integral(c.grid.y0, c.grid.ymax, 1));
    {
        CsvWriter csv(out / "oracle.csv",
                      {"t", "v_sim", "v_ode", "P_sim", "P_ode", "U_sim", "U_ode", "rel_err_v", "rel_err_P", "rel_err_U"});
        auto scale = [](const std::vector<double>& x) {
            double m = 0.0;
            for (double a : x) m = std::max(m, std::abs(a));
            return m > 0.0 ? m : 1.0;
        };
        const double sv = scale(cmp.v_ode), sp = scale(cmp.P_ode), su = scale(cmp.U_ode);
        for (std::size_t k = 0; k < cmp.t.size(); ++k) {
            csv.row({cmp.t[k], cmp.v_sim[k], cmp.v_ode[k], cmp.P_sim[k], cmp.P_ode[k], cmp.U_sim[k], cmp.U_ode[k],
                     std::abs(cmp.v_sim[k] - cmp.v_ode[k]) / sv, std::abs(cmp.P_sim[k] - cmp.P_ode[k]) / sp,
                     std::abs(cmp.U_sim[k] - cmp.U_ode[k]) / su});
        }
    }
    Json j;
    j["err_v"] = cmp.err_v;
    j["err_P"] = cmp.err_P;
    j["err_U"] = cmp.err_U;
    j["overflow_share"] = cmp.overflow_share;
    j["valid"] = cmp.valid;
    write_json(out / "oracle.json", j);
    return {"oracle.csv", "oracle.json"};
}

inline std::vector<std::string> run_probe(const RunConfig& c, const std::filesystem::path& out) {
    const auto setup = make_setup(c);
    const auto bump = make_initial_profile(c.diagnostics.bump).cell_averages(setup.grid);
    const auto rep = uniqueness_probe(setup, bump, c.diagnostics.epsilon, c.diagnostics.alpha);
    {
        CsvWriter csv(out / "probe.csv", {"t", "D", "fitted_bound"});
        for (std::size_t k = 0; k < rep.t.size(); ++k)
            csv.row({rep.t[k], rep.D[k], rep.D.front() * std::exp(rep.c * (rep.t[k] - rep.t.front()))});
    }
    Json j;
    j["epsilon"] = rep.epsilon;
    j["alpha"] = rep.alpha;
    j["c"] = rep.c;
    j["worst_ratio"] = rep.worst_ratio;
    j["holds"] = rep.holds;
    write_json(out / "probe.json", j);
    return {"probe.csv", "probe.json"};
}

inline std::vector<std::string> run_residuals(const RunConfig& c, const std::filesystem::path& out,
                                              const RunOptions& opt) {
    auto setup = make_setup(c);
    const double every = c.time.output_every;
    if (!c.time.cfl) setup.output_every = setup.dt;  // the time integral needs every step
    const auto traj = simulate(setup);
    const auto bal = balance_residual(traj);
    const auto phis = random_test_functions(c.diagnostics.test_functions, c.diagnostics.test_function_knots,
                                            c.grid.y0, c.grid.ymax, opt.seed);
    const auto weak = weak_form_residual(traj, setup.rates, phis);
    std::vector<std::string> cols{"t", "balance_residual"};
    for (std::size_t q = 0; q < phis.size(); ++q) cols.push_back("weak_" + std::to_string(q));
    CsvWriter csv(out / "residuals.csv", cols);
    for (std::size_t k = 0; k < traj.records.size(); ++k) {
        const double t = traj.records[k].t;
        if (!on_cadence(t, every) && k + 1 != traj.records.size()) continue;
        std::vector<double> row{t, bal[k]};
        for (const auto& w : weak) row.push_back(w.relative[k]);
        csv.row(row);
    }
    return {"residuals.csv"};
}

inline std::vector<std::string> run_convergence(const RunConfig& c, const std::filesystem::path& out,
                                                const RunOptions& opt) {
    LadderOptions lo;
    lo.threads = opt.threads;
    lo.seed = opt.seed;
    const auto res = run_ladder(c, lo);
    {
        CsvWriter csv(out / "convergence.csv", {"cells", "h", "dt", "err_v", "err_P", "err_U", "weak_max",
                                                "balance_max", "overflow_share", "cross_grid"});
        for (const auto& r : res.rungs)
            csv.row({static_cast<double>(r.cells), r.h, r.dt, r.err_v, r.err_P, r.err_U, r.weak_max, r.balance_max,
                     r.overflow_share, r.cross_grid});
    }
    Json j;
    auto num = [](double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); };
    j["order_v"] = num(res.order_v);
    j["order_P"] = num(res.order_P);
    j["order_U"] = num(res.order_U);
    j["order_weak"] = num(res.order_weak);
    j["order_cross_grid"] = num(res.order_cross_grid);
    write_json(out / "convergence.json", j);
    return {"convergence.csv", "convergence.json"};
}

inline void write_failure(const std::filesystem::path& out, const std::string& subcommand, const std::string& kind,
                          const std::string& message, const std::vector<std::string>& errors = {},
                          std::optional<double> last_time = {}) {
    Json j;
    j["subcommand"] = subcommand;
    j["kind"] = kind;
    j["message"] = message;
    j["errors"] = errors;
    j["last_valid_time"] = last_time ? Json(*last_time) : Json(nullptr);
    try {
        std::filesystem::create_directories(out);
        write_json(out / "failure.json", j);
    } catch (...) {
        // nothing more can be reported
    }
}

}  // namespace detail

/// Executes one subcommand, writing its artifacts plus manifest.json into
/// out_dir. On failure writes failure.json and returns a nonzero code.
inline int run(const std::string& subcommand, const RunConfig& config, const std::filesystem::path& out_dir,
               const RunOptions& opt = {}) {
    try {
        std::filesystem::create_directories(out_dir);
        std::vector<std::string> files;
        if (subcommand == "simulate") files = detail::run_simulate(config, out_dir);
        else if (subcommand == "check-hypotheses") files = detail::run_check(config, out_dir);
        else if (subcommand == "oracle-compare") files = detail::run_oracle(config, out_dir);
        else if (subcommand == "probe-uniqueness") files = detail::run_probe(config, out_dir);
        else if (subcommand == "residuals") files = detail::run_residuals(config, out_dir, opt);
        else if (subcommand == "convergence") files = detail::run_convergence(config, out_dir, opt);
        else {
            detail::write_failure(out_dir, subcommand, "usage", "unknown subcommand '" + subcommand + "'");
            return exit_config;
        }
        write_json(out_dir / "manifest.json", manifest(config, subcommand, files));
        return exit_ok;
    } catch (const SimulationAborted& e) {
        detail::write_failure(out_dir, subcommand, "aborted", e.what(), {}, e.last_valid.t);
        return exit_aborted;
    } catch (const ConfigError& e) {
        detail::write_failure(out_dir, subcommand, "config", e.what(), e.errors());
        return exit_config;
    } catch (const InvalidParameter& e) {
        detail::write_failure(out_dir, subcommand, "invalid-parameter", e.what());
        return exit_config;
    } catch (const std::exception& e) {
        detail::write_failure(out_dir, subcommand, "error", e.what());
        return exit_failure;
    }
}

}  // namespace prion
