#pragma once

#include <array>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "prion/errors.hpp"
#include "prion/integrator.hpp"
#include "prion/kernels.hpp"

namespace prion {

/// Scalars of the rate family with closed moments: constant tau, mu and eta,
/// beta(y) = beta_coef * y and kappa(z, y) = 1 / y.
struct MomentOdeParams {
    double lambda = 0.0;
    double gamma = 0.0;
    double nu = 0.0;
    double y0 = 1.0;
    double tau_const = 0.0;
    double mu_const = 0.0;
    double beta_coef = 0.0;
    double eta_const = 0.0;

    bool operator==(const MomentOdeParams&) const = default;
};

inline void validate(const MomentOdeParams& p) {
    std::vector<std::string> bad;
    if (!(p.y0 > 0.0)) bad.push_back("y0 must be > 0");
    const std::array<std::pair<const char*, double>, 7> fields{{{"lambda", p.lambda},
                                                                {"gamma", p.gamma},
                                                                {"nu", p.nu},
                                                                {"tau", p.tau_const},
                                                                {"mu", p.mu_const},
                                                                {"beta", p.beta_coef},
                                                                {"eta", p.eta_const}}};
    for (const auto& [name, v] : fields)
        if (!(v >= 0.0)) bad.push_back(std::string(name) + " must be >= 0");
    if (!bad.empty()) {
        std::string msg = "moment ODE parameters:";
        for (const auto& b : bad) msg += " " + b + ";";
        throw InvalidParameter(msg);
    }
}

/// Extracts the moment-ODE scalars from a rate set; throws when the rates do
/// not belong to the closed family.
inline MomentOdeParams moment_params(const RateSet& r) {
    if (!has_closed_moments(r))
        throw InvalidParameter("moments close only for constant tau, mu, eta, linear beta and k0 = 1");
    const auto& p = *r.power_law;
    MomentOdeParams m;
    m.lambda = r.lambda;
    m.gamma = r.gamma;
    m.nu = r.nu;
    m.y0 = r.y0;
    m.tau_const = p.S;
    m.mu_const = p.M;
    m.beta_coef = p.B;
    m.eta_const = p.eta_const;
    return m;
}

struct MomentRhs {
    double dv = 0.0;
    double dP = 0.0;
    double dU = 0.0;
};

/// Right-hand side for (v, P = int u, U = int y u). Obtained by testing the
/// weak formulation with phi = 1 and phi = y.
inline MomentRhs closed_moment_rhs(double v, double P, double U, const MomentOdeParams& p) {
    const double attach = v * p.tau_const * P / (1.0 + p.nu * U);
    const double returned = p.beta_coef * p.y0 * p.y0 * P;
    MomentRhs r;
    r.dP = -p.mu_const * P + p.beta_coef * (U - 2.0 * p.y0 * P) - p.eta_const * P * P;
    r.dU = attach - p.mu_const * U - returned;
    r.dv = p.lambda - p.gamma * v - attach + returned;
    return r;
}

struct MomentSample {
    double t = 0.0;
    double v = 0.0;
    double P = 0.0;
    double U = 0.0;
};

struct MomentSeries {
    MomentOdeParams params;
    std::vector<MomentSample> samples;
    /// Set when P became negative somewhere along the solution.
    bool negative_P = false;
};

/// Integrates the moment system with an adaptive Dormand-Prince 5(4) pair
/// and dense output, sampling at the requested times (sorted, >= 0).
inline MomentSeries solve_moment_ode(const MomentOdeParams& params, double v0, double P0, double U0,
                                     const std::vector<double>& times, double tol = 1e-10) {
    namespace ode = boost::numeric::odeint;
    validate(params);
    if (!(v0 >= 0.0 && P0 >= 0.0 && U0 >= 0.0))
        throw InvalidParameter("solve_moment_ode: initial moments must be >= 0");
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (!(times[k] >= 0.0) || (k > 0 && !(times[k] > times[k - 1])))
            throw InvalidParameter("solve_moment_ode: output times must be >= 0 and increasing");
    }
    using Vec = std::array<double, 3>;
    MomentSeries out;
    out.params = params;
    auto sys = [&params](const Vec& x, Vec& dx, double) {
        const auto r = closed_moment_rhs(x[0], x[1], x[2], params);
        dx = {r.dv, r.dP, r.dU};
    };
    Vec x{v0, P0, U0};
    std::vector<double> ts;
    if (times.empty() || times.front() > 0.0) ts.push_back(0.0);
    ts.insert(ts.end(), times.begin(), times.end());
    const bool skip_first = ts.size() > times.size();
    auto stepper = ode::make_dense_output(tol * 1e-3, tol, ode::runge_kutta_dopri5<Vec>());
    std::size_t idx = 0;
    auto observe = [&](const Vec& s, double t) {
        if (!(skip_first && idx == 0)) out.samples.push_back({t, s[0], s[1], s[2]});
        if (s[1] < 0.0) out.negative_P = true;
        ++idx;
    };
    try {
        ode::integrate_times(stepper, sys, x, ts.begin(), ts.end(), 1e-4, observe,
                             ode::max_step_checker(1000000));
    } catch (const ode::step_adjustment_error& e) {
        throw std::runtime_error(std::string("moment ODE step size underflow: ") + e.what());
    } catch (const ode::no_progress_error& e) {
        throw std::runtime_error(std::string("moment ODE made no progress: ") + e.what());
    }
    return out;
}

struct OracleComparison {
    std::vector<double> t;
    std::vector<double> v_sim, v_ode;
    std::vector<double> P_sim, P_ode;
    std::vector<double> U_sim, U_ode;
    double err_v = 0.0;
    double err_P = 0.0;
    double err_U = 0.0;
    double overflow_share = 0.0;
    /// Comparison is graded valid when the overflow share is at most 0.1%.
    bool valid = false;

    double max_error() const { return std::max(err_v, std::max(err_P, err_U)); }
};

inline constexpr double kMaxOverflowShare = 1e-3;

namespace detail {
inline double relative_sup(const std::vector<double>& a, const std::vector<double>& b) {
    double diff = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        diff = std::max(diff, std::abs(a[k] - b[k]));
        scale = std::max(scale, std::abs(b[k]));
    }
    return scale > 0.0 ? diff / scale : diff;
}
}  // namespace detail

/// Relative sup-norm errors of the simulated (v, P, U) against the moment
/// ODE, with the simulated U and P augmented by what left the domain. The
/// series must be sampled at the trajectory's output times; a mismatch of
/// parameters or times throws.
inline OracleComparison compare_to_simulation(const Trajectory& traj, const MomentOdeParams& sim_params,
                                              const MomentSeries& series) {
    if (!(sim_params == series.params)) {
        std::ostringstream os;
        os << "oracle comparison: configuration mismatch (simulation nu = " << sim_params.nu
           << ", oracle nu = " << series.params.nu << ", or other parameters differ)";
        throw InvalidParameter(os.str());
    }
    if (series.samples.size() != traj.records.size())
        throw InvalidParameter("oracle comparison: sample counts differ");
    OracleComparison c;
    for (std::size_t k = 0; k < traj.records.size(); ++k) {
        const auto& r = traj.records[k];
        const auto& s = series.samples[k];
        if (std::abs(r.t - s.t) > 1e-12 * std::max(1.0, r.t))
            throw InvalidParameter("oracle comparison: output times differ");
        c.t.push_back(r.t);
        c.v_sim.push_back(r.v);
        c.P_sim.push_back(r.P + r.overflow_number);
        c.U_sim.push_back(r.M1 + r.overflow);
        c.v_ode.push_back(s.v);
        c.P_ode.push_back(s.P);
        c.U_ode.push_back(s.U);
    }
    c.err_v = detail::relative_sup(c.v_sim, c.v_ode);
    c.err_P = detail::relative_sup(c.P_sim, c.P_ode);
    c.err_U = detail::relative_sup(c.U_sim, c.U_ode);
    c.overflow_share = overflow_share(traj);
    c.valid = c.overflow_share <= kMaxOverflowShare;
    return c;
}

/// Solves the moment ODE from the trajectory's first record and compares.
inline OracleComparison compare_to_oracle(const Trajectory& traj, const MomentOdeParams& params,
                                          double v0, double P0, double U0, double tol = 1e-10) {
    std::vector<double> ts;
    for (const auto& r : traj.records) ts.push_back(r.t);
    return compare_to_simulation(traj, params, solve_moment_ode(params, v0, P0, U0, ts, tol));
}

}  // namespace prion
