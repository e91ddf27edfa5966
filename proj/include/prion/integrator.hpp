#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "prion/discretization.hpp"
#include "prion/errors.hpp"
#include "prion/grid.hpp"
#include "prion/kernels.hpp"

namespace prion {

/// Running integrals needed by the monomer balance law.
struct Ledger {
    double monomer_integral = 0.0;     // int_0^t v ds
    double degradation_moment = 0.0;   // int_0^t sum y mu n ds
    double overflow = 0.0;             // first moment that left [y0, ymax]
    double overflow_number = 0.0;      // polymers that left [y0, ymax]
};

struct State {
    double t = 0.0;
    double v = 0.0;
    std::vector<double> u;
    Ledger ledger;
};

struct Derivative {
    double dv = 0.0;
    std::vector<double> du;
    Ledger dledger;
    double consumption = 0.0;
    double monomer_return = 0.0;
};

enum class Scheme { rk4, euler };

inline const char* to_string(Scheme s) { return s == Scheme::rk4 ? "rk4" : "euler"; }

/// Requested step exceeds the admissible bound.
class CflViolation : public std::runtime_error {
public:
    CflViolation(double requested, double required)
        : std::runtime_error(message(requested, required)), requested_dt(requested),
          required_dt(required) {}

    double requested_dt;
    double required_dt;

private:
    static std::string message(double requested, double required) {
        std::ostringstream os;
        os.precision(6);
        os << "time step " << requested << " exceeds the admissible bound; need dt <= " << required;
        return os.str();
    }
};

/// Simulation stopped on a non-finite value; carries the last valid state.
class SimulationAborted : public std::runtime_error {
public:
    SimulationAborted(const std::string& what, State last) : std::runtime_error(what), last_valid(std::move(last)) {}
    State last_valid;
};

/// Fraction of the explicit bounds used by the RK4 step.
inline constexpr double kRk4Safety = 0.4;

/// Discretized coupled system on a fixed grid: the three operators plus the
/// monomer equation.
class Model {
public:
    Model(Grid grid, RateSet rates)
        : grid_(std::move(grid)), rates_(std::move(rates)), split_(grid_, rates_),
          join_(grid_, rates_.eta), transport_(grid_, rates_) {}

    const Grid& grid() const { return grid_; }
    const RateSet& rates() const { return rates_; }
    const SplittingOperator& splitting() const { return split_; }
    const JoiningOperator& joining() const { return join_; }
    const TransportOperator& transport() const { return transport_; }

    double first_moment(const std::vector<double>& u) const { return grid_moment(grid_, u, 1.0); }

    Derivative rhs(const State& x) const {
        if (x.v < 0.0) throw ContractViolation("rhs: monomer count must be nonnegative");
        const double m1 = first_moment(x.u);
        const auto tr = transport_.apply(x.u, x.v, m1);
        const auto sp = split_.apply(x.u);
        const auto jn = join_.apply(x.u);
        Derivative d;
        const auto n = grid_.size();
        d.du.resize(n);
        for (std::size_t i = 0; i < n; ++i) d.du[i] = tr.du[i] + sp.du[i] + jn.du[i];
        d.consumption = tr.consumption;
        d.monomer_return = sp.monomer_return;
        d.dv = rates_.lambda - rates_.gamma * x.v - tr.consumption + sp.monomer_return;
        d.dledger.monomer_integral = x.v;
        d.dledger.degradation_moment = sp.mu_loss;
        d.dledger.overflow = tr.overflow + jn.overflow;
        d.dledger.overflow_number = tr.overflow_number + jn.overflow_number;
        return d;
    }

    /// Largest forward-Euler step keeping u and v nonnegative from state x:
    /// dt * (s tau_i / width_i + mu_i + beta_i + 2 sum_j eta_ij n_j) <= 1 in
    /// every cell and dt * (gamma + consumption / v) <= 1 for the monomers.
    double euler_dt_bound(const State& x) const {
        const double m1 = first_moment(x.u);
        const double s = transport_.speed(x.v, m1);
        const auto jl = join_.loss_rates(x.u);
        double rate = 0.0;
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            const double out = s * transport_.edge_tau(i) / grid_.widths()[i];
            rate = std::max(rate, out + split_.loss_rate(i) + jl[i]);
        }
        const double vrate = rates_.gamma + transport_.consumption_per_speed(x.u) / (1.0 + rates_.nu * m1);
        rate = std::max(rate, vrate);
        return rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
    }

    /// Step bound for RK4: 0.4 * min(width / (s tau), 1 / L_max) with L_max
    /// the largest per-cell loss rate (also covering the monomer decay rate).
    double rk4_dt_bound(const State& x) const {
        const double m1 = first_moment(x.u);
        const double s = transport_.speed(x.v, m1);
        const auto jl = join_.loss_rates(x.u);
        double transport_rate = 0.0, loss = 0.0;
        for (std::size_t i = 0; i < grid_.size(); ++i) {
            transport_rate = std::max(transport_rate, s * transport_.edge_tau(i) / grid_.widths()[i]);
            loss = std::max(loss, split_.loss_rate(i) + jl[i]);
        }
        loss = std::max(loss, rates_.gamma + transport_.consumption_per_speed(x.u) / (1.0 + rates_.nu * m1));
        const double inf = std::numeric_limits<double>::infinity();
        const double a = transport_rate > 0.0 ? 1.0 / transport_rate : inf;
        const double b = loss > 0.0 ? 1.0 / loss : inf;
        return kRk4Safety * std::min(a, b);
    }

    double dt_bound(const State& x, Scheme scheme) const {
        return scheme == Scheme::rk4 ? rk4_dt_bound(x) : euler_dt_bound(x);
    }

private:
    Grid grid_;
    RateSet rates_;
    SplittingOperator split_;
    JoiningOperator join_;
    TransportOperator transport_;
};

namespace detail {

inline State advance(const State& x, const Derivative& d, double h) {
    State y;
    y.t = x.t + h;
    y.v = x.v + h * d.dv;
    y.u.resize(x.u.size());
    for (std::size_t i = 0; i < x.u.size(); ++i) y.u[i] = x.u[i] + h * d.du[i];
    y.ledger.monomer_integral = x.ledger.monomer_integral + h * d.dledger.monomer_integral;
    y.ledger.degradation_moment = x.ledger.degradation_moment + h * d.dledger.degradation_moment;
    y.ledger.overflow = x.ledger.overflow + h * d.dledger.overflow;
    y.ledger.overflow_number = x.ledger.overflow_number + h * d.dledger.overflow_number;
    return y;
}

inline bool finite_state(const State& x) {
    if (!std::isfinite(x.v)) return false;
    for (double a : x.u)
        if (!std::isfinite(a)) return false;
    return std::isfinite(x.ledger.overflow) && std::isfinite(x.ledger.degradation_moment);
}

}  // namespace detail

/// One explicit step. The ledger is advanced by the same Runge-Kutta stages
/// as the state, so linear invariants of the spatial scheme carry over.
/// Throws CflViolation when dt exceeds the scheme's bound.
inline State step_unchecked(const Model& model, const State& x, double dt, Scheme scheme) {
    const auto k1 = model.rhs(x);
    if (scheme == Scheme::euler) return detail::advance(x, k1, dt);
    const auto x2 = detail::advance(x, k1, 0.5 * dt);
    const auto k2 = model.rhs(x2);
    const auto x3 = detail::advance(x, k2, 0.5 * dt);
    const auto k3 = model.rhs(x3);
    const auto x4 = detail::advance(x, k3, dt);
    const auto k4 = model.rhs(x4);
    Derivative d;
    d.du.resize(x.u.size());
    auto comb = [](double a, double b, double c, double e) { return (a + 2.0 * b + 2.0 * c + e) / 6.0; };
    d.dv = comb(k1.dv, k2.dv, k3.dv, k4.dv);
    for (std::size_t i = 0; i < d.du.size(); ++i) d.du[i] = comb(k1.du[i], k2.du[i], k3.du[i], k4.du[i]);
    d.dledger.monomer_integral = comb(k1.dledger.monomer_integral, k2.dledger.monomer_integral,
                                      k3.dledger.monomer_integral, k4.dledger.monomer_integral);
    d.dledger.degradation_moment = comb(k1.dledger.degradation_moment, k2.dledger.degradation_moment,
                                        k3.dledger.degradation_moment, k4.dledger.degradation_moment);
    d.dledger.overflow =
        comb(k1.dledger.overflow, k2.dledger.overflow, k3.dledger.overflow, k4.dledger.overflow);
    d.dledger.overflow_number = comb(k1.dledger.overflow_number, k2.dledger.overflow_number,
                                     k3.dledger.overflow_number, k4.dledger.overflow_number);
    return detail::advance(x, d, dt);
}

inline State step(const Model& model, const State& x, double dt, Scheme scheme) {
    if (!(dt > 0.0)) throw ContractViolation("step: dt must be > 0");
    const double bound = model.dt_bound(x, scheme);
    if (dt > bound) throw CflViolation(dt, bound);
    return step_unchecked(model, x, dt, scheme);
}

struct MomentRecord {
    double t = 0.0;
    double v = 0.0;
    double P = 0.0;
    double M1 = 0.0;
    std::vector<double> higher;
    double overflow = 0.0;
    double overflow_number = 0.0;
    double monomer_integral = 0.0;
    double degradation_moment = 0.0;
};

struct Trajectory {
    Grid grid;
    double lambda = 0.0;
    double gamma = 0.0;
    std::vector<double> moment_orders;
    std::vector<State> states;  // empty when snapshots were not kept
    std::vector<MomentRecord> records;
};

inline MomentRecord record_of(const Grid& g, const State& x, const std::vector<double>& orders) {
    MomentRecord r;
    r.t = x.t;
    r.v = x.v;
    r.P = grid_moment(g, x.u, 0.0);
    r.M1 = grid_moment(g, x.u, 1.0);
    for (double s : orders) r.higher.push_back(grid_moment(g, x.u, s));
    r.overflow = x.ledger.overflow;
    r.overflow_number = x.ledger.overflow_number;
    r.monomer_integral = x.ledger.monomer_integral;
    r.degradation_moment = x.ledger.degradation_moment;
    return r;
}

struct SimulationSetup {
    Grid grid;
    RateSet rates;
    double v0 = 1.0;
    std::vector<double> u0;
    double T = 1.0;
    double dt = 1e-3;
    /// When set, dt is chosen each step as cfl * bound (clipped to output times).
    std::optional<double> cfl;
    Scheme scheme = Scheme::rk4;
    double output_every = 0.1;
    std::vector<double> moment_orders;
    bool keep_states = true;
};

/// Integrates the setup from t = 0 to T. With a fixed step, times are
/// computed as (step count) * dt, so outputs at shared times do not depend on
/// the output cadence.
inline Trajectory simulate(const SimulationSetup& cfg) {
    if (!(cfg.T > 0.0)) throw InvalidParameter("simulate: horizon T must be > 0");
    if (!(cfg.output_every > 0.0)) throw InvalidParameter("simulate: output cadence must be > 0");
    if (!(cfg.v0 >= 0.0)) throw InvalidParameter("simulate: v0 must be >= 0");
    if (cfg.u0.size() != cfg.grid.size()) throw InvalidParameter("simulate: initial data does not match grid");
    const Model model(cfg.grid, cfg.rates);
    Trajectory traj;
    traj.grid = cfg.grid;
    traj.lambda = cfg.rates.lambda;
    traj.gamma = cfg.rates.gamma;
    traj.moment_orders = cfg.moment_orders;

    State x;
    x.v = cfg.v0;
    x.u = cfg.u0;
    auto emit = [&](const State& s) {
        traj.records.push_back(record_of(cfg.grid, s, cfg.moment_orders));
        if (cfg.keep_states) traj.states.push_back(s);
    };
    emit(x);

    auto checked_step = [&](double h) {
        State next = step(model, x, h, cfg.scheme);
        if (!detail::finite_state(next)) {
            std::ostringstream os;
            os << "non-finite state after step to t = " << next.t;
            throw SimulationAborted(os.str(), x);
        }
        return next;
    };

    if (!cfg.cfl) {
        if (!(cfg.dt > 0.0)) throw InvalidParameter("simulate: dt must be > 0");
        const double per_output = cfg.output_every / cfg.dt;
        const auto steps_per_output = static_cast<long long>(std::llround(per_output));
        if (steps_per_output < 1 || std::abs(per_output - static_cast<double>(steps_per_output)) > 1e-9 * per_output)
            throw InvalidParameter("simulate: output cadence must be an integer multiple of dt");
        const auto total = static_cast<long long>(std::llround(cfg.T / cfg.dt));
        if (std::abs(cfg.T / cfg.dt - static_cast<double>(total)) > 1e-9 * static_cast<double>(total))
            throw InvalidParameter("simulate: horizon T must be an integer multiple of dt");
        for (long long k = 1; k <= total; ++k) {
            x = checked_step(cfg.dt);
            x.t = static_cast<double>(k) * cfg.dt;
            if (k % steps_per_output == 0 || k == total) emit(x);
        }
    } else {
        const double cfl = *cfg.cfl;
        if (!(cfl > 0.0 && cfl <= 1.0)) throw InvalidParameter("simulate: cfl factor must lie in (0, 1]");
        long long out_index = 1;
        while (x.t < cfg.T) {
            const double next_out = std::min(cfg.T, static_cast<double>(out_index) * cfg.output_every);
            const double bound = model.dt_bound(x, cfg.scheme);
            double h = std::min(cfl * bound, next_out - x.t);
            const bool hits = h >= next_out - x.t;
            x = checked_step(h);
            if (hits) {
                x.t = next_out;
                emit(x);
                ++out_index;
            }
        }
    }
    return traj;
}

/// Normalized residual of the monomer balance law at every output time:
/// |v + M1 + overflow - v0 - M1(0) - (lambda t - gamma int v - int sum y mu n)|
/// divided by v0 + M1(0) + lambda t.
inline std::vector<double> balance_residual(const Trajectory& traj) {
    std::vector<double> out;
    if (traj.records.empty()) return out;
    const auto& r0 = traj.records.front();
    const double base = r0.v + r0.M1;
    for (const auto& r : traj.records) {
        const double lhs = (r.v + r.M1 + r.overflow) - base;
        const double rhs = traj.lambda * r.t - traj.gamma * r.monomer_integral - r.degradation_moment;
        const double scale = base + traj.lambda * r.t;
        out.push_back(scale > 0.0 ? std::abs(lhs - rhs) / scale : std::abs(lhs - rhs));
    }
    return out;
}

/// Largest share of the (augmented) first moment booked as overflow.
inline double overflow_share(const Trajectory& traj) {
    double worst = 0.0;
    for (const auto& r : traj.records) {
        const double total = r.M1 + r.overflow;
        if (total > 0.0) worst = std::max(worst, r.overflow / total);
    }
    return worst;
}

}  // namespace prion
