#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "prion/errors.hpp"
#include "prion/grid.hpp"
#include "prion/hypothesis.hpp"
#include "prion/integrator.hpp"
#include "prion/kernels.hpp"
#include "prion/quadrature.hpp"

namespace prion {

/// E at the cell edges: E_k = sum_{i >= k} (u1 - u2)_i width_i + tail, where
/// tail is the difference of whatever left the domain (0 when E(ymax) should
/// vanish). E_0 is the difference of the total polymer numbers.
inline std::vector<double> tail_primitive(const std::vector<double>& u1, const std::vector<double>& u2,
                                          const Grid& grid, double tail = 0.0) {
    if (u1.size() != grid.size() || u2.size() != grid.size())
        throw InvalidParameter("tail_primitive: densities do not match the grid");
    const auto n = grid.size();
    const auto& w = grid.widths();
    std::vector<double> e(n + 1);
    e[n] = tail;
    double acc = tail;
    for (std::size_t k = n; k-- > 0;) {
        acc += (u1[k] - u2[k]) * w[k];
        e[k] = acc;
    }
    return e;
}

/// Edge-midpoint quadrature of int g |E| dy.
inline double weighted_distance(const std::vector<double>& E, const Grid& grid, const WeightFunction& g) {
    if (E.size() != grid.size() + 1) throw InvalidParameter("weighted_distance: E must live on the edges");
    double s = 0.0;
    const auto& y = grid.centers();
    const auto& w = grid.widths();
    for (std::size_t i = 0; i < grid.size(); ++i) s += g.g(y[i]) * std::abs(0.5 * (E[i] + E[i + 1])) * w[i];
    return s;
}

/// int E dy without the absolute value; exact for cell-averaged data.
inline double signed_integral(const std::vector<double>& E, const Grid& grid) {
    double s = 0.0;
    const auto& w = grid.widths();
    for (std::size_t i = 0; i < grid.size(); ++i) s += 0.5 * (E[i] + E[i + 1]) * w[i];
    return s;
}

/// Conservative restriction of cell averages from `fine` to `coarse`: the
/// polymer number in every coarse cell is the sum over the fine cells it
/// contains. Every coarse edge must also be a fine edge.
inline std::vector<double> restrict_to_coarse(const std::vector<double>& u, const Grid& fine, const Grid& coarse) {
    if (u.size() != fine.size()) throw InvalidParameter("restrict_to_coarse: density does not match the grid");
    const auto& fe = fine.edges();
    const auto& ce = coarse.edges();
    std::vector<double> out(coarse.size(), 0.0);
    std::size_t j = 0;
    for (std::size_t k = 0; k < coarse.size(); ++k) {
        const double lo = ce[k], hi = ce[k + 1];
        const double tol = 1e-12 * std::max(1.0, std::abs(hi));
        if (std::abs(fe[j] - lo) > tol) throw InvalidParameter("restrict_to_coarse: grids are not nested");
        double n = 0.0;
        while (j < fine.size() && fe[j + 1] <= hi + tol) {
            n += u[j] * fine.widths()[j];
            ++j;
        }
        if (std::abs(fe[j] - hi) > tol) throw InvalidParameter("restrict_to_coarse: grids are not nested");
        out[k] = n / coarse.widths()[k];
    }
    return out;
}

/// Continuous piecewise-linear function through (knots, values), constant
/// beyond the outer knots.
class PiecewiseLinear {
public:
    PiecewiseLinear(std::vector<double> knots, std::vector<double> values)
        : x_(std::move(knots)), v_(std::move(values)) {
        if (x_.empty() || x_.size() != v_.size()) throw InvalidParameter("piecewise-linear: knot/value mismatch");
        for (std::size_t k = 1; k < x_.size(); ++k)
            if (!(x_[k] > x_[k - 1])) throw InvalidParameter("piecewise-linear: knots must increase");
    }

    static PiecewiseLinear constant(double c) { return PiecewiseLinear({0.0}, {c}); }

    double operator()(double y) const {
        if (y <= x_.front()) return v_.front();
        if (y >= x_.back()) return v_.back();
        const auto k = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), y) - x_.begin()) - 1;
        const double t = (y - x_[k]) / (x_[k + 1] - x_[k]);
        return v_[k] + t * (v_[k + 1] - v_[k]);
    }

    /// Right derivative.
    double slope(double y) const {
        if (y < x_.front() || y >= x_.back()) return 0.0;
        const auto k = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), y) - x_.begin()) - 1;
        return (v_[k + 1] - v_[k]) / (x_[k + 1] - x_[k]);
    }

    double sup_norm() const {
        double m = 0.0;
        for (double v : v_) m = std::max(m, std::abs(v));
        return m;
    }

    const std::vector<double>& knots() const { return x_; }

private:
    std::vector<double> x_;
    std::vector<double> v_;
};

/// count random test functions with `knots` knots drawn uniformly in
/// [lo, hi] and values uniform in [-1, 1].
inline std::vector<PiecewiseLinear> random_test_functions(std::size_t count, std::size_t knots, double lo,
                                                          double hi, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<PiecewiseLinear> out;
    for (std::size_t q = 0; q < count; ++q) {
        std::vector<double> x, v;
        for (std::size_t k = 0; k < knots; ++k) {
            x.push_back(lo + (hi - lo) * unit(rng));
            v.push_back(2.0 * unit(rng) - 1.0);
        }
        std::sort(x.begin(), x.end());
        out.emplace_back(std::move(x), std::move(v));
    }
    return out;
}

struct WeakResidual {
    std::vector<double> t;
    std::vector<double> absolute;
    /// absolute / (sup |phi| * max_t P)
    std::vector<double> relative;

    double max_relative() const {
        double m = 0.0;
        for (double r : relative) m = std::max(m, r);
        return m;
    }
};

/// Evaluates the weak formulation tested with each phi along the stored
/// states: sum phi(y_i) n_i(t) - sum phi(y_i) n_i(0) against the trapezoid
/// time integral of
///   s sum tau phi' n - sum (mu + beta) phi n + sum_j beta_j n_j 2 int phi kappa
///   + sum_ij eta n_i n_j (phi(y_i + y_j) - phi(y_i) - phi(y_j)).
/// The terms use the continuum formulas at the pivots, not the scheme's
/// discrete operators, so the residual measures the discretization error.
inline std::vector<WeakResidual> weak_form_residual(const Trajectory& traj, const RateSet& rates,
                                                    const std::vector<PiecewiseLinear>& phis) {
    const auto& grid = traj.grid;
    if (traj.states.size() != traj.records.size() || traj.states.empty())
        throw InvalidParameter("weak_form_residual: trajectory keeps no state snapshots");
    const auto n = grid.size();
    const auto& y = grid.centers();
    const auto& w = grid.widths();
    const double y0 = rates.y0;
    const bool uniform = grid.mode() == GridMode::uniform;

    std::vector<double> tau(n), loss(n), beta(n);
    for (std::size_t i = 0; i < n; ++i) {
        tau[i] = rates.tau(y[i]);
        beta[i] = rates.beta(y[i]);
        loss[i] = rates.mu(y[i]) + beta[i];
    }
    std::vector<double> eta;
    const bool eta_const = rates.eta.is_constant();
    if (!eta_const) {
        eta.resize(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) eta[i * n + j] = rates.eta(y[i], y[j]);
    }
    auto eta_at = [&](std::size_t i, std::size_t j) { return eta_const ? rates.eta.coefficient() : eta[i * n + j]; };

    struct PhiData {
        std::vector<double> at, slope, split, at_sum;
    };
    std::vector<PhiData> data(phis.size());
    const std::size_t sums = uniform ? 2 * n - 1 : 0;
    const double h = w.front();
    for (std::size_t p = 0; p < phis.size(); ++p) {
        const auto& phi = phis[p];
        auto& d = data[p];
        d.at.resize(n);
        d.slope.resize(n);
        d.split.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            d.at[i] = phi(y[i]);
            d.slope[i] = phi.slope(y[i]);
            // 2 int_{y0}^{y_i} phi(z) kappa(z, y_i) dz, split at the knots of phi
            std::vector<double> cuts{y0};
            for (double k : phi.knots())
                if (k > y0 && k < y[i]) cuts.push_back(k);
            cuts.push_back(y[i]);
            double s = 0.0;
            for (std::size_t c = 0; c + 1 < cuts.size(); ++c)
                s += quad::integrate([&](double z) { return phi(z) * rates.k0(z / y[i]) / y[i]; }, cuts[c],
                                     cuts[c + 1], 2);
            d.split[i] = 2.0 * s;
        }
        if (uniform) {
            d.at_sum.resize(sums);
            for (std::size_t m = 0; m < sums; ++m) d.at_sum[m] = phi(2.0 * y0 + h * static_cast<double>(m + 1));
        }
    }

    const auto steps = traj.states.size();
    std::vector<std::vector<double>> value(phis.size(), std::vector<double>(steps));
    std::vector<std::vector<double>> rate(phis.size(), std::vector<double>(steps));
    std::vector<double> P(steps);
    std::vector<double> a(n), pair(sums);
    for (std::size_t k = 0; k < steps; ++k) {
        const auto& st = traj.states[k];
        for (std::size_t i = 0; i < n; ++i) a[i] = st.u[i] * w[i];
        double total = 0.0, m1 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            total += a[i];
            m1 += y[i] * a[i];
        }
        P[k] = total;
        const double s = st.v / (1.0 + rates.nu * m1);
        // weighted partner sums r_i = sum_j eta_ij n_j and, on uniform grids,
        // the joining intensity grouped by i + j
        std::vector<double> partner(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (eta_const) {
                partner[i] = rates.eta.coefficient() * total;
            } else {
                double r = 0.0;
                for (std::size_t j = 0; j < n; ++j) r += eta[i * n + j] * a[j];
                partner[i] = r;
            }
        }
        if (uniform) {
            std::fill(pair.begin(), pair.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                if (a[i] == 0.0) continue;
                for (std::size_t j = 0; j < n; ++j) pair[i + j] += eta_at(i, j) * a[i] * a[j];
            }
        }
        for (std::size_t p = 0; p < phis.size(); ++p) {
            const auto& d = data[p];
            double val = 0.0, r = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                val += d.at[i] * a[i];
                r += s * tau[i] * d.slope[i] * a[i] - loss[i] * d.at[i] * a[i] + beta[i] * a[i] * d.split[i] -
                     2.0 * d.at[i] * a[i] * partner[i];
            }
            if (uniform) {
                for (std::size_t m = 0; m < sums; ++m) r += pair[m] * d.at_sum[m];
            } else {
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j) r += eta_at(i, j) * a[i] * a[j] * phis[p](y[i] + y[j]);
            }
            value[p][k] = val;
            rate[p][k] = r;
        }
    }
    const double pmax = *std::max_element(P.begin(), P.end());
    std::vector<WeakResidual> out(phis.size());
    for (std::size_t p = 0; p < phis.size(); ++p) {
        auto& res = out[p];
        const double scale = phis[p].sup_norm() * pmax;
        double integral = 0.0;
        for (std::size_t k = 0; k < steps; ++k) {
            if (k > 0) integral += 0.5 * (traj.states[k].t - traj.states[k - 1].t) * (rate[p][k] + rate[p][k - 1]);
            const double r = std::abs(value[p][k] - value[p][0] - integral);
            res.t.push_back(traj.states[k].t);
            res.absolute.push_back(r);
            res.relative.push_back(scale > 0.0 ? r / scale : r);
        }
    }
    return out;
}

inline WeakResidual weak_form_residual(const Trajectory& traj, const RateSet& rates, const PiecewiseLinear& phi) {
    return weak_form_residual(traj, rates, std::vector<PiecewiseLinear>{phi}).front();
}

/// Distance D = int g |E| between two trajectories at every shared output time.
/// The overflow difference closes E at ymax.
inline std::vector<double> distance_series(const Trajectory& a, const Trajectory& b, const WeightFunction& g) {
    if (!a.grid.same_as(b.grid)) throw InvalidParameter("distance_series: trajectories live on different grids");
    if (a.states.size() != b.states.size()) throw InvalidParameter("distance_series: output times differ");
    std::vector<double> d;
    for (std::size_t k = 0; k < a.states.size(); ++k) {
        const auto& sa = a.states[k];
        const auto& sb = b.states[k];
        const double tail = sa.ledger.overflow_number - sb.ledger.overflow_number;
        d.push_back(weighted_distance(tail_primitive(sa.u, sb.u, a.grid, tail), a.grid, g));
    }
    return d;
}

struct ProbeReport {
    double epsilon = 0.0;
    double alpha = 1.0;
    std::vector<double> t;
    std::vector<double> D;
    /// Fitted rate in log D(t) = log D(0) + c t.
    double c = 0.0;
    /// max_t D(t) / (D(0) e^{ct})
    double worst_ratio = 0.0;
    /// D(t) <= (1 + tolerance) D(0) e^{ct} at every output time.
    bool holds = false;
};

inline constexpr double kProbeTolerance = 0.05;

/// Least-squares slope of log(D/D0) against t with the intercept pinned at 0.
inline double fit_growth_rate(const std::vector<double>& t, const std::vector<double>& D) {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 1; k < t.size(); ++k) {
        if (!(D[k] > 0.0)) continue;
        const double dt = t[k] - t[0];
        num += dt * std::log(D[k] / D[0]);
        den += dt * dt;
    }
    return den > 0.0 ? num / den : 0.0;
}

/// Runs the setup from u0 and from u0 + epsilon * bump and tracks the
/// weighted tail distance with g = y^{max(alpha,1) - 1}.
inline ProbeReport uniqueness_probe(const SimulationSetup& base, const std::vector<double>& bump, double epsilon,
                                    double alpha) {
    if (epsilon == 0.0) throw InvalidParameter("uniqueness_probe: epsilon = 0 gives identical runs");
    if (bump.size() != base.grid.size()) throw InvalidParameter("uniqueness_probe: bump does not match the grid");
    SimulationSetup a = base, b = base;
    a.keep_states = b.keep_states = true;
    for (std::size_t i = 0; i < bump.size(); ++i) b.u0[i] += epsilon * bump[i];
    for (double x : b.u0)
        if (x < 0.0) throw InvalidParameter("uniqueness_probe: perturbed initial data is negative");
    const auto ta = simulate(a);
    const auto tb = simulate(b);
    ProbeReport rep;
    rep.epsilon = epsilon;
    rep.alpha = alpha;
    rep.D = distance_series(ta, tb, WeightFunction::for_alpha(alpha, base.grid.y0()));
    for (const auto& s : ta.states) rep.t.push_back(s.t);
    if (!(rep.D.front() > 0.0)) throw InvalidParameter("uniqueness_probe: bump has zero distance");
    rep.c = fit_growth_rate(rep.t, rep.D);
    for (std::size_t k = 0; k < rep.t.size(); ++k) {
        const double bound = rep.D.front() * std::exp(rep.c * (rep.t[k] - rep.t.front()));
        rep.worst_ratio = std::max(rep.worst_ratio, rep.D[k] / bound);
    }
    rep.holds = rep.worst_ratio <= 1.0 + kProbeTolerance;
    return rep;
}

/// Distance at the final time between a run on `coarse` and the same run on
/// `fine`, after restricting the fine density to the coarse cells.
inline double cross_grid_distance(const Trajectory& coarse, const Trajectory& fine, const WeightFunction& g) {
    if (coarse.states.empty() || fine.states.empty())
        throw InvalidParameter("cross_grid_distance: trajectories keep no state snapshots");
    const auto& sc = coarse.states.back();
    const auto& sf = fine.states.back();
    const auto uf = restrict_to_coarse(sf.u, fine.grid, coarse.grid);
    const double tail = sc.ledger.overflow_number - sf.ledger.overflow_number;
    return weighted_distance(tail_primitive(sc.u, uf, coarse.grid, tail), coarse.grid, g);
}

}  // namespace prion
