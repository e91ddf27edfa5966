#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "prion/errors.hpp"
#include "prion/kernels.hpp"
#include "prion/quadrature.hpp"
#include "prion/report.hpp"

namespace prion {

/// Positive weight g on (y0, inf) together with its primitive
/// G(y) = int_{y0}^y g. Power weights g(y) = y^p carry closed forms.
class WeightFunction {
public:
    static WeightFunction power(double p, double y0) {
        WeightFunction w;
        w.power_ = true;
        w.p_ = p;
        w.y0_ = y0;
        return w;
    }

    static WeightFunction custom(ScalarFn g, double y0) {
        WeightFunction w;
        w.power_ = false;
        w.fn_ = std::move(g);
        w.y0_ = y0;
        return w;
    }

    /// g(y) = y^{max(alpha, 1) - 1}
    static WeightFunction for_alpha(double alpha, double y0) {
        return power(std::max(alpha, 1.0) - 1.0, y0);
    }

    double g(double y) const { return power_ ? (p_ == 0.0 ? 1.0 : std::pow(y, p_)) : fn_(y); }

    double dg(double y) const {
        if (power_) return p_ == 0.0 ? 0.0 : p_ * std::pow(y, p_ - 1.0);
        return central_difference(fn_, y);
    }

    double G(double y) const {
        if (y <= y0_) return 0.0;
        if (power_) {
            if (p_ == 0.0) return y - y0_;
            return (std::pow(y, p_ + 1.0) - std::pow(y0_, p_ + 1.0)) / (p_ + 1.0);
        }
        const double span = std::log(y / y0_);
        const auto panels = static_cast<std::size_t>(std::clamp(span * 8.0, 4.0, 400.0));
        return quad::integrate(fn_, y0_, y, panels);
    }

    bool is_power() const { return power_; }
    double exponent() const { return p_; }
    double y0() const { return y0_; }

private:
    bool power_ = true;
    double p_ = 0.0;
    double y0_ = 1.0;
    ScalarFn fn_;
};

/// Geometric sample grid y0 * rho^k, k = 0..points-1, ending at
/// y0 * span_factor. Suprema over the unbounded size range are estimated on
/// this grid; the "inner" part (sizes up to a tenth of the top) feeds the
/// divergence trend test.
struct SampleGrid {
    double y0 = 1.0;
    double span_factor = 1e6;
    std::size_t points = 200;

    std::vector<double> values() const {
        std::vector<double> ys(points);
        const double last = static_cast<double>(points - 1);
        for (std::size_t k = 0; k < points; ++k)
            ys[k] = y0 * std::pow(span_factor, static_cast<double>(k) / last);
        ys.back() = y0 * span_factor;
        return ys;
    }

    double inner_limit() const { return 0.1 * y0 * span_factor; }
};

/// Ratio of the full-grid supremum to the inner-grid supremum above which a
/// supremum estimate is treated as divergent.
inline constexpr double kDivergenceRatio = 1.05;

namespace detail {

struct Extremum {
    double value = -std::numeric_limits<double>::infinity();
    double inner = -std::numeric_limits<double>::infinity();
    std::map<std::string, double> at;
    bool finite = true;
    bool any = false;

    void offer(double v, bool in_inner, std::map<std::string, double> point) {
        any = true;
        if (!std::isfinite(v)) {
            if (finite) at = std::move(point);
            finite = false;
            return;
        }
        if (in_inner) inner = std::max(inner, v);
        if (v > value) {
            value = v;
            if (finite) at = std::move(point);
        }
    }

    bool divergent() const {
        if (!finite) return true;
        if (!any || value <= 0.0) return false;
        if (!(inner > 0.0)) return true;
        return value > kDivergenceRatio * inner;
    }
};

inline Status grade(const Extremum& e) { return e.divergent() ? Status::fail : Status::pass; }

inline void fill(HypothesisReport& rep, const std::string& constant, const Extremum& e) {
    rep.constants[constant] =
        e.finite ? std::max(e.value, 0.0) : std::numeric_limits<double>::infinity();
    rep.witness = e.at;
    rep.status = grade(e);
    if (!e.finite)
        rep.note = "non-finite value on the sample grid";
    else if (rep.status == Status::fail)
        rep.note = "supremum grows across the last decade of samples";
}

/// Splitting flux derivative d/dy [ beta(y) int_{ys}^y kappa(z,y) dz ] for
/// profile kernels.
inline double fragment_flux_derivative(const RateSet& r, double ys, double y) {
    const double x = ys / y;
    return r.beta.derivative(y) * (1.0 - r.k0.cumulative(x)) + r.beta(y) * r.k0(x) * x / y;
}

/// beta(y) int_0^{y0} z kappa(z, y) dz for profile kernels.
inline double subcritical_fragment_flux(const RateSet& r, double y) {
    return r.beta(y) * y * r.k0.first_moment(r.y0 / y);
}

}  // namespace detail

struct XiAlphaResult {
    std::vector<double> x;
    std::vector<double> xi;
    double sup_xi = 0.0;
    double inf_xi = 0.0;
    double alpha = 0.0;
    HypothesisReport report;
};

/// Samples xi(x) = 2b int_x^1 k0 - b + 2 x k0(x) on an open grid of (0,1)
/// (uniform interior points plus points 10^-k from either end) and returns
/// alpha = max(sup xi, m, theta).
inline XiAlphaResult compute_xi_alpha(const DaughterProfile& k0, double b, double m, double theta,
                                      std::size_t uniform_points = 1000) {
    if (!(b >= 0.0 && b <= 2.0 && m >= 0.0 && m <= 2.0 && theta >= 0.0 && theta <= 1.0))
        throw InvalidParameter("compute_xi_alpha: need b, m in [0, 2] and theta in [0, 1]");
    XiAlphaResult res;
    for (std::size_t i = 0; i < uniform_points; ++i)
        res.x.push_back(static_cast<double>(i + 1) / static_cast<double>(uniform_points + 1));
    for (int k = 1; k <= 8; ++k) {
        res.x.push_back(std::pow(10.0, -k));
        res.x.push_back(1.0 - std::pow(10.0, -k));
    }
    std::sort(res.x.begin(), res.x.end());
    res.x.erase(std::unique(res.x.begin(), res.x.end()), res.x.end());

    res.sup_xi = -std::numeric_limits<double>::infinity();
    res.inf_xi = std::numeric_limits<double>::infinity();
    double x_sup = 0.0, x_inf = 0.0;
    double xk_all = 0.0, xk_inner = 0.0;
    for (double x : res.x) {
        const double kx = k0(x);
        const double v = 2.0 * b * (1.0 - k0.cumulative(x)) - b + 2.0 * x * kx;
        res.xi.push_back(v);
        if (v > res.sup_xi) { res.sup_xi = v; x_sup = x; }
        if (v < res.inf_xi) { res.inf_xi = v; x_inf = x; }
        const double xk = std::abs(x * kx);
        xk_all = std::max(xk_all, xk);
        if (x >= 1e-4 && x <= 1.0 - 1e-4) xk_inner = std::max(xk_inner, xk);
    }
    res.alpha = std::max({res.sup_xi, m, theta});

    auto& rep = res.report;
    rep.condition_id = "xi_alpha";
    rep.constants["sup_xi"] = res.sup_xi;
    rep.constants["inf_xi"] = res.inf_xi;
    rep.constants["alpha"] = res.alpha;
    rep.constants["sup_x_k0"] = xk_all;
    rep.witness["x_sup"] = x_sup;
    rep.witness["x_inf"] = x_inf;
    const bool bounded = std::isfinite(xk_all) && xk_all <= kDivergenceRatio * xk_inner;
    if (!bounded || !std::isfinite(res.sup_xi)) {
        rep.status = Status::sampled_only;
        rep.note = "x k0(x) appears unbounded near the ends of (0,1); estimates are sampled only";
    } else {
        rep.status = Status::pass;
    }
    return res;
}

namespace detail {

inline HypothesisReport joining_bound(const JoiningRate& eta, double alpha, const SampleGrid& grid,
                                      bool superlinear) {
    HypothesisReport rep;
    rep.condition_id = superlinear ? "joining_bound_superlinear" : "joining_bound_sublinear";
    rep.constants["alpha"] = alpha;
    const auto ys = grid.values();
    const double lim = grid.inner_limit();
    Extremum total, first, second;
    for (double y : ys) {
        for (double z : ys) {
            const double e = eta(y, z);
            const double de = std::abs(eta.dy(y, z));
            const double den2 = std::pow(y, alpha - 1.0) * std::pow(z, alpha);
            double t1 = 0.0, t2 = 0.0;
            if (!superlinear) {
                t1 = e / std::pow(y + z, alpha);
                t2 = de == 0.0 ? 0.0 : std::min(std::pow(y, alpha), std::pow(z, alpha)) * de / den2;
            } else {
                t1 = e / (y * std::pow(z, alpha - 1.0) + std::pow(y, alpha - 1.0) * z);
                t2 = de == 0.0 ? 0.0
                               : std::min(y, z) * (std::pow(y, alpha - 1.0) + std::pow(z, alpha - 1.0)) *
                                     de / den2;
            }
            const bool inner = y <= lim && z <= lim;
            std::map<std::string, double> pt{{"y", y}, {"z", z}};
            total.offer(t1 + t2, inner, pt);
            first.offer(t1, inner, pt);
            second.offer(t2, inner, pt);
        }
    }
    fill(rep, "K0", total);
    rep.constants["first_term"] = first.finite ? first.value : std::numeric_limits<double>::infinity();
    rep.constants["second_term"] = second.finite ? second.value : std::numeric_limits<double>::infinity();
    return rep;
}

}  // namespace detail

/// Joining-rate bound for alpha in (0, 1]:
/// eta/(y+z)^a + min(y^a, z^a)|d_y eta| / (y^{a-1} z^a) <= K0.
inline HypothesisReport check_joining_bound_sublinear(const JoiningRate& eta, double alpha,
                                          const SampleGrid& grid) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        HypothesisReport rep;
        rep.condition_id = "joining_bound_sublinear";
        rep.status = Status::not_applicable;
        rep.constants["alpha"] = alpha;
        rep.note = "alpha outside (0, 1]; use the superlinear bound";
        return rep;
    }
    return detail::joining_bound(eta, alpha, grid, false);
}

/// Joining-rate bound for alpha in (1, 2]:
/// eta/(y z^{a-1} + y^{a-1} z) + min(y,z)(y^{a-1}+z^{a-1})|d_y eta| / (y^{a-1} z^a) <= K0.
inline HypothesisReport check_joining_bound_superlinear(const JoiningRate& eta, double alpha,
                                          const SampleGrid& grid) {
    if (!(alpha > 1.0 && alpha <= 2.0)) {
        HypothesisReport rep;
        rep.condition_id = "joining_bound_superlinear";
        rep.status = Status::not_applicable;
        rep.constants["alpha"] = alpha;
        rep.note = "alpha outside (1, 2]; use the sublinear bound";
        return rep;
    }
    return detail::joining_bound(eta, alpha, grid, true);
}

/// Growth and regularity conditions on tau, mu, beta, kappa and eta relative
/// to the weight g. One report per condition.
inline ReportList check_growth_conditions(const RateSet& r, const WeightFunction& w,
                                          const SampleGrid& grid) {
    using detail::Extremum;
    ReportList out;
    const auto ys = grid.values();
    const double lim = grid.inner_limit();
    const double inf = std::numeric_limits<double>::infinity();
    auto loss = [&](double y) { return r.mu(y) + r.beta(y); };

    {   // small fragments near the parent size carry vanishing mass
        HypothesisReport rep;
        rep.condition_id = "fragment_vanishing_limit";
        double worst_final = 0.0, wy = ys.front();
        bool monotone = true;
        for (double y : ys) {
            double prev = inf;
            double last = 0.0;
            for (int k = 1; k <= 8; ++k) {
                const double ystar = y * (1.0 + std::pow(10.0, -k));
                const double val = 1.0 - r.k0.cumulative(y / ystar);
                if (val > prev * (1.0 + 1e-12) + 1e-15) monotone = false;
                prev = val;
                last = val;
            }
            if (last > worst_final) { worst_final = last; wy = y; }
        }
        rep.constants["max_value_at_finest_offset"] = worst_final;
        rep.witness["y"] = wy;
        rep.status = (monotone && worst_final < 1e-4) ? Status::sampled_only : Status::fail;
        rep.note = "limit approximated at offsets 10^-k, k = 1..8";
        out.push_back(rep);
    }
    {   // nonnegative, locally Lipschitz loss rates
        HypothesisReport rep;
        rep.condition_id = "rate_regularity";
        double mn = inf, wy = ys.front();
        bool finite = true;
        for (double y : ys) {
            const double v = std::min(r.mu(y), r.beta(y));
            if (v < mn) { mn = v; wy = y; }
            finite = finite && std::isfinite(r.mu.derivative(y)) && std::isfinite(r.beta.derivative(y));
        }
        rep.constants["min_rate"] = mn;
        rep.witness["y"] = wy;
        rep.status = (mn >= 0.0 && finite) ? Status::pass : Status::fail;
        out.push_back(rep);
    }
    {   // g' <= c0 (g + 1)
        HypothesisReport rep;
        rep.condition_id = "weight_growth";
        Extremum e;
        bool positive = true;
        for (double y : ys) {
            positive = positive && w.g(y) > 0.0;
            e.offer(w.dg(y) / (w.g(y) + 1.0), y <= lim, {{"y", y}});
        }
        detail::fill(rep, "c0", e);
        if (!positive) {
            rep.status = Status::fail;
            rep.note = "weight not strictly positive";
        }
        out.push_back(rep);
    }
    {   // 0 < tau <= c0 y, |tau'| <= c0 g, (tau g)' <= c0 g
        HypothesisReport rep;
        rep.condition_id = "tau_growth";
        Extremum e;
        bool positive = true;
        for (double y : ys) {
            const double t = r.tau(y);
            positive = positive && t > 0.0;
            const double g = w.g(y);
            const double dt = r.tau.derivative(y);
            const double dtg = dt * g + t * w.dg(y);
            e.offer(std::max({t / y, std::abs(dt) / g, dtg / g}), y <= lim, {{"y", y}});
        }
        detail::fill(rep, "c0", e);
        if (!positive) {
            rep.status = Status::fail;
            rep.note = "tau not strictly positive";
        }
        out.push_back(rep);
    }
    {   // (mu+beta)(y) <= c0 ((mu+beta)(y*) + G(y*) + y*), y* > y
        HypothesisReport rep;
        rep.condition_id = "loss_rate_monotonicity";
        Extremum e;
        for (std::size_t i = 0; i < ys.size(); ++i)
            for (std::size_t j = i + 1; j < ys.size(); ++j) {
                const double y = ys[i], ys_ = ys[j];
                e.offer(loss(y) / (loss(ys_) + w.G(ys_) + ys_), ys_ <= lim, {{"y", y}, {"y_star", ys_}});
            }
        detail::fill(rep, "c0", e);
        out.push_back(rep);
    }
    {   // |mu'| + |beta'| <= c0 g
        HypothesisReport rep;
        rep.condition_id = "rate_derivative";
        Extremum e;
        for (double y : ys)
            e.offer((std::abs(r.mu.derivative(y)) + std::abs(r.beta.derivative(y))) / w.g(y), y <= lim,
                    {{"y", y}});
        detail::fill(rep, "c0", e);
        out.push_back(rep);
    }
    {   // |d/dy beta int_0^{y0} z kappa| + |B2(y*,y)| <= c0 g(y), y > y* >= y0
        HypothesisReport rep;
        rep.condition_id = "fragment_flux_derivative";
        Extremum e;
        for (std::size_t j = 0; j < ys.size(); ++j) {
            const double y = ys[j];
            const double sub = std::abs(central_difference(
                [&](double s) { return detail::subcritical_fragment_flux(r, s); }, y));
            for (std::size_t i = 0; i < j; ++i) {
                const double b2 = std::abs(detail::fragment_flux_derivative(r, ys[i], y));
                e.offer((sub + b2) / w.g(y), y <= lim, {{"y", y}, {"y_star", ys[i]}});
            }
        }
        detail::fill(rep, "c0", e);
        out.push_back(rep);
    }
    {   // int_{y0}^y g |2 B2(y*,y) - (beta'+mu')(y)| dy* <= g(y)(c0 + (mu+beta)(y))
        HypothesisReport rep;
        rep.condition_id = "fragment_flux_balance";
        Extremum e;
        for (std::size_t j = 1; j < ys.size(); ++j) {
            const double y = ys[j];
            const double d = r.beta.derivative(y) + r.mu.derivative(y);
            double integral = 0.0;
            for (std::size_t i = 0; i < j; ++i)
                integral += quad::integrate(
                    [&](double s) {
                        return w.g(s) * std::abs(2.0 * detail::fragment_flux_derivative(r, s, y) - d);
                    },
                    ys[i], ys[i + 1], 1);
            e.offer(std::max(integral / w.g(y) - loss(y), 0.0), y <= lim, {{"y", y}});
        }
        detail::fill(rep, "c0", e);
        out.push_back(rep);
    }
    // joining-rate conditions weighted by g and G
    auto GY = [&](double y) { return w.G(y) + y; };
    auto bracket = [&](double y, double z) {
        return w.G(y + z) - w.G(std::max(y, z)) + w.G(std::min(y, z));
    };
    {
        HypothesisReport rep;
        rep.condition_id = "joining_weighted";
        Extremum e;
        for (double y : ys)
            for (double z : ys)
                e.offer((r.eta(y, z) / GY(y) + std::abs(r.eta.dy(y, z)) / w.g(y)) / GY(z),
                        y <= lim && z <= lim, {{"y", y}, {"z", z}});
        detail::fill(rep, "K", e);
        out.push_back(rep);
    }
    {
        HypothesisReport rep;
        rep.condition_id = "joining_weight_increment";
        Extremum e;
        for (double y : ys)
            for (double z : ys)
                e.offer(r.eta(y, z) * std::abs(w.g(y + z) - w.g(y)) / (w.g(y) * GY(z)),
                        y <= lim && z <= lim, {{"y", y}, {"z", z}});
        detail::fill(rep, "K", e);
        out.push_back(rep);
    }
    {
        HypothesisReport rep;
        rep.condition_id = "joining_weight_primitive";
        Extremum e;
        for (double y : ys)
            for (double z : ys)
                e.offer(r.eta(y, z) * bracket(y, z) / (GY(y) * GY(z)), y <= lim && z <= lim,
                        {{"y", y}, {"z", z}});
        detail::fill(rep, "K", e);
        out.push_back(rep);
    }
    {
        HypothesisReport rep;
        rep.condition_id = "joining_derivative_primitive";
        Extremum e;
        for (double y : ys)
            for (double z : ys)
                e.offer(std::abs(r.eta.dy(y, z)) * bracket(y, z) / (w.g(y) * GY(z)),
                        y <= lim && z <= lim, {{"y", y}, {"z", z}});
        detail::fill(rep, "K", e);
        out.push_back(rep);
    }
    {   // with saturation the weight must stay bounded away from zero
        HypothesisReport rep;
        rep.condition_id = "weight_lower_bound";
        if (r.nu == 0.0) {
            rep.status = Status::pass;
            rep.note = "no saturation (nu = 0); condition is vacuous";
        } else {
            double mn = inf, mn_inner = inf, wy = ys.front();
            for (double y : ys) {
                const double g = w.g(y);
                if (g < mn) { mn = g; wy = y; }
                if (y <= lim) mn_inner = std::min(mn_inner, g);
            }
            rep.constants["g0"] = mn;
            rep.witness["y"] = wy;
            const bool decaying = mn * kDivergenceRatio < mn_inner;
            rep.status = (mn > 0.0 && !decaying) ? Status::pass : Status::fail;
            if (decaying) rep.note = "weight decays across the last decade of samples";
        }
        out.push_back(rep);
    }
    {   // int_{y*}^y |mu'+beta'| <= c1 (1 + (mu+beta)(y)); the integrand is
        // nonnegative so the worst y* is the left end
        HypothesisReport rep;
        rep.condition_id = "loss_derivative_integral";
        Extremum e;
        double cumulative = 0.0;
        for (std::size_t j = 1; j < ys.size(); ++j) {
            cumulative += quad::integrate(
                [&](double s) { return std::abs(r.mu.derivative(s) + r.beta.derivative(s)); }, ys[j - 1],
                ys[j], 1);
            e.offer(cumulative / (1.0 + loss(ys[j])), ys[j] <= lim, {{"y", ys[j]}, {"y_star", ys.front()}});
        }
        detail::fill(rep, "c1", e);
        out.push_back(rep);
    }
    {   // int_{y'}^y |B2(y', y*)| dy* <= c1 (1 + (mu+beta)(y))
        HypothesisReport rep;
        rep.condition_id = "fragment_flux_integral";
        Extremum e;
        for (std::size_t i = 0; i + 1 < ys.size(); ++i) {
            const double yp = ys[i];
            double cumulative = 0.0;
            for (std::size_t j = i + 1; j < ys.size(); ++j) {
                cumulative += quad::integrate(
                    [&](double s) { return std::abs(detail::fragment_flux_derivative(r, yp, s)); },
                    ys[j - 1], ys[j], 1);
                e.offer(cumulative / (1.0 + loss(ys[j])), ys[j] <= lim, {{"y", ys[j]}, {"y_prime", yp}});
            }
        }
        detail::fill(rep, "c1", e);
        out.push_back(rep);
    }
    return out;
}

/// Conditions used for uniqueness in the natural phase space (unit weight):
/// joining dominated by degradation, a uniform spread of daughter sizes,
/// a monotone decomposition of mu and beta, and the averaged fragment flux
/// bound.
inline ReportList check_natural_space_conditions(const RateSet& r, const SampleGrid& grid,
                                      std::size_t panels = 32) {
    using detail::Extremum;
    ReportList out;
    const auto ys = grid.values();
    const double lim = grid.inner_limit();
    const double inf = std::numeric_limits<double>::infinity();
    {
        HypothesisReport rep;
        rep.condition_id = "joining_vs_degradation";
        Extremum e;
        for (double y : ys)
            for (double z : ys) {
                const double num = r.eta(y, z);
                const double den = r.mu(y) + r.mu(z);
                const double v = num == 0.0 ? 0.0 : (den > 0.0 ? num / den : inf);
                e.offer(v, y <= lim && z <= lim, {{"y", y}, {"z", z}});
            }
        detail::fill(rep, "C1", e);
        if (!e.finite) rep.note = "joining rate positive where degradation vanishes: no finite C1";
        out.push_back(rep);
    }
    {
        HypothesisReport rep;
        rep.condition_id = "splitting_spread";
        double mn = inf, mx = -inf, wy = ys.front();
        for (double y : ys) {
            if (!(y > r.y0)) continue;
            const double v = quad::integrate(
                [&](double s) {
                    const double x = s / y;
                    return x * (1.0 - x) * kappa_eval(r, s, y);
                },
                0.0, y, panels);
            if (v < mn) { mn = v; wy = y; }
            mx = std::max(mx, v);
        }
        rep.constants["delta"] = mn;
        rep.constants["delta_spread"] = mx - mn;
        rep.witness["y"] = wy;
        rep.status = mn > 0.0 ? Status::pass : Status::fail;
        out.push_back(rep);
    }
    {
        HypothesisReport rep;
        rep.condition_id = "rate_decomposition";
        if (r.power_law) {
            rep.status = Status::pass;
            rep.note = "power-law rates: mu1 = mu, beta1 = beta with nonnegative derivatives";
        } else {
            rep.status = Status::not_applicable;
            rep.note = "monotone decomposition is only certified for the power-law family";
        }
        out.push_back(rep);
    }
    {   // (1/R) int_{y0}^R |B2(y*,y)| dy* <= C2 beta1'(y), y > R > y0
        HypothesisReport rep;
        rep.condition_id = "fragment_flux_average";
        if (!r.power_law) {
            rep.status = Status::not_applicable;
            rep.note = "requires the monotone decomposition of the power-law family";
        } else {
            Extremum e;
            for (std::size_t j = 1; j < ys.size(); ++j) {
                const double y = ys[j];
                const double db = r.beta.derivative(y);
                double cumulative = 0.0;
                for (std::size_t i = 1; i < j; ++i) {
                    cumulative += quad::integrate(
                        [&](double s) { return std::abs(detail::fragment_flux_derivative(r, s, y)); },
                        ys[i - 1], ys[i], 1);
                    const double R = ys[i];
                    const double lhs = cumulative / R;
                    const double v = lhs == 0.0 ? 0.0 : (db > 0.0 ? lhs / db : inf);
                    e.offer(v, y <= lim, {{"y", y}, {"R", R}});
                }
            }
            detail::fill(rep, "C2", e);
        }
        out.push_back(rep);
    }
    return out;
}

struct AuditOptions {
    SampleGrid grid;
    std::size_t xi_points = 1000;
    double kernel_tolerance = 1e-10;
    /// Overrides the default weight y^{max(alpha,1)-1}.
    std::optional<WeightFunction> weight;
};

/// Full audit: kernel identities, xi/alpha, the alpha-dependent joining bound,
/// growth conditions, natural-space conditions, and two summary verdicts.
inline ReportList audit_hypotheses(const RateSet& r, const AuditOptions& opt = {}) {
    ReportList out;
    SampleGrid grid = opt.grid;
    grid.y0 = r.y0;

    const auto ys = log_samples(r.y0, 1e3, 100);
    out.push_back(check_kernel_identities(r, ys, opt.kernel_tolerance));
    {
        HypothesisReport rep;
        rep.condition_id = "profile_symmetry";
        const auto [sym, norm] = profile_deviation(r.k0);
        rep.constants["symmetry_deviation"] = sym;
        rep.constants["normalization_deviation"] = norm;
        rep.status = (sym <= 1e-10 && norm <= 1e-10) ? Status::pass : Status::fail;
        out.push_back(rep);
    }
    {
        HypothesisReport rep;
        rep.condition_id = "joining_symmetry";
        const double asym = eta_asymmetry(r.eta, grid.values());
        rep.constants["max_asymmetry"] = asym;
        bool nonneg = true;
        for (double y : grid.values())
            for (double z : grid.values()) nonneg = nonneg && r.eta(y, z) >= 0.0;
        rep.status = (asym == 0.0 && nonneg) ? Status::pass : Status::fail;
        out.push_back(rep);
    }

    double alpha = 1.0;
    std::optional<XiAlphaResult> xi;
    if (r.power_law) {
        const auto& p = *r.power_law;
        xi = compute_xi_alpha(r.k0, p.b, p.m, p.theta, opt.xi_points);
        alpha = xi->alpha;
        out.push_back(xi->report);
        out.push_back(check_joining_bound_sublinear(r.eta, alpha, grid));
        out.push_back(check_joining_bound_superlinear(r.eta, alpha, grid));
    }

    const WeightFunction w = opt.weight ? *opt.weight : WeightFunction::for_alpha(alpha, r.y0);
    for (auto& rep : check_growth_conditions(r, w, grid)) out.push_back(std::move(rep));
    for (auto& rep : check_natural_space_conditions(r, grid)) out.push_back(std::move(rep));

    auto passed = [&](const std::string& id) {
        const auto* rep = find_report(out, id);
        return rep && (rep->status == Status::pass || rep->status == Status::sampled_only);
    };

    {
        HypothesisReport rep;
        rep.condition_id = "uniqueness_high_moments";
        if (!r.power_law) {
            rep.status = Status::not_applicable;
            rep.note = "verdict defined for the power-law family only";
        } else {
            rep.constants["alpha"] = alpha;
            const bool alpha_ok = alpha > 0.0 && alpha <= 2.0;
            const bool bound_ok = alpha <= 1.0 ? passed("joining_bound_sublinear")
                                               : passed("joining_bound_superlinear");
            const bool profile_ok = xi && xi->report.status == Status::pass;
            rep.status = (alpha_ok && bound_ok && profile_ok && passed("kernel_identities"))
                             ? Status::pass
                             : Status::fail;
        }
        out.push_back(rep);
    }
    {
        HypothesisReport rep;
        rep.condition_id = "uniqueness_natural_space";
        if (!r.power_law) {
            rep.status = Status::not_applicable;
            rep.note = "verdict defined for the power-law family only";
        } else {
            const auto& p = *r.power_law;
            // joining bound evaluated with alpha := m (m = 0 admitted here)
            const auto bound = detail::joining_bound(r.eta, p.m, grid, false);
            rep.constants["K0_at_m"] = bound.constants.at("K0");
            rep.constants["inf_xi"] = xi->inf_xi;
            const bool ok = p.b <= 1.0 && p.m <= 1.0 && bound.status == Status::pass &&
                            xi->inf_xi >= -1e-12 && xi->report.status == Status::pass;
            rep.status = ok ? Status::pass : Status::fail;
        }
        out.push_back(rep);
    }
    return out;
}

}  // namespace prion
