#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "prion/errors.hpp"
#include "prion/quadrature.hpp"
#include "prion/report.hpp"

namespace prion {

using ScalarFn = std::function<double(double)>;
using PairFn = std::function<double(double, double)>;

/// Relative step of the central finite differences used when no analytic
/// derivative is registered.
inline constexpr double kRelativeFdStep = 1e-6;

inline double central_difference(const ScalarFn& f, double y) {
    const double h = kRelativeFdStep * std::max(std::abs(y), 1.0);
    return (f(y + h) - f(y - h)) / (2.0 * h);
}

/// Two-column (x, value) table with linear interpolation and constant
/// extension outside the tabulated range.
class TabulatedFunction {
public:
    TabulatedFunction() = default;

    TabulatedFunction(std::vector<double> x, std::vector<double> values)
        : x_(std::move(x)), v_(std::move(values)) {
        if (x_.size() != v_.size() || x_.size() < 2)
            throw InvalidParameter("table needs at least two (x, value) rows");
        for (std::size_t i = 1; i < x_.size(); ++i)
            if (!(x_[i] > x_[i - 1]))
                throw InvalidParameter("table abscissae must be strictly increasing");
    }

    static TabulatedFunction from_file(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw InvalidParameter("cannot open table '" + path.string() + "'");
        std::vector<double> x, v;
        std::string line;
        while (std::getline(in, line)) {
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            std::istringstream row(line);
            double a = 0.0, b = 0.0;
            if (!(row >> a)) continue;
            if (!(row >> b))
                throw InvalidParameter("table '" + path.string() + "': row without second column");
            x.push_back(a);
            v.push_back(b);
        }
        return {std::move(x), std::move(v)};
    }

    double operator()(double y) const {
        if (y <= x_.front()) return v_.front();
        if (y >= x_.back()) return v_.back();
        const auto it = std::upper_bound(x_.begin(), x_.end(), y);
        const std::size_t k = static_cast<std::size_t>(it - x_.begin());
        const double t = (y - x_[k - 1]) / (x_[k] - x_[k - 1]);
        return v_[k - 1] + t * (v_[k] - v_[k - 1]);
    }

    double slope(double y) const {
        if (y < x_.front() || y > x_.back()) return 0.0;
        auto it = std::upper_bound(x_.begin(), x_.end(), y);
        std::size_t k = static_cast<std::size_t>(it - x_.begin());
        k = std::clamp<std::size_t>(k, 1, x_.size() - 1);
        return (v_[k] - v_[k - 1]) / (x_[k] - x_[k - 1]);
    }

    const std::vector<double>& abscissae() const { return x_; }
    const std::vector<double>& values() const { return v_; }

private:
    std::vector<double> x_;
    std::vector<double> v_;
};

/// A size-dependent rate y -> r(y). Power laws are evaluated in closed form;
/// other rates go through a callable and fall back to finite differences for
/// the derivative.
class RateFunction {
public:
    enum class Kind { power, callable };

    RateFunction() : RateFunction(power(0.0, 0.0)) {}

    static RateFunction power(double coefficient, double exponent) {
        RateFunction r(Kind::power);
        r.coef_ = coefficient;
        r.exp_ = exponent;
        return r;
    }

    static RateFunction from_callable(ScalarFn f, ScalarFn df = {}) {
        RateFunction r(Kind::callable);
        r.fn_ = std::move(f);
        r.dfn_ = std::move(df);
        return r;
    }

    static RateFunction tabulated(TabulatedFunction table) {
        auto shared = std::make_shared<TabulatedFunction>(std::move(table));
        return from_callable([shared](double y) { return (*shared)(y); },
                             [shared](double y) { return shared->slope(y); });
    }

    double operator()(double y) const {
        if (kind_ == Kind::power) return exp_ == 0.0 ? coef_ : coef_ * std::pow(y, exp_);
        return fn_(y);
    }

    double derivative(double y) const {
        if (kind_ == Kind::power)
            return exp_ == 0.0 ? 0.0 : coef_ * exp_ * std::pow(y, exp_ - 1.0);
        if (dfn_) return dfn_(y);
        return central_difference(fn_, y);
    }

    Kind kind() const { return kind_; }
    bool is_constant() const { return kind_ == Kind::power && (exp_ == 0.0 || coef_ == 0.0); }
    double coefficient() const { return coef_; }
    double exponent() const { return exp_; }

private:
    explicit RateFunction(Kind k) : kind_(k) {}

    Kind kind_;
    double coef_ = 0.0;
    double exp_ = 0.0;
    ScalarFn fn_;
    ScalarFn dfn_;
};

/// Daughter-distribution profile k0 on (0,1); the splitting kernel is
/// kappa(z, y) = k0(z / y) / y. Besides point values it provides the
/// primitives K(x) = int_0^x k0 and K1(x) = int_0^x t k0(t) dt, in closed
/// form for the built-in profiles and by composite Gauss-Legendre otherwise.
class DaughterProfile {
public:
    enum class Kind { uniform, parabolic, custom };

    static DaughterProfile uniform() { return DaughterProfile(Kind::uniform, "uniform"); }

    /// k0(x) = 6 x (1 - x)
    static DaughterProfile parabolic() { return DaughterProfile(Kind::parabolic, "parabolic"); }

    static DaughterProfile custom(ScalarFn k0, std::string label = "custom",
                                  std::size_t panels = 64) {
        DaughterProfile p(Kind::custom, std::move(label));
        p.fn_ = std::move(k0);
        p.panels_ = panels;
        return p;
    }

    static DaughterProfile tabulated(TabulatedFunction table) {
        auto shared = std::make_shared<TabulatedFunction>(std::move(table));
        return custom([shared](double x) { return (*shared)(x); }, "tabulated", 256);
    }

    double operator()(double x) const {
        switch (kind_) {
            case Kind::uniform: return 1.0;
            case Kind::parabolic: return 6.0 * x * (1.0 - x);
            case Kind::custom: return fn_(x);
        }
        return 0.0;
    }

    double cumulative(double x) const {
        x = std::clamp(x, 0.0, 1.0);
        switch (kind_) {
            case Kind::uniform: return x;
            case Kind::parabolic: return x * x * (3.0 - 2.0 * x);
            case Kind::custom: return quad::integrate(fn_, 0.0, x, panels_);
        }
        return 0.0;
    }

    double first_moment(double x) const {
        x = std::clamp(x, 0.0, 1.0);
        switch (kind_) {
            case Kind::uniform: return 0.5 * x * x;
            case Kind::parabolic: return x * x * x * (2.0 - 1.5 * x);
            case Kind::custom:
                return quad::integrate([this](double t) { return t * fn_(t); }, 0.0, x, panels_);
        }
        return 0.0;
    }

    Kind kind() const { return kind_; }
    const std::string& label() const { return label_; }

private:
    DaughterProfile(Kind k, std::string label) : kind_(k), label_(std::move(label)) {}

    Kind kind_;
    std::string label_;
    ScalarFn fn_;
    std::size_t panels_ = 64;
};

/// Symmetric joining rate eta(y, z).
class JoiningRate {
public:
    enum class Kind { constant, product, sum, custom };

    JoiningRate() : JoiningRate(constant(0.0)) {}

    static JoiningRate constant(double c) {
        JoiningRate r(Kind::constant);
        r.c_ = c;
        return r;
    }

    /// c (y z)^p
    static JoiningRate product(double c, double p) {
        JoiningRate r(Kind::product);
        r.c_ = c;
        r.p_ = p;
        return r;
    }

    /// c (y^p + z^p)
    static JoiningRate sum(double c, double p) {
        JoiningRate r(Kind::sum);
        r.c_ = c;
        r.p_ = p;
        return r;
    }

    static JoiningRate custom(PairFn eta, PairFn d_eta_dy = {}) {
        JoiningRate r(Kind::custom);
        r.fn_ = std::move(eta);
        r.dfn_ = std::move(d_eta_dy);
        return r;
    }

    double operator()(double y, double z) const {
        switch (kind_) {
            case Kind::constant: return c_;
            case Kind::product: return c_ * std::pow(y * z, p_);
            case Kind::sum: return c_ * (std::pow(y, p_) + std::pow(z, p_));
            case Kind::custom: return fn_(y, z);
        }
        return 0.0;
    }

    /// Partial derivative with respect to the first argument.
    double dy(double y, double z) const {
        switch (kind_) {
            case Kind::constant: return 0.0;
            case Kind::product: return p_ == 0.0 ? 0.0 : c_ * p_ * std::pow(y, p_ - 1.0) * std::pow(z, p_);
            case Kind::sum: return p_ == 0.0 ? 0.0 : c_ * p_ * std::pow(y, p_ - 1.0);
            case Kind::custom:
                if (dfn_) return dfn_(y, z);
                return central_difference([this, z](double s) { return fn_(s, z); }, y);
        }
        return 0.0;
    }

    Kind kind() const { return kind_; }
    bool is_constant() const { return kind_ == Kind::constant; }
    double coefficient() const { return c_; }
    double exponent() const { return p_; }

private:
    explicit JoiningRate(Kind k) : kind_(k) {}

    Kind kind_;
    double c_ = 0.0;
    double p_ = 0.0;
    PairFn fn_;
    PairFn dfn_;
};

/// Coefficients of the power-law family beta = B y^b, mu = M y^m,
/// tau = S y^theta, with a constant joining rate.
struct PowerLawParams {
    double B = 0.0, b = 0.0;
    double M = 0.0, m = 0.0;
    double S = 1.0, theta = 0.0;
    double eta_const = 0.0;
};

struct ScalarRates {
    double lambda = 0.0;
    double gamma = 0.0;
    double nu = 0.0;
    double y0 = 1.0;
};

struct RateSet {
    double lambda = 0.0;
    double gamma = 0.0;
    double nu = 0.0;
    double y0 = 1.0;
    RateFunction tau = RateFunction::power(1.0, 0.0);
    RateFunction mu;
    RateFunction beta;
    DaughterProfile k0 = DaughterProfile::uniform();
    JoiningRate eta;
    /// Set when every rate comes from the closed-form power family.
    std::optional<PowerLawParams> power_law;
};

/// Problems found in p; empty when the parameters are admissible.
inline std::vector<std::string> power_law_violations(const PowerLawParams& p) {
    std::vector<std::string> out;
    auto in_range = [&](const char* name, double v, double lo, double hi) {
        if (!(v >= lo && v <= hi)) {
            std::ostringstream msg;
            msg << "exponent " << name << " = " << v << " outside the admissible range " << lo
                << " <= " << name << " <= " << hi;
            out.push_back(msg.str());
        }
    };
    auto nonneg = [&](const char* name, double v) {
        if (!(v >= 0.0)) out.push_back(std::string("coefficient ") + name + " must be >= 0");
    };
    in_range("b", p.b, 0.0, 2.0);
    in_range("m", p.m, 0.0, 2.0);
    in_range("theta", p.theta, 0.0, 1.0);
    nonneg("B", p.B);
    nonneg("M", p.M);
    nonneg("S", p.S);
    nonneg("eta", p.eta_const);
    return out;
}

inline std::vector<std::string> scalar_violations(const ScalarRates& s) {
    std::vector<std::string> out;
    if (!(s.y0 > 0.0)) out.push_back("critical size y0 must be > 0");
    if (!(s.lambda >= 0.0)) out.push_back("lambda must be >= 0");
    if (!(s.gamma >= 0.0)) out.push_back("gamma must be >= 0");
    if (!(s.nu >= 0.0)) out.push_back("nu must be >= 0");
    return out;
}

inline RateSet make_power_law_rates(const PowerLawParams& p, const ScalarRates& s,
                                    DaughterProfile k0 = DaughterProfile::uniform()) {
    auto errors = power_law_violations(p);
    const auto more = scalar_violations(s);
    errors.insert(errors.end(), more.begin(), more.end());
    if (!errors.empty()) {
        std::string msg = "invalid power-law rates:";
        for (const auto& e : errors) msg += " " + e + ";";
        throw InvalidParameter(msg);
    }
    RateSet r;
    r.lambda = s.lambda;
    r.gamma = s.gamma;
    r.nu = s.nu;
    r.y0 = s.y0;
    r.beta = RateFunction::power(p.B, p.b);
    r.mu = RateFunction::power(p.M, p.m);
    r.tau = RateFunction::power(p.S, p.theta);
    r.k0 = std::move(k0);
    r.eta = JoiningRate::constant(p.eta_const);
    r.power_law = p;
    return r;
}

/// True for the rate family whose moments close: constant tau, mu, eta,
/// beta linear in y and the uniform daughter profile.
inline bool has_closed_moments(const RateSet& r) {
    if (!r.power_law || r.k0.kind() != DaughterProfile::Kind::uniform || !r.eta.is_constant())
        return false;
    const auto& p = *r.power_law;
    return (p.b == 1.0 || p.B == 0.0) && (p.m == 0.0 || p.M == 0.0) &&
           (p.theta == 0.0 || p.S == 0.0);
}

/// kappa(z, y) = k0(z / y) / y for y > y0, 0 < z < y.
inline double kappa_eval(const RateSet& rates, double z, double y) {
    if (!(y > rates.y0) || !(z > 0.0) || !(z < y))
        throw ContractViolation("kappa_eval: need y > y0 and 0 < z < y");
    return rates.k0(z / y) / y;
}

/// Evaluates the structural splitting-kernel identities on the sample sizes ys:
/// int_0^y kappa = 1, 2 int_0^y z kappa = y and kappa(z,y) = kappa(y-z,y).
/// Integrals use composite Gauss-Legendre with `panels` eight-point panels.
/// Deviations are reported, not thrown.
inline HypothesisReport check_kernel_identities(const PairFn& kappa, const std::vector<double>& ys,
                                                double tol, std::size_t panels = 32) {
    HypothesisReport rep;
    rep.condition_id = "kernel_identities";
    double worst_norm = 0.0, worst_mom = 0.0, worst_sym = 0.0;
    double y_norm = ys.empty() ? 0.0 : ys.front();
    double y_mom = y_norm, y_sym = y_norm;
    const auto& rule = quad::gauss8();
    for (double y : ys) {
        const double norm = quad::integrate([&](double z) { return kappa(z, y); }, 0.0, y, panels);
        const double mom =
            2.0 * quad::integrate([&](double z) { return z * kappa(z, y); }, 0.0, y, panels);
        const double dn = std::abs(norm - 1.0);
        const double dm = std::abs(mom - y) / y;
        double ds = 0.0;
        const double h = y / static_cast<double>(panels);
        for (std::size_t p = 0; p < panels; ++p) {
            for (double node : rule.nodes) {
                const double z = h * (static_cast<double>(p) + 0.5 + 0.5 * node);
                ds = std::max(ds, std::abs(kappa(z, y) - kappa(y - z, y)) * y);
            }
        }
        if (dn > worst_norm) { worst_norm = dn; y_norm = y; }
        if (dm > worst_mom) { worst_mom = dm; y_mom = y; }
        if (ds > worst_sym) { worst_sym = ds; y_sym = y; }
    }
    rep.constants["normalization_deviation"] = worst_norm;
    rep.constants["moment_deviation"] = worst_mom;
    rep.constants["symmetry_deviation"] = worst_sym;
    rep.witness["y_normalization"] = y_norm;
    rep.witness["y_moment"] = y_mom;
    rep.witness["y_symmetry"] = y_sym;
    rep.status = (worst_norm <= tol && worst_mom <= tol && worst_sym <= tol) ? Status::pass
                                                                              : Status::fail;
    return rep;
}

inline HypothesisReport check_kernel_identities(const RateSet& rates, const std::vector<double>& ys,
                                                double tol, std::size_t panels = 32) {
    return check_kernel_identities(
        [&rates](double z, double y) { return kappa_eval(rates, z, y); }, ys, tol, panels);
}

/// Largest |eta(y,z) - eta(z,y)| over all sample pairs.
inline double eta_asymmetry(const JoiningRate& eta, const std::vector<double>& ys) {
    double worst = 0.0;
    for (double y : ys)
        for (double z : ys) worst = std::max(worst, std::abs(eta(y, z) - eta(z, y)));
    return worst;
}

/// Largest |k0(x) - k0(1-x)| and |int_0^1 k0 - 1| on an interior sample.
inline std::pair<double, double> profile_deviation(const DaughterProfile& k0,
                                                   std::size_t samples = 1000) {
    double sym = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(samples);
        sym = std::max(sym, std::abs(k0(x) - k0(1.0 - x)));
    }
    return {sym, std::abs(k0.cumulative(1.0) - 1.0)};
}

/// Logarithmically spaced sizes y0 * ratio^(k/(n-1)) excluding y0 itself when
/// open_left is set (first point then lies one step above y0).
inline std::vector<double> log_samples(double y0, double ratio, std::size_t n, bool open_left = true) {
    std::vector<double> ys;
    ys.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double e = open_left ? static_cast<double>(k + 1) / static_cast<double>(n)
                                   : static_cast<double>(k) / static_cast<double>(n - 1);
        ys.push_back(y0 * std::pow(ratio, e));
    }
    return ys;
}

}  // namespace prion
