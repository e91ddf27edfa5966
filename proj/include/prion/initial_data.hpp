#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "prion/errors.hpp"
#include "prion/grid.hpp"
#include "prion/kernels.hpp"
#include "prion/quadrature.hpp"

namespace prion {

/// Initial polymer density as a sum of simple components, each restricted to
/// [y0, ymax]. Cell averages and moments are exact for Gaussian bumps and
/// indicators; tabulated components use Gauss-Legendre per cell.
class InitialProfile {
public:
    enum class Kind { gaussian, indicator, table };

    struct Component {
        Kind kind = Kind::gaussian;
        double center = 0.0, width = 1.0, amplitude = 1.0;  // gaussian
        double lo = 0.0, hi = 0.0;                           // indicator, height = amplitude
        std::shared_ptr<TabulatedFunction> table;
    };

    static InitialProfile gaussian(double center, double width, double amplitude) {
        if (!(width > 0.0)) throw InvalidParameter("gaussian initial data: width must be > 0");
        if (!(amplitude >= 0.0)) throw InvalidParameter("gaussian initial data: amplitude must be >= 0");
        InitialProfile p;
        p.add({Kind::gaussian, center, width, amplitude, 0.0, 0.0, nullptr});
        return p;
    }

    static InitialProfile indicator(double lo, double hi, double height) {
        if (!(hi > lo)) throw InvalidParameter("indicator initial data: need hi > lo");
        if (!(height >= 0.0)) throw InvalidParameter("indicator initial data: height must be >= 0");
        InitialProfile p;
        p.add({Kind::indicator, 0.0, 1.0, height, lo, hi, nullptr});
        return p;
    }

    static InitialProfile tabulated(TabulatedFunction t) {
        InitialProfile p;
        Component c;
        c.kind = Kind::table;
        c.table = std::make_shared<TabulatedFunction>(std::move(t));
        p.add(c);
        return p;
    }

    InitialProfile& add(Component c) {
        components_.push_back(std::move(c));
        return *this;
    }

    InitialProfile plus(const InitialProfile& other, double scale) const {
        InitialProfile out = *this;
        for (auto c : other.components_) {
            if (c.kind == Kind::table) {
                auto base = c.table;
                auto xs = base->abscissae();
                auto vs = base->values();
                for (auto& v : vs) v *= scale;
                c.table = std::make_shared<TabulatedFunction>(std::move(xs), std::move(vs));
            } else {
                c.amplitude *= scale;
            }
            out.add(c);
        }
        return out;
    }

    double value(double y) const {
        double s = 0.0;
        for (const auto& c : components_) s += component_value(c, y);
        return s;
    }

    /// int_a^b y^order u(y) dy for order 0 or 1.
    double integral(double a, double b, int order) const {
        double s = 0.0;
        for (const auto& c : components_) s += component_integral(c, a, b, order);
        return s;
    }

    std::vector<double> cell_averages(const Grid& g) const {
        std::vector<double> u(g.size());
        const auto& e = g.edges();
        for (std::size_t i = 0; i < g.size(); ++i) u[i] = integral(e[i], e[i + 1], 0) / g.widths()[i];
        return u;
    }

    const std::vector<Component>& components() const { return components_; }

private:
    static double component_value(const Component& c, double y) {
        switch (c.kind) {
            case Kind::gaussian: {
                const double d = (y - c.center) / c.width;
                return c.amplitude * std::exp(-0.5 * d * d);
            }
            case Kind::indicator: return (y >= c.lo && y < c.hi) ? c.amplitude : 0.0;
            case Kind::table: {
                const auto& xs = c.table->abscissae();
                if (y < xs.front() || y > xs.back()) return 0.0;
                return (*c.table)(y);
            }
        }
        return 0.0;
    }

    static double component_integral(const Component& c, double a, double b, int order) {
        if (!(b > a)) return 0.0;
        switch (c.kind) {
            case Kind::gaussian: {
                const double s2 = std::numbers::sqrt2 * c.width;
                const double zero = c.amplitude * c.width * std::sqrt(std::numbers::pi / 2.0) *
                                    (std::erf((b - c.center) / s2) - std::erf((a - c.center) / s2));
                if (order == 0) return zero;
                auto g = [&](double y) {
                    const double d = (y - c.center) / c.width;
                    return std::exp(-0.5 * d * d);
                };
                return c.center * zero + c.amplitude * c.width * c.width * (g(a) - g(b));
            }
            case Kind::indicator: {
                const double lo = std::max(a, c.lo), hi = std::min(b, c.hi);
                if (!(hi > lo)) return 0.0;
                return c.amplitude * (order == 0 ? hi - lo : 0.5 * (hi - lo) * (hi + lo));
            }
            case Kind::table: {
                // split at table nodes so the piecewise-linear profile is integrated exactly
                const auto& xs = c.table->abscissae();
                const double lo = std::max(a, xs.front()), hi = std::min(b, xs.back());
                if (!(hi > lo)) return 0.0;
                std::vector<double> cuts{lo};
                for (double x : xs)
                    if (x > lo && x < hi) cuts.push_back(x);
                cuts.push_back(hi);
                double s = 0.0;
                for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
                    s += quad::integrate(
                        [&](double y) { return (order == 0 ? 1.0 : y) * (*c.table)(y); }, cuts[k],
                        cuts[k + 1], 1);
                return s;
            }
        }
        return 0.0;
    }

    std::vector<Component> components_;
};

}  // namespace prion
