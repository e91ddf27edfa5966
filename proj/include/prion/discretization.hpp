#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "prion/errors.hpp"
#include "prion/grid.hpp"
#include "prion/kernels.hpp"

namespace prion {

/// Rate of change produced by one mechanism of the polymer equation.
struct OperatorOutput {
    /// Per-cell rate of change of the cell-averaged density.
    std::vector<double> du;
    /// Net monomers per unit time handed back to the pool by splitting:
    /// fragments below the critical size minus promotion_draw.
    double monomer_return = 0.0;
    /// Monomers per unit time used to lift fragments that land between y0 and
    /// the first pivot up to that pivot (number-preserving placement).
    double promotion_draw = 0.0;
    /// First moment per unit time leaving the truncated domain.
    double overflow = 0.0;
    /// Polymers per unit time leaving the truncated domain.
    double overflow_number = 0.0;
    /// First moment per unit time removed by polymer degradation (sum y mu n).
    double mu_loss = 0.0;
    /// Monomers per unit time attached to polymers by polymerization.
    double consumption = 0.0;
};

namespace detail {
inline void require_size(const Grid& g, std::span<const double> u) {
    if (u.size() != g.size()) throw ContractViolation("density vector does not match the grid");
}
}  // namespace detail

/// Fragmentation with fixed-pivot redistribution. For every parent pivot y_j
/// the daughters falling between two consecutive pivots are shared between
/// them so that both their number and their first moment are reproduced
/// exactly; daughters below y0 are returned as monomers; daughters between y0
/// and the first pivot are moved to the first pivot preserving their number,
/// the missing first moment being taken from the returned monomers (falls
/// back to first-moment-preserving placement if the return does not cover
/// it). The redistribution matrix is built once per (grid, rates).
class SplittingOperator {
public:
    SplittingOperator() = default;

    SplittingOperator(const Grid& grid, const RateSet& rates) : grid_(grid) {
        const auto n = grid.size();
        const auto& y = grid.centers();
        beta_.resize(n);
        mu_.resize(n);
        moment_weight_.resize(n);
        monomer_weight_.resize(n);
        subcritical_weight_.resize(n);
        gain_.assign(n * n, 0.0);
        const bool uniform_k0 = rates.k0.kind() == DaughterProfile::Kind::uniform;
        for (std::size_t j = 0; j < n; ++j) {
            const double yj = y[j];
            beta_[j] = rates.beta(yj);
            mu_[j] = rates.mu(yj);
            moment_weight_[j] = yj * mu_[j];
            // number and first moment of the daughters of one parent in (a, b)
            auto number = [&](double a, double b) {
                if (uniform_k0) return 2.0 * (b - a) / yj;
                return 2.0 * (rates.k0.cumulative(b / yj) - rates.k0.cumulative(a / yj));
            };
            auto mass = [&](double a, double b) {
                if (uniform_k0) return (b - a) * (b + a) / yj;
                return 2.0 * yj * (rates.k0.first_moment(b / yj) - rates.k0.first_moment(a / yj));
            };
            double* col = gain_.data() + j * n;
            // daughters in (y0, y_0) are promoted to the first pivot with
            // their number kept; the monomers needed to lift them come out of
            // the sub-critical return of the same parent
            const double returned = mass(0.0, rates.y0);
            const double low_count = number(rates.y0, y[0]);
            const double draw = low_count * y[0] - mass(rates.y0, y[0]);
            subcritical_weight_[j] = returned;
            if (draw <= returned) {
                col[0] += low_count;
                monomer_weight_[j] = returned - draw;
            } else {
                col[0] += mass(rates.y0, y[0]) / y[0];
                monomer_weight_[j] = returned;
            }
            for (std::size_t i = 0; i < j; ++i) {
                const double a = y[i], b = y[i + 1];
                const double cnt = number(a, b);
                const double mom = mass(a, b);
                const double upper = (mom - a * cnt) / (b - a);
                col[i + 1] += upper;
                col[i] += cnt - upper;
            }
        }
    }

    OperatorOutput apply(std::span<const double> u) const {
        detail::require_size(grid_, u);
        const auto n = grid_.size();
        const auto& w = grid_.widths();
        OperatorOutput out;
        out.du.assign(n, 0.0);
        std::vector<double> gain(n, 0.0);
        double ret = 0.0, sub = 0.0, mu_loss = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double nj = u[j] * w[j];
            const double bj = beta_[j] * nj;
            mu_loss += moment_weight_[j] * nj;
            if (bj == 0.0) continue;
            ret += monomer_weight_[j] * bj;
            sub += subcritical_weight_[j] * bj;
            const double* col = gain_.data() + j * n;
            for (std::size_t i = 0; i <= j; ++i) gain[i] += col[i] * bj;
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double ni = u[i] * w[i];
            out.du[i] = (gain[i] - (mu_[i] + beta_[i]) * ni) / w[i];
        }
        out.monomer_return = ret;
        out.promotion_draw = sub - ret;
        out.mu_loss = mu_loss;
        return out;
    }

    /// Daughters deposited at pivot i per unit splitting event of parent j
    /// (includes the factor two for binary splitting).
    double gain_coefficient(std::size_t i, std::size_t j) const { return gain_[j * grid_.size() + i]; }

    /// Net first moment returned as monomers per splitting event of parent j.
    double monomer_coefficient(std::size_t j) const { return monomer_weight_[j]; }

    /// First moment of the fragments below y0 per splitting event of parent j.
    double subcritical_coefficient(std::size_t j) const { return subcritical_weight_[j]; }

    /// mu + beta at pivot i.
    double loss_rate(std::size_t i) const { return mu_[i] + beta_[i]; }

private:
    Grid grid_;
    std::vector<double> beta_;
    std::vector<double> mu_;
    std::vector<double> moment_weight_;
    std::vector<double> monomer_weight_;
    std::vector<double> subcritical_weight_;
    std::vector<double> gain_;  // column-major: gain_[j * n + i]
};

/// Pairwise joining. Each ordered pair of cells (i, j) reacts with intensity
/// eta(y_i, y_j) n_i n_j; both partners are removed and the product of size
/// y_i + y_j is shared between the two pivots bracketing it with weights that
/// reproduce its size. Products beyond the last pivot leave the domain and are
/// booked as overflow.
class JoiningOperator {
public:
    JoiningOperator() = default;

    JoiningOperator(const Grid& grid, const JoiningRate& eta, bool force_pairwise = false)
        : grid_(grid) {
        const auto n = grid.size();
        const auto& y = grid.centers();
        constant_ = eta.is_constant();
        eta_const_ = eta.is_constant() ? eta.coefficient() : 0.0;
        by_sum_index_ = grid.mode() == GridMode::uniform && !force_pairwise;
        if (!constant_) {
            table_.resize(n * n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) table_[i * n + j] = eta(y[i], y[j]);
        }
        if (by_sum_index_) {
            // uniform grid: the product size depends on i + j only
            const double h = grid.widths().front();
            targets_.resize(2 * n - 1);
            for (std::size_t m = 0; m + 1 < 2 * n; ++m)
                targets_[m] = make_target(2.0 * grid.y0() + h * static_cast<double>(m + 1));
        } else {
            targets_.resize(n * n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i; j < n; ++j) targets_[i * n + j] = make_target(y[i] + y[j]);
        }
    }

    OperatorOutput apply(std::span<const double> u) const {
        detail::require_size(grid_, u);
        const auto n = grid_.size();
        const auto& w = grid_.widths();
        std::vector<double> a(n);
        for (std::size_t i = 0; i < n; ++i) a[i] = u[i] * w[i];

        std::vector<double> number(n, 0.0);
        // loss: 2 n_i sum_j eta_ij n_j
        if (constant_) {
            double total = 0.0;
            for (double x : a) total += x;
            for (std::size_t i = 0; i < n; ++i) number[i] = -2.0 * eta_const_ * a[i] * total;
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                const double* row = table_.data() + i * n;
                double s = 0.0;
                for (std::size_t j = 0; j < n; ++j) s += row[j] * a[j];
                number[i] = -2.0 * a[i] * s;
            }
        }

        OperatorOutput out;
        if (by_sum_index_) {
            std::vector<double> pair_sum(2 * n - 1, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const double ai = a[i];
                if (ai == 0.0) continue;
                double* dst = pair_sum.data() + i;
                if (constant_) {
                    dst[i] += ai * ai;
                    const double t = 2.0 * ai;
                    for (std::size_t j = i + 1; j < n; ++j) dst[j] += t * a[j];
                } else {
                    const double* row = table_.data() + i * n;
                    dst[i] += row[i] * ai * ai;
                    const double t = 2.0 * ai;
                    for (std::size_t j = i + 1; j < n; ++j) dst[j] += t * row[j] * a[j];
                }
            }
            const double scale = constant_ ? eta_const_ : 1.0;
            for (std::size_t m = 0; m < pair_sum.size(); ++m) {
                const double r = scale * pair_sum[m];
                if (r != 0.0) deposit(targets_[m], r, number, out);
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                const double ai = a[i];
                if (ai == 0.0) continue;
                for (std::size_t j = i; j < n; ++j) {
                    const double e = constant_ ? eta_const_ : table_[i * n + j];
                    const double r = (i == j ? 1.0 : 2.0) * e * ai * a[j];
                    if (r != 0.0) deposit(targets_[i * n + j], r, number, out);
                }
            }
        }
        out.du.resize(n);
        for (std::size_t i = 0; i < n; ++i) out.du[i] = number[i] / w[i];
        return out;
    }

    /// Per-cell joining loss rate 2 sum_j eta_ij n_j (per unit density in cell i).
    std::vector<double> loss_rates(std::span<const double> u) const {
        detail::require_size(grid_, u);
        const auto n = grid_.size();
        const auto& w = grid_.widths();
        std::vector<double> out(n, 0.0);
        if (constant_) {
            double total = 0.0;
            for (std::size_t j = 0; j < n; ++j) total += u[j] * w[j];
            for (auto& x : out) x = 2.0 * eta_const_ * total;
            return out;
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = table_.data() + i * n;
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += row[j] * u[j] * w[j];
            out[i] = 2.0 * s;
        }
        return out;
    }

private:
    struct Target {
        std::uint32_t lower = 0;
        bool inside = false;
        bool single = false;
        double upper_weight = 0.0;
        double size = 0.0;
    };

    Target make_target(double s) const {
        Target t;
        t.size = s;
        const auto k = grid_.bracket(s);
        if (k == Grid::npos) return t;
        t.inside = true;
        t.lower = static_cast<std::uint32_t>(k);
        const auto& y = grid_.centers();
        if (k + 1 >= grid_.size()) {
            t.single = true;
        } else {
            t.upper_weight = (s - y[k]) / (y[k + 1] - y[k]);
        }
        return t;
    }

    static void deposit(const Target& t, double r, std::vector<double>& number, OperatorOutput& out) {
        if (!t.inside) {
            out.overflow += t.size * r;
            out.overflow_number += r;
            return;
        }
        if (t.single) {
            number[t.lower] += r;
            return;
        }
        const double up = t.upper_weight * r;
        number[t.lower] += r - up;
        number[t.lower + 1] += up;
    }

    Grid grid_;
    bool constant_ = true;
    bool by_sum_index_ = true;
    double eta_const_ = 0.0;
    std::vector<double> table_;
    std::vector<Target> targets_;
};

/// First-order upwind polymerization. The flux through the right edge of
/// cell i is s * tau(edge) * u_i with speed factor s = v / (1 + nu M1); no
/// inflow at y0; the flux through ymax leaves the domain.
class TransportOperator {
public:
    TransportOperator() = default;

    TransportOperator(const Grid& grid, const RateSet& rates) : grid_(grid), nu_(rates.nu) {
        const auto n = grid.size();
        const auto& e = grid.edges();
        const auto& y = grid.centers();
        tau_edge_.resize(n);
        lever_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            tau_edge_[i] = rates.tau(e[i + 1]);
            lever_[i] = (i + 1 < n ? y[i + 1] : grid.ymax()) - y[i];
        }
    }

    double speed(double v, double first_moment) const { return v / (1.0 + nu_ * first_moment); }

    OperatorOutput apply(std::span<const double> u, double v, double first_moment) const {
        detail::require_size(grid_, u);
        if (v < 0.0) throw ContractViolation("transport: monomer count must be nonnegative");
        const auto n = grid_.size();
        const auto& w = grid_.widths();
        const double s = speed(v, first_moment);
        OperatorOutput out;
        out.du.resize(n);
        double inflow = 0.0;
        double consumption = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double flux = s * tau_edge_[i] * u[i];
            out.du[i] = (inflow - flux) / w[i];
            consumption += flux * lever_[i];
            inflow = flux;
        }
        out.overflow_number = inflow;
        out.overflow = grid_.ymax() * inflow;
        out.consumption = consumption;
        return out;
    }

    /// Largest per-cell outflow rate s * tau / width at unit speed.
    double max_rate_per_speed() const {
        double r = 0.0;
        for (std::size_t i = 0; i < tau_edge_.size(); ++i)
            r = std::max(r, tau_edge_[i] / grid_.widths()[i]);
        return r;
    }

    double edge_tau(std::size_t i) const { return tau_edge_[i]; }

    /// Monomer consumption per unit speed: sum tau(edge) u_i lever_i.
    double consumption_per_speed(std::span<const double> u) const {
        double c = 0.0;
        for (std::size_t i = 0; i < tau_edge_.size(); ++i) c += tau_edge_[i] * u[i] * lever_[i];
        return c;
    }

private:
    Grid grid_;
    double nu_ = 0.0;
    std::vector<double> tau_edge_;
    std::vector<double> lever_;
};

inline OperatorOutput splitting_operator(std::span<const double> u, const Grid& grid,
                                         const RateSet& rates) {
    return SplittingOperator(grid, rates).apply(u);
}

inline OperatorOutput joining_operator(std::span<const double> u, const Grid& grid,
                                       const JoiningRate& eta) {
    return JoiningOperator(grid, eta).apply(u);
}

inline OperatorOutput transport_operator(std::span<const double> u, double v, const Grid& grid,
                                         const RateSet& rates, double first_moment) {
    return TransportOperator(grid, rates).apply(u, v, first_moment);
}

}  // namespace prion
