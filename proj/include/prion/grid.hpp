#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "prion/errors.hpp"

namespace prion {

enum class GridMode { uniform, geometric };

inline const char* to_string(GridMode m) { return m == GridMode::uniform ? "uniform" : "geometric"; }

/// Partition of the truncated size range [y0, ymax] into cells. Each cell
/// carries one pivot at its midpoint; the number of polymers in cell i is
/// u_i * width_i and is located at the pivot.
class Grid {
public:
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    Grid() = default;

    static Grid uniform(double y0, double ymax, std::size_t cells) {
        return make(y0, ymax, cells, GridMode::uniform);
    }

    static Grid geometric(double y0, double ymax, std::size_t cells) {
        return make(y0, ymax, cells, GridMode::geometric);
    }

    static Grid make(double y0, double ymax, std::size_t cells, GridMode mode) {
        if (!(y0 > 0.0)) throw InvalidParameter("grid: y0 must be > 0");
        if (!(ymax > 2.0 * y0)) throw InvalidParameter("grid: ymax must exceed 2 y0");
        if (cells < 2) throw InvalidParameter("grid: need at least two cells");
        Grid g;
        g.y0_ = y0;
        g.ymax_ = ymax;
        g.mode_ = mode;
        const auto n = cells;
        g.edges_.resize(n + 1);
        g.centers_.resize(n);
        g.widths_.resize(n);
        if (mode == GridMode::uniform) {
            const double h = (ymax - y0) / static_cast<double>(n);
            g.ratio_ = 1.0;
            for (std::size_t k = 0; k <= n; ++k) g.edges_[k] = y0 + h * static_cast<double>(k);
            g.edges_[n] = ymax;
            for (std::size_t k = 0; k < n; ++k) {
                g.widths_[k] = h;
                g.centers_[k] = y0 + h * (static_cast<double>(k) + 0.5);
            }
        } else {
            const double q = std::pow(ymax / y0, 1.0 / static_cast<double>(n));
            g.ratio_ = q;
            for (std::size_t k = 0; k <= n; ++k)
                g.edges_[k] = y0 * std::pow(q, static_cast<double>(k));
            g.edges_[0] = y0;
            g.edges_[n] = ymax;
            for (std::size_t k = 0; k < n; ++k) {
                g.widths_[k] = g.edges_[k + 1] - g.edges_[k];
                g.centers_[k] = 0.5 * (g.edges_[k] + g.edges_[k + 1]);
            }
        }
        return g;
    }

    std::size_t size() const { return centers_.size(); }
    double y0() const { return y0_; }
    double ymax() const { return ymax_; }
    GridMode mode() const { return mode_; }
    /// Width ratio of consecutive cells (1 for uniform grids).
    double ratio() const { return ratio_; }
    const std::vector<double>& edges() const { return edges_; }
    const std::vector<double>& centers() const { return centers_; }
    const std::vector<double>& widths() const { return widths_; }

    /// Index k of the pivot pair bracketing s (centers[k] <= s < centers[k+1]);
    /// size()-1 when s equals the last pivot; npos outside the pivot range.
    std::size_t bracket(double s) const {
        if (s < centers_.front() || s > centers_.back()) return npos;
        if (mode_ == GridMode::uniform) {
            const double h = widths_.front();
            auto k = static_cast<std::size_t>(std::floor((s - centers_.front()) / h));
            k = std::min(k, size() - 1);
            while (k > 0 && centers_[k] > s) --k;
            while (k + 1 < size() && centers_[k + 1] <= s) ++k;
            return k;
        }
        auto it = std::upper_bound(centers_.begin(), centers_.end(), s);
        return static_cast<std::size_t>(it - centers_.begin()) - 1;
    }

    /// Index of the cell containing y (right-closed at ymax), npos outside.
    std::size_t cell_of(double y) const {
        if (y < y0_ || y > ymax_) return npos;
        auto it = std::upper_bound(edges_.begin(), edges_.end(), y);
        const auto k = static_cast<std::size_t>(it - edges_.begin());
        return k == 0 ? npos : std::min(k - 1, size() - 1);
    }

    bool same_as(const Grid& other) const {
        return mode_ == other.mode_ && edges_ == other.edges_;
    }

private:
    double y0_ = 1.0;
    double ymax_ = 2.0;
    double ratio_ = 1.0;
    GridMode mode_ = GridMode::uniform;
    std::vector<double> edges_;
    std::vector<double> centers_;
    std::vector<double> widths_;
};

/// Sum over cells of y^order * u * width.
inline double grid_moment(const Grid& g, const std::vector<double>& u, double order) {
    double s = 0.0;
    const auto& y = g.centers();
    const auto& w = g.widths();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double yp = order == 0.0 ? 1.0 : (order == 1.0 ? y[i] : std::pow(y[i], order));
        s += yp * u[i] * w[i];
    }
    return s;
}

}  // namespace prion
