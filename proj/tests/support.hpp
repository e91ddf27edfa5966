#pragma once

#include <random>
#include <vector>

#include "prion/config.hpp"
#include "prion/initial_data.hpp"
#include "prion/kernels.hpp"

namespace prion::testing {

/// tau = mu = eta = 1, beta(y) = y, k0 = 1, lambda = gamma = 1.
inline RateSet baseline_rates(double nu = 0.0) {
    return make_power_law_rates({1.0, 1.0, 1.0, 0.0, 1.0, 0.0, 1.0}, {1.0, 1.0, nu, 1.0});
}

inline SimulationSetup baseline_setup(std::size_t cells = 400, double nu = 0.0) {
    RunConfig c;
    c.rates.nu = nu;
    c.grid.cells = cells;
    return make_setup(c);
}

inline std::vector<double> random_density(std::mt19937_64& rng, std::size_t n, double zero_fraction = 0.2) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> u(n);
    for (auto& x : u) x = unit(rng) < zero_fraction ? 0.0 : unit(rng);
    return u;
}

/// Density values k / 2^10 with k in [0, 2^10]; sums and products of these
/// on a grid with dyadic pivots are exact in double precision.
inline std::vector<double> dyadic_density(std::mt19937_64& rng, std::size_t n) {
    std::uniform_int_distribution<int> k(0, 1024);
    std::vector<double> u(n);
    for (auto& x : u) x = static_cast<double>(k(rng)) / 1024.0;
    return u;
}

}  // namespace prion::testing
