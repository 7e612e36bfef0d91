#pragma once

#include "volterra/time_grid.hpp"

#include <cstdint>

namespace volterra {

/// Ornstein-Uhlenbeck drift signal dI = (theta - kappa I) dt + xi dW.
struct OUSignalParams {
    double theta = 0.0;   ///< mean-level drift
    double kappa = 1.0;   ///< mean-reversion speed, > 0
    double xi = 0.0;      ///< volatility, >= 0
    double i0 = 0.0;      ///< initial value

    void validate() const;
    double mean_level() const { return theta / kappa; }
    /// Deterministic mean path value at time t.
    double mean_at(double t) const;
};

/// Exact-transition OU sampling on the grid.  With antithetic on, rows
/// (2k, 2k+1) share a noise stream with negated increments; each even row
/// derives its stream from (seed, row), so results do not depend on how rows
/// are scheduled across threads.
PathEnsemble simulate_ou(const OUSignalParams& params, const TimeGrid& grid,
                         Eigen::Index paths, std::uint64_t seed,
                         bool antithetic = false, int threads = 1);

/// Closed-form alpha signal from the drift path:
/// alpha_t = (I_t - theta/kappa)(1 - e^{-kappa (T-t)})/kappa + (theta/kappa)(T-t).
PathEnsemble alpha_from_drift(const PathEnsemble& drift, const OUSignalParams& params);

/// Effective signal absorbing the inventory penalties:
/// alpha~_t = alpha_t - X0 (phi (T-t) + varrho).
PathEnsemble effective_alpha(const PathEnsemble& alpha, double x0_inventory,
                             double phi, double varrho);

/// Left-rectangle running inventory X_t = X0 + sum_{j<i} delta u_j.
PathEnsemble inventory_from_rate(const PathEnsemble& rate, double x0_inventory);

}  // namespace volterra
