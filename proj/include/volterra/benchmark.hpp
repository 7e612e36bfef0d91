#pragma once

#include "volterra/ou_signal.hpp"
#include "volterra/time_grid.hpp"

namespace volterra {

/// Vanishing-slippage closed form for the single-exponential kernel with pure
/// power impact sign(x)|x|^c and Kyle's lambda fixed to 1.
struct BenchmarkParams {
    double tau = 1.0;  ///< exponential impact time decay, > 0
    double c = 1.0;    ///< power exponent in [1/2, 1]
    void validate() const;
};

struct BenchmarkSolution {
    PathEnsemble optimal_impact;     ///< I*_t, zero at both endpoints
    PathEnsemble optimal_distortion; ///< J*_t = sign(I*)|I*|^{1/c}
    PathEnsemble traded_volume;      ///< Q*_t on (0, T], smooth part + initial bulk
    Eigen::VectorXd bulk_open;       ///< Delta Q_0 per path
    Eigen::VectorXd bulk_close;      ///< Delta Q_T per path
};

/// I* = (alpha + tau I~)/(1+c) pointwise with the boundary values pinned to 0,
/// J* its power inverse, Q* by left-rectangle quadrature of J*/tau; the two
/// bulk trades are returned separately.
BenchmarkSolution explicit_benchmark(const BenchmarkParams& params, const PathEnsemble& drift,
                                     const PathEnsemble& alpha);

/// Discrete L2 distance between two mean paths on the open interior
/// (endpoints excluded: the benchmark jumps there and rate-based inventories
/// cannot).
double interior_mean_distance(const PathEnsemble& a, const PathEnsemble& b);

}  // namespace volterra
