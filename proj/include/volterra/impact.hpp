#pragma once

#include "volterra/time_grid.hpp"

#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

namespace volterra {

struct IdentityImpact {};

/// Piecewise impact family: linear inside [-x0, x0], concave power branch
/// sign(x) ((1/c)|x| x0^{1/c-1} - (1/c-1) x0^{1/c})^c outside.
struct PiecewisePower {
    double x0 = 0.5;  ///< knot, > 0
    double c = 1.0;   ///< concavity exponent in (0, 1]
    void validate() const;
};

using ImpactParams = std::variant<IdentityImpact, PiecewisePower>;

void validate(const ImpactParams& p);

double impact_h(const ImpactParams& p, double x);
/// Derivative; equals 1 on [-x0, x0] and is continuous at the knot.
double impact_h_prime(const ImpactParams& p, double x);
/// Second derivative; undefined at +-x0 (rejected), zero inside the knot.
double impact_h_second(const ImpactParams& p, double x);
/// Arrow-Pratt ratio R(x) = -x h''(x) / h'(x); sup over |x| > x0 is (1-c)/c.
double arrow_pratt_ratio(const ImpactParams& p, double x);

/// sup |h'| (1 for both variants).
double impact_h_prime_sup(const ImpactParams& p);
/// Lipschitz constant of h': one-sided sup of |h''|, attained at the knot,
/// ((1-c)/c)/x0 for the power family, 0 for identity / c = 1.
double impact_h_prime_lipschitz(const ImpactParams& p);

Eigen::MatrixXd impact_h(const ImpactParams& p, const Eigen::MatrixXd& x);
Eigen::MatrixXd impact_h_prime(const ImpactParams& p, const Eigen::MatrixXd& x);

struct MonotonicityReport {
    bool passed = true;
    double min_value = 0.0;                  ///< most negative statistic observed
    std::vector<double> violations;          ///< values beyond tolerance
    int checks = 0;
};

/// Samples whether h and x -> x h'(x) are nondecreasing over sorted random
/// points in [-range, range] (the exponential-kernel monotonicity conditions).
MonotonicityReport check_exponential_monotonicity_conditions(const ImpactParams& p, int samples,
                                                             double range, std::uint64_t seed);

/// Samples <u - v, A(u) - A(v)> over random pairs of smooth bounded grid
/// paths.  Paths are random walks passed through a short box filter: white
/// noise is not grid-resolved and its quadrature error alone (order delta)
/// would swamp the sign of the form under the zero-diagonal Nystrom matrices.
MonotonicityReport sample_monotonicity_of_operator(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& op, const TimeGrid& grid,
    int pairs, double range, std::uint64_t seed, double tolerance = 1e-10);

}  // namespace volterra
