#include "volterra/impact.hpp"

#include "volterra/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace volterra {

void PiecewisePower::validate() const {
    if (!(x0 > 0.0)) throw std::invalid_argument("PiecewisePower: x0 must be > 0");
    if (!(c > 0.0 && c <= 1.0)) throw std::invalid_argument("PiecewisePower: c must be in (0, 1]");
}

void validate(const ImpactParams& p) {
    if (const auto* pp = std::get_if<PiecewisePower>(&p)) pp->validate();
}

namespace {

// Inner expression (1/c)|x| x0^{1/c-1} - (1/c-1) x0^{1/c}; positive for |x| > x0.
double power_inner(const PiecewisePower& pp, double ax) {
    const double ic = 1.0 / pp.c;
    return ic * ax * std::pow(pp.x0, ic - 1.0) - (ic - 1.0) * std::pow(pp.x0, ic);
}

}  // namespace

double impact_h(const ImpactParams& p, double x) {
    if (std::holds_alternative<IdentityImpact>(p)) return x;
    const auto& pp = std::get<PiecewisePower>(p);
    const double ax = std::abs(x);
    if (ax <= pp.x0) return x;
    return std::copysign(std::pow(power_inner(pp, ax), pp.c), x);
}

double impact_h_prime(const ImpactParams& p, double x) {
    if (std::holds_alternative<IdentityImpact>(p)) return 1.0;
    const auto& pp = std::get<PiecewisePower>(p);
    const double ax = std::abs(x);
    if (ax <= pp.x0) return 1.0;
    return std::pow(pp.x0, 1.0 / pp.c - 1.0) * std::pow(power_inner(pp, ax), pp.c - 1.0);
}

double impact_h_second(const ImpactParams& p, double x) {
    if (std::holds_alternative<IdentityImpact>(p)) return 0.0;
    const auto& pp = std::get<PiecewisePower>(p);
    const double ax = std::abs(x);
    if (ax == pp.x0) throw std::invalid_argument("impact_h_second: undefined at the knot +-x0");
    if (ax < pp.x0) return 0.0;
    const double ic = 1.0 / pp.c;
    const double val = (pp.c - 1.0) * ic * std::pow(pp.x0, 2.0 * (ic - 1.0)) *
                       std::pow(power_inner(pp, ax), pp.c - 2.0);
    return x > 0.0 ? val : -val;
}

double arrow_pratt_ratio(const ImpactParams& p, double x) {
    if (std::holds_alternative<IdentityImpact>(p)) return 0.0;
    const auto& pp = std::get<PiecewisePower>(p);
    const double ax = std::abs(x);
    if (ax == pp.x0) throw std::invalid_argument("arrow_pratt_ratio: undefined at the knot +-x0");
    if (ax < pp.x0) return 0.0;
    return (1.0 - pp.c) * ax / (ax - (1.0 - pp.c) * pp.x0);
}

double impact_h_prime_sup(const ImpactParams&) { return 1.0; }

double impact_h_prime_lipschitz(const ImpactParams& p) {
    if (std::holds_alternative<IdentityImpact>(p)) return 0.0;
    const auto& pp = std::get<PiecewisePower>(p);
    // One-sided sup of |h''| sits at the knot: ((1-c)/c)/x0.
    return (1.0 - pp.c) / (pp.c * pp.x0);
}

Eigen::MatrixXd impact_h(const ImpactParams& p, const Eigen::MatrixXd& x) {
    return x.unaryExpr([&p](double v) { return impact_h(p, v); });
}

Eigen::MatrixXd impact_h_prime(const ImpactParams& p, const Eigen::MatrixXd& x) {
    return x.unaryExpr([&p](double v) { return impact_h_prime(p, v); });
}

MonotonicityReport check_exponential_monotonicity_conditions(const ImpactParams& p, int samples,
                                                             double range, std::uint64_t seed) {
    if (samples < 2)
        throw std::invalid_argument("check_exponential_monotonicity_conditions: samples >= 2");
    validate(p);
    CounterRng rng(seed, 0);
    std::vector<double> xs(samples);
    for (auto& x : xs) x = range * (2.0 * rng.next_uniform() - 1.0);
    std::sort(xs.begin(), xs.end());

    MonotonicityReport report;
    for (int i = 1; i < samples; ++i) {
        const double a = xs[i - 1], b = xs[i];
        const double dh = impact_h(p, b) - impact_h(p, a);
        // x h'(x) with the knot excluded (h'' does not exist there).
        auto xhp = [&](double x) {
            if (const auto* pp = std::get_if<PiecewisePower>(&p);
                pp && std::abs(x) == pp->x0)
                return x;  // h' = 1 at the knot by continuity
            return x * impact_h_prime(p, x);
        };
        const double dxhp = xhp(b) - xhp(a);
        report.checks += 2;
        const double worst = std::min(dh, dxhp);
        report.min_value = std::min(report.min_value, worst);
        if (dh < -1e-12) report.violations.push_back(dh);
        if (dxhp < -1e-12) report.violations.push_back(dxhp);
    }
    report.passed = report.violations.empty();
    return report;
}

MonotonicityReport sample_monotonicity_of_operator(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& op, const TimeGrid& grid,
    int pairs, double range, std::uint64_t seed, double tolerance) {
    const Eigen::Index n = grid.size();
    auto smooth_path = [&](CounterRng& rng) {
        // Random cubic in the Legendre basis, scaled to the requested range.
        // The paths must be resolved on the grid: rough paths feed the
        // O(delta) quadrature defect of the zero-diagonal Nystrom matrices
        // into the form and mask the sign being sampled.
        const double c0 = rng.next_normal(), c1 = rng.next_normal();
        const double c2 = rng.next_normal(), c3 = rng.next_normal();
        const double scale =
            range / (2.0 * std::max(1.0, std::sqrt(c0 * c0 + c1 * c1 + c2 * c2 + c3 * c3)));
        Eigen::VectorXd path(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double x = 2.0 * grid.point(i) / grid.horizon() - 1.0;
            const double p2 = 0.5 * (3.0 * x * x - 1.0);
            const double p3 = 0.5 * (5.0 * x * x * x - 3.0 * x);
            path[i] = scale * (c0 + c1 * x + c2 * p2 + c3 * p3);
        }
        return path;
    };

    MonotonicityReport report;
    for (int k = 0; k < pairs; ++k) {
        CounterRng rng(seed, static_cast<std::uint64_t>(k));
        const Eigen::VectorXd u = smooth_path(rng);
        const Eigen::VectorXd v = smooth_path(rng);
        const Eigen::VectorXd diff = u - v;
        const double inner = grid.step() * diff.dot(op(u) - op(v));
        ++report.checks;
        report.min_value = std::min(report.min_value, inner);
        if (inner < -tolerance) report.violations.push_back(inner);
    }
    report.passed = report.violations.empty();
    return report;
}

}  // namespace volterra
