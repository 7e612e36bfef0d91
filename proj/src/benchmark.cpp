#include "volterra/benchmark.hpp"

#include <cmath>
#include <stdexcept>

namespace volterra {

void BenchmarkParams::validate() const {
    if (!(tau > 0.0)) throw std::invalid_argument("BenchmarkParams: tau must be > 0");
    if (!(c >= 0.5 && c <= 1.0))
        throw std::invalid_argument("BenchmarkParams: c must lie in [1/2, 1]");
}

namespace {

inline double signed_power(double x, double p) {
    return std::copysign(std::pow(std::abs(x), p), x);
}

}  // namespace

BenchmarkSolution explicit_benchmark(const BenchmarkParams& params, const PathEnsemble& drift,
                                     const PathEnsemble& alpha) {
    params.validate();
    if (drift.paths() != alpha.paths() || drift.steps() != alpha.steps())
        throw std::invalid_argument("explicit_benchmark: drift/alpha shape mismatch");

    const TimeGrid& grid = drift.grid;
    const Eigen::Index m = drift.paths();
    const Eigen::Index n = drift.steps();
    const double dt = grid.step();
    const double inv_c = 1.0 / params.c;

    const Eigen::MatrixXd forcing = alpha.values + params.tau * drift.values;

    Eigen::MatrixXd impact = forcing / (1.0 + params.c);
    impact.col(0).setZero();      // I*_0 = 0
    impact.col(n - 1).setZero();  // I*_T = alpha_T = 0

    Eigen::MatrixXd dist = impact.unaryExpr([&](double v) { return signed_power(v, inv_c); });

    // Smooth part of Q*: J* + (1/tau) int_0^t sign(F)(|F|/(1+c))^{1/c} ds.
    Eigen::MatrixXd volume(m, n);
    Eigen::VectorXd integral = Eigen::VectorXd::Zero(m);
    for (Eigen::Index j = 0; j < n; ++j) {
        volume.col(j) = dist.col(j) + integral / params.tau;
        if (j + 1 < n)
            integral += dt * forcing.col(j).unaryExpr([&](double v) {
                return signed_power(v / (1.0 + params.c), inv_c);
            });
    }

    BenchmarkSolution out;
    out.bulk_open = forcing.col(0).unaryExpr(
        [&](double v) { return signed_power(v / (1.0 + params.c), inv_c); });
    // Delta Q_T = -sign(I~_T) |tau I~_T / (1+c)|^{1/c} cancels J*_{T-}.
    out.bulk_close = drift.values.col(n - 1).unaryExpr([&](double v) {
        return -signed_power(params.tau * v / (1.0 + params.c), inv_c);
    });
    // Q*_{0+} = J*_{0+} is the opening bulk itself; before it, Q*_0 = 0.
    volume.col(0).setZero();

    out.optimal_impact = PathEnsemble(grid, std::move(impact), "benchmark_impact");
    out.optimal_distortion = PathEnsemble(grid, std::move(dist), "benchmark_distortion");
    out.traded_volume = PathEnsemble(grid, std::move(volume), "benchmark_volume");
    return out;
}

double interior_mean_distance(const PathEnsemble& a, const PathEnsemble& b) {
    if (a.steps() != b.steps()) throw std::invalid_argument("interior_mean_distance: grid mismatch");
    const Eigen::Index n = a.steps();
    if (n < 4) throw std::invalid_argument("interior_mean_distance: grid too small");
    const Eigen::RowVectorXd ma = a.values.colwise().mean();
    const Eigen::RowVectorXd mb = b.values.colwise().mean();
    const Eigen::RowVectorXd diff = (ma - mb).segment(1, n - 2);
    return std::sqrt(a.grid.step() * diff.squaredNorm());
}

}  // namespace volterra
