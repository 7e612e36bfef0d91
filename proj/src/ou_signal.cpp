#include "volterra/ou_signal.hpp"

#include "volterra/parallel.hpp"
#include "volterra/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace volterra {

void OUSignalParams::validate() const {
    if (!(kappa > 0.0)) throw std::invalid_argument("OUSignalParams: kappa must be > 0");
    if (xi < 0.0) throw std::invalid_argument("OUSignalParams: xi must be >= 0");
}

double OUSignalParams::mean_at(double t) const {
    const double m = mean_level();
    return m + (i0 - m) * std::exp(-kappa * t);
}

PathEnsemble simulate_ou(const OUSignalParams& params, const TimeGrid& grid,
                         Eigen::Index paths, std::uint64_t seed,
                         bool antithetic, int threads) {
    params.validate();
    if (paths < 1) throw std::invalid_argument("simulate_ou: need at least one path");
    if (antithetic && paths % 2 != 0)
        throw std::invalid_argument("simulate_ou: antithetic pairing needs an even path count");

    const Eigen::Index n = grid.size();
    const double dt = grid.step();
    const double decay = std::exp(-params.kappa * dt);
    const double mean = params.mean_level();
    const double stddev =
        params.xi * std::sqrt(-std::expm1(-2.0 * params.kappa * dt) / (2.0 * params.kappa));

    Eigen::MatrixXd values(paths, n);
    auto fill_row = [&](Eigen::Index row, CounterRng& rng, double sign) {
        values(row, 0) = params.i0;
        for (Eigen::Index j = 1; j < n; ++j) {
            const double z = (stddev > 0.0) ? sign * rng.next_normal() : 0.0;
            values(row, j) = mean + (values(row, j - 1) - mean) * decay + stddev * z;
        }
    };

    if (antithetic) {
        parallel_for(paths / 2, threads, [&](std::ptrdiff_t lo, std::ptrdiff_t hi) {
            for (std::ptrdiff_t k = lo; k < hi; ++k) {
                CounterRng rng(seed, static_cast<std::uint64_t>(2 * k));
                fill_row(2 * k, rng, 1.0);
                CounterRng mirror(seed, static_cast<std::uint64_t>(2 * k));
                fill_row(2 * k + 1, mirror, -1.0);
            }
        });
    } else {
        parallel_for(paths, threads, [&](std::ptrdiff_t lo, std::ptrdiff_t hi) {
            for (std::ptrdiff_t m = lo; m < hi; ++m) {
                CounterRng rng(seed, static_cast<std::uint64_t>(m));
                fill_row(m, rng, 1.0);
            }
        });
    }
    return PathEnsemble(grid, std::move(values), "drift");
}

PathEnsemble alpha_from_drift(const PathEnsemble& drift, const OUSignalParams& params) {
    params.validate();
    const TimeGrid& grid = drift.grid;
    const double T = grid.horizon();
    const double mean = params.mean_level();
    Eigen::MatrixXd values(drift.paths(), drift.steps());
    for (Eigen::Index j = 0; j < drift.steps(); ++j) {
        const double ttm = T - grid.point(j);
        const double w = -std::expm1(-params.kappa * ttm) / params.kappa;
        values.col(j) = (drift.values.col(j).array() - mean) * w + mean * ttm;
    }
    values.col(drift.steps() - 1).setZero();  // alpha_T = 0 exactly
    return PathEnsemble(grid, std::move(values), "alpha");
}

PathEnsemble effective_alpha(const PathEnsemble& alpha, double x0_inventory,
                             double phi, double varrho) {
    if (phi < 0.0 || varrho < 0.0)
        throw std::invalid_argument("effective_alpha: penalties must be >= 0");
    const TimeGrid& grid = alpha.grid;
    Eigen::MatrixXd values = alpha.values;
    for (Eigen::Index j = 0; j < alpha.steps(); ++j) {
        const double pen = x0_inventory * (phi * (grid.horizon() - grid.point(j)) + varrho);
        values.col(j).array() -= pen;
    }
    return PathEnsemble(grid, std::move(values), "alpha_effective");
}

PathEnsemble inventory_from_rate(const PathEnsemble& rate, double x0_inventory) {
    const double dt = rate.grid.step();
    Eigen::MatrixXd values(rate.paths(), rate.steps());
    values.col(0).setConstant(x0_inventory);
    for (Eigen::Index j = 1; j < rate.steps(); ++j)
        values.col(j) = values.col(j - 1) + dt * rate.values.col(j - 1);
    return PathEnsemble(rate.grid, std::move(values), "inventory");
}

}  // namespace volterra
