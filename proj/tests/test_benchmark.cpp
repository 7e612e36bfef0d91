#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "volterra/benchmark.hpp"

#include <cmath>

using namespace volterra;

TEST_CASE("degenerate signal gives the zero solution") {
    const TimeGrid grid(1.0, 51);
    OUSignalParams sig{0.0, 1.0, 0.0, 0.0};
    const PathEnsemble drift = simulate_ou(sig, grid, 2, 1);
    const PathEnsemble alpha = alpha_from_drift(drift, sig);
    const auto sol = explicit_benchmark({1.0, 0.8}, drift, alpha);
    CHECK(sol.optimal_impact.values.cwiseAbs().maxCoeff() == 0.0);
    CHECK(sol.optimal_distortion.values.cwiseAbs().maxCoeff() == 0.0);
    CHECK(sol.traded_volume.values.cwiseAbs().maxCoeff() == 0.0);
    CHECK(sol.bulk_open.cwiseAbs().maxCoeff() == 0.0);
    CHECK(sol.bulk_close.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("linear exponent collapses distortion onto impact") {
    const TimeGrid grid(1.0, 51);
    OUSignalParams sig{-4.0, 1.0, 0.5, 2.0};
    const PathEnsemble drift = simulate_ou(sig, grid, 8, 3, true);
    const PathEnsemble alpha = alpha_from_drift(drift, sig);
    const auto sol = explicit_benchmark({1.0, 1.0}, drift, alpha);
    CHECK((sol.optimal_impact.values - sol.optimal_distortion.values).cwiseAbs().maxCoeff() <=
          1e-14);
    for (Eigen::Index j = 1; j + 1 < grid.size(); ++j) {
        const double expected = (alpha.values(0, j) + drift.values(0, j)) / 2.0;
        CHECK(sol.optimal_impact.values(0, j) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("pinned point on the concave branch") {
    // alpha + tau I~ = 1.8 with c = 0.8: I* = 1, J* = 1
    const TimeGrid grid(1.0, 3);
    Eigen::MatrixXd drift_vals = Eigen::MatrixXd::Constant(1, 3, 0.9);
    Eigen::MatrixXd alpha_vals = Eigen::MatrixXd::Constant(1, 3, 0.9);
    const PathEnsemble drift(grid, drift_vals, "drift");
    const PathEnsemble alpha(grid, alpha_vals, "alpha");
    const auto sol = explicit_benchmark({1.0, 0.8}, drift, alpha);
    CHECK(sol.optimal_impact.values(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sol.optimal_distortion.values(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("opening bulk trade carries the sign of the initial forcing") {
    const TimeGrid grid(1.0, 41);
    for (double i0 : {2.0, -3.0}) {
        OUSignalParams sig{0.0, 1.0, 0.0, i0};
        const PathEnsemble drift = simulate_ou(sig, grid, 1, 1);
        const PathEnsemble alpha = alpha_from_drift(drift, sig);
        const auto sol = explicit_benchmark({1.0, 0.8}, drift, alpha);
        const double f0 = alpha.values(0, 0) + drift.values(0, 0);
        CHECK(std::signbit(sol.bulk_open[0]) == std::signbit(f0));
    }
}

TEST_CASE("closing bulk trade cancels the left limit of the distortion") {
    const TimeGrid grid(1.0, 101);
    OUSignalParams sig{-4.0, 1.0, 0.5, 2.0};
    const PathEnsemble drift = simulate_ou(sig, grid, 32, 5, true);
    const PathEnsemble alpha = alpha_from_drift(drift, sig);
    BenchmarkParams params{1.0, 0.8};
    const auto sol = explicit_benchmark(params, drift, alpha);
    for (Eigen::Index m = 0; m < 32; ++m) {
        const double f = params.tau * drift.values(m, grid.size() - 1);  // alpha_T = 0
        const double j_minus =
            std::copysign(std::pow(std::abs(f) / (1.0 + params.c), 1.0 / params.c), f);
        CHECK(sol.bulk_close[m] == doctest::Approx(-j_minus).epsilon(1e-12));
    }
}

TEST_CASE("volume quadrature is self-consistent for c = 1") {
    // dJ*/dt + J*/tau integrates back to Q* at first order.
    OUSignalParams sig{-4.0, 1.0, 0.0, 2.0};
    double prev = 0.0;
    for (Eigen::Index n : {101, 201, 401}) {
        const TimeGrid grid(1.0, n);
        const PathEnsemble drift = simulate_ou(sig, grid, 1, 1);
        const PathEnsemble alpha = alpha_from_drift(drift, sig);
        const auto sol = explicit_benchmark({1.0, 1.0}, drift, alpha);
        double err = 0.0;
        for (Eigen::Index j = 2; j + 1 < n; ++j) {
            // Q*_j - Q*_1 vs integral of (dJ + J/tau dt) over [t_1, t_j]
            double integral = 0.0;
            for (Eigen::Index k = 1; k < j; ++k)
                integral += sol.optimal_distortion.values(0, k + 1) -
                            sol.optimal_distortion.values(0, k) +
                            grid.step() * sol.optimal_distortion.values(0, k);
            const double got = sol.traded_volume.values(0, j) - sol.traded_volume.values(0, 1);
            err = std::max(err, std::abs(got - integral));
        }
        CHECK(err <= 1e-10);  // exact identity for c = 1, only rounding remains
        prev = err;
    }
    CHECK(prev <= 1e-10);
}

TEST_CASE("interior distance ignores the jump endpoints") {
    const TimeGrid grid(1.0, 11);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(1, 11);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(1, 11);
    b(0, 0) = 100.0;
    b(0, 10) = -50.0;  // endpoint spikes must not count
    CHECK(interior_mean_distance(PathEnsemble(grid, a, "a"), PathEnsemble(grid, b, "b")) == 0.0);
    b(0, 5) = 1.0;
    CHECK(interior_mean_distance(PathEnsemble(grid, a, "a"), PathEnsemble(grid, b, "b")) ==
          doctest::Approx(std::sqrt(0.1)).epsilon(1e-12));
}
