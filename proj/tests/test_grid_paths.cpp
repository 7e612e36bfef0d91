#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "volterra/ou_signal.hpp"
#include "volterra/rng.hpp"
#include "volterra/time_grid.hpp"

#include <cmath>

using namespace volterra;

TEST_CASE("time grid is uniform with exact endpoints") {
    const TimeGrid grid(2.5, 300);
    CHECK(grid.point(0) == 0.0);
    CHECK(grid.point(299) == 2.5);
    for (Eigen::Index i = 1; i < grid.size(); ++i) {
        CHECK(grid.point(i) > grid.point(i - 1));
        CHECK(std::abs(grid.point(i) - grid.point(i - 1) - grid.step()) <= 1e-12 * 2.5);
    }
    CHECK_THROWS(TimeGrid(1.0, 1));
    CHECK_THROWS(TimeGrid(-1.0, 10));
}

TEST_CASE("noise-free OU follows the exact mean path") {
    const TimeGrid grid(1.0, 201);
    OUSignalParams p{-40.0, 1.0, 0.0, 20.0};
    const PathEnsemble paths = simulate_ou(p, grid, 3, 7);
    for (Eigen::Index j = 0; j < grid.size(); ++j) {
        const double expected = -40.0 + 60.0 * std::exp(-grid.point(j));
        for (Eigen::Index m = 0; m < 3; ++m)
            CHECK(std::abs(paths.values(m, j) - expected) <= 1e-12 * std::abs(expected) + 1e-13);
    }
}

TEST_CASE("zero initial condition and zero noise give the zero ensemble") {
    const TimeGrid grid(1.0, 50);
    const PathEnsemble paths = simulate_ou({0.0, 1.0, 0.0, 0.0}, grid, 4, 1);
    CHECK(paths.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("antithetic pair mean reproduces the deterministic mean path") {
    const TimeGrid grid(1.0, 101);
    OUSignalParams p{-4.0, 1.0, 0.5, 2.0};
    const PathEnsemble pair = simulate_ou(p, grid, 2, 42, true);
    for (Eigen::Index j = 0; j < grid.size(); ++j) {
        const double mean = 0.5 * (pair.values(0, j) + pair.values(1, j));
        CHECK(std::abs(mean - p.mean_at(grid.point(j))) <= 1e-12);
    }
    // Monte Carlo oracle: the plain sample mean converges to the same curve.
    const Eigen::Index m = 100000;
    const PathEnsemble big = simulate_ou(p, grid, m, 9, false);
    const double t = grid.point(50);
    const double sample = big.values.col(50).mean();
    const double sd = std::sqrt((big.values.col(50).array() - sample).square().mean());
    CHECK(std::abs(sample - p.mean_at(t)) <= 4.0 * sd / std::sqrt(double(m)));
}

TEST_CASE("antithetic Gaussian increments cancel exactly") {
    const TimeGrid grid(1.0, 64);
    OUSignalParams p{1.0, 2.0, 0.7, 0.3};
    const PathEnsemble e = simulate_ou(p, grid, 6, 5, true);
    const double decay = std::exp(-p.kappa * grid.step());
    const double mean = p.mean_level();
    for (Eigen::Index k = 0; k < 3; ++k) {
        for (Eigen::Index j = 1; j < grid.size(); ++j) {
            const double up = e.values(2 * k, j) - mean - (e.values(2 * k, j - 1) - mean) * decay;
            const double dn =
                e.values(2 * k + 1, j) - mean - (e.values(2 * k + 1, j - 1) - mean) * decay;
            CHECK(std::abs(up + dn) <= 5e-13);
        }
    }
}

TEST_CASE("same seed gives bitwise-identical ensembles") {
    const TimeGrid grid(1.0, 80);
    OUSignalParams p{3.0, 1.5, 1.0, 0.0};
    const PathEnsemble a = simulate_ou(p, grid, 10, 123, true, 2);
    const PathEnsemble b = simulate_ou(p, grid, 10, 123, true, 1);
    CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);
    const PathEnsemble c = simulate_ou(p, grid, 10, 124, true);
    CHECK((a.values - c.values).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("simulation rejects bad path counts") {
    const TimeGrid grid(1.0, 10);
    CHECK_THROWS(simulate_ou({0, 1, 0, 0}, grid, 0, 1));
    CHECK_THROWS(simulate_ou({0, 1, 0, 0}, grid, 3, 1, true));
}

TEST_CASE("alpha closed form") {
    const TimeGrid grid(1.0, 101);

    SUBCASE("alpha vanishes at the horizon") {
        const PathEnsemble drift = simulate_ou({2.0, 3.0, 0.8, 1.0}, grid, 8, 3, true);
        const PathEnsemble alpha = alpha_from_drift(drift, {2.0, 3.0, 0.8, 1.0});
        CHECK(alpha.values.col(grid.size() - 1).cwiseAbs().maxCoeff() == 0.0);
    }

    SUBCASE("theta = 0 start value") {
        OUSignalParams p{0.0, 1.0, 0.0, 20.0};
        const PathEnsemble alpha = alpha_from_drift(simulate_ou(p, grid, 1, 1), p);
        CHECK(alpha.values(0, 0) == doctest::Approx(12.642411176571153).epsilon(1e-12));
    }

    SUBCASE("mean-reverting drift toward a sell level") {
        // drift value 0 at time-to-maturity 1
        OUSignalParams p{-40.0, 1.0, 0.0, 0.0};
        const PathEnsemble alpha = alpha_from_drift(simulate_ou(p, grid, 1, 1), p);
        CHECK(alpha.values(0, 0) == doctest::Approx(-14.715177646857693).epsilon(1e-12));
    }

    SUBCASE("fast mean reversion bound |alpha| <= |I|/kappa for theta = 0") {
        OUSignalParams p{0.0, 50.0, 2.0, 1.0};
        const PathEnsemble drift = simulate_ou(p, grid, 16, 8, true);
        const PathEnsemble alpha = alpha_from_drift(drift, p);
        for (Eigen::Index m = 0; m < 16; ++m)
            for (Eigen::Index j = 0; j < grid.size(); ++j)
                CHECK(std::abs(alpha.values(m, j)) <=
                      std::abs(drift.values(m, j)) / 50.0 + 1e-12);
    }
}

TEST_CASE("effective alpha subtracts the inventory penalty ramp") {
    const TimeGrid grid(1.0, 11);
    const PathEnsemble alpha = PathEnsemble::constant(grid, 3, 0.0, "alpha");

    const PathEnsemble plain = effective_alpha(alpha, 1.0, 0.0, 0.0);
    CHECK(plain.values.cwiseAbs().maxCoeff() == 0.0);
    const PathEnsemble no_inventory = effective_alpha(alpha, 0.0, 7.0, 9.0);
    CHECK(no_inventory.values.cwiseAbs().maxCoeff() == 0.0);

    const PathEnsemble heavy = effective_alpha(alpha, 1.0, 0.0, 500.0);
    CHECK(heavy.values.minCoeff() == -500.0);
    CHECK(heavy.values.maxCoeff() == -500.0);
}

TEST_CASE("running inventory from the trading rate") {
    const TimeGrid grid(1.0, 101);

    SUBCASE("zero rate keeps the initial inventory") {
        const PathEnsemble x = inventory_from_rate(PathEnsemble::zero(grid, 2, "u"), 3.25);
        CHECK((x.values.array() - 3.25).abs().maxCoeff() == 0.0);
    }

    SUBCASE("unit rate integrates to t exactly under the left rule") {
        const PathEnsemble x = inventory_from_rate(PathEnsemble::constant(grid, 1, 1.0, "u"), 0.0);
        for (Eigen::Index j = 0; j < grid.size(); ++j)
            CHECK(std::abs(x.values(0, j) - grid.point(j)) <= 1e-12);
    }

    SUBCASE("linear rate converges at first order") {
        double prev_err = 0.0;
        for (Eigen::Index n : {51, 101, 201}) {
            const TimeGrid g(1.0, n);
            Eigen::MatrixXd u(1, n);
            for (Eigen::Index j = 0; j < n; ++j) u(0, j) = g.point(j);
            const PathEnsemble x = inventory_from_rate(PathEnsemble(g, u, "u"), 0.0);
            const double err = std::abs(x.values(0, n - 1) - 0.5);
            if (prev_err > 0.0) CHECK(err < 0.6 * prev_err);
            prev_err = err;
        }
        CHECK(prev_err < 3e-3);
    }
}

TEST_CASE("path ensembles reject non-finite entries") {
    const TimeGrid grid(1.0, 4);
    Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(1, 4);
    bad(0, 2) = std::nan("");
    CHECK_THROWS(PathEnsemble(grid, bad, "bad"));
}

TEST_CASE("counter rng streams are reproducible and distinct") {
    CounterRng a(7, 0), b(7, 0), c(7, 1);
    CHECK(a.next_u64() == b.next_u64());
    CHECK(a.next_u64() == b.next_u64());
    CHECK(a.next_u64() != c.next_u64());
    CounterRng d(7, 0);
    double mean = 0.0;
    for (int i = 0; i < 10000; ++i) mean += d.next_normal();
    CHECK(std::abs(mean / 10000.0) < 0.05);
}
