#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "volterra/condexp.hpp"
#include "volterra/ou_signal.hpp"
#include "volterra/rng.hpp"

#include <cmath>

using namespace volterra;

namespace {

RegressionConfig alpha_config(int degree, double ridge = 1e-6) {
    RegressionConfig r;
    r.variables = {FeatureSpec::parse("alpha", 0.0)};
    r.degree = degree;
    r.ridge = ridge;
    return r;
}

}  // namespace

TEST_CASE("multi-index enumeration and basis sizes") {
    CHECK(basis_size(1, 0) == 1);
    CHECK(basis_size(3, 2) == 10);
    CHECK(basis_size(2, 1) == 3);
    CHECK(basis_size(3, 4) == 35);
    for (int p = 1; p <= 4; ++p)
        for (int d = 0; d <= 5; ++d)
            CHECK(static_cast<Eigen::Index>(graded_multi_indices(p, d).size()) == basis_size(p, d));

    const auto idx = graded_multi_indices(2, 1);
    REQUIRE(idx.size() == 3);
    CHECK(idx[0] == std::vector<int>{0, 0});
    CHECK(idx[1] == std::vector<int>{1, 0});
    CHECK(idx[2] == std::vector<int>{0, 1});
}

TEST_CASE("univariate polynomial families at pinned points") {
    Eigen::MatrixXd x(1, 1);
    x(0, 0) = 0.7;
    CHECK(basis_expand(x, PolyFamily::Legendre, 2)(0, 2) ==
          doctest::Approx(0.5 * (3 * 0.49 - 1)).epsilon(1e-14));
    x(0, 0) = 1.0;
    CHECK(basis_expand(x, PolyFamily::Laguerre, 2)(0, 2) ==
          doctest::Approx(0.5 * (1.0 - 4.0 + 2.0)).epsilon(1e-14));
    x(0, 0) = 0.3;
    CHECK(basis_expand(x, PolyFamily::Chebyshev, 3)(0, 3) ==
          doctest::Approx(4 * 0.027 - 3 * 0.3).epsilon(1e-14));
    x(0, 0) = 2.0;
    CHECK(basis_expand(x, PolyFamily::Hermite, 3)(0, 3) == doctest::Approx(8.0 - 6.0));
}

TEST_CASE("degree-1 expansion over two variables is {1, x1, x2}") {
    Eigen::MatrixXd feats(4, 2);
    feats << 0.1, -1.0, 0.5, 2.0, -0.3, 0.7, 1.1, 0.0;
    const Eigen::MatrixXd b = basis_expand(feats, PolyFamily::Legendre, 1);
    REQUIRE(b.cols() == 3);
    CHECK((b.col(0) - Eigen::VectorXd::Ones(4)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((b.col(1) - feats.col(0)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((b.col(2) - feats.col(1)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("deterministic targets are reproduced exactly") {
    const TimeGrid grid(1.0, 21);
    OUSignalParams sig{0.0, 1.0, 0.5, 1.0};
    const PathEnsemble alpha = alpha_from_drift(simulate_ou(sig, grid, 256, 5, true), sig);
    FeatureSet state(alpha_config(2, 0.0), grid, alpha);
    Eigen::MatrixXd target(256, grid.size());
    for (Eigen::Index j = 0; j < grid.size(); ++j) target.col(j).setConstant(2.0 + 0.1 * j);
    const PathEnsemble y(grid, target, "y");
    for (Eigen::Index anchor : {Eigen::Index{0}, Eigen::Index{7}}) {
        const Eigen::MatrixXd block = condexp_estimate(y, anchor, state);
        for (Eigen::Index c = 0; c < block.cols(); ++c)
            CHECK((block.col(c).array() - (2.0 + 0.1 * (anchor + c))).abs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("anchor zero returns cross-path sample means") {
    const TimeGrid grid(1.0, 6);
    OUSignalParams sig{0.0, 1.0, 1.0, 0.0};
    const PathEnsemble alpha = alpha_from_drift(simulate_ou(sig, grid, 64, 2, true), sig);
    FeatureSet state(alpha_config(1, 0.0), grid, alpha);
    const Eigen::MatrixXd block = condexp_estimate(alpha, 0, state);
    for (Eigen::Index j = 1; j < grid.size(); ++j) {
        const double mean = alpha.values.col(j).mean();
        CHECK((block.col(j).array() - mean).abs().maxCoeff() <= 1e-14);
    }
    CHECK((block.col(0) - alpha.values.col(0)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("regression matches the OU conditional mean in closed form") {
    const TimeGrid grid(1.0, 21);
    OUSignalParams sig{1.0, 2.0, 0.8, 0.5};
    const Eigen::Index m = 40000;
    const PathEnsemble drift = simulate_ou(sig, grid, m, 77, true);
    const PathEnsemble alpha = alpha_from_drift(drift, sig);
    FeatureSet state(alpha_config(1), grid, alpha);

    const Eigen::Index i = 10;
    const Eigen::MatrixXd block = condexp_estimate(alpha, i, state);
    const double T = grid.horizon();
    double rms_err = 0.0, rms_scale = 0.0;
    for (Eigen::Index j = i + 4; j < grid.size() - 1; j += 3) {
        const double lag = grid.point(j) - grid.point(i);
        const double ttm = T - grid.point(j);
        const double w = -std::expm1(-sig.kappa * ttm) / sig.kappa;
        for (Eigen::Index p = 0; p < m; p += 97) {
            const double cond_drift = sig.mean_level() +
                (drift.values(p, i) - sig.mean_level()) * std::exp(-sig.kappa * lag);
            const double closed = (cond_drift - sig.mean_level()) * w + sig.mean_level() * ttm;
            const double err = block(p, j - i) - closed;
            rms_err += err * err;
            rms_scale += closed * closed;
        }
    }
    CHECK(std::sqrt(rms_err) <= 0.02 * std::sqrt(rms_scale));
}

TEST_CASE("huge ridge collapses estimates onto the sample mean") {
    const TimeGrid grid(1.0, 8);
    OUSignalParams sig{0.0, 1.0, 1.0, 0.0};
    const PathEnsemble alpha = alpha_from_drift(simulate_ou(sig, grid, 128, 4, true), sig);
    FeatureSet state(alpha_config(2, 1e14), grid, alpha);
    const Eigen::MatrixXd block = condexp_estimate(alpha, 3, state);
    for (Eigen::Index c = 1; c < block.cols(); ++c) {
        const double mean = alpha.values.col(3 + c).mean();
        CHECK((block.col(c).array() - mean).abs().maxCoeff() <= 1e-6);
    }
}

TEST_CASE("adaptedness: the anchor never looks into the future") {
    const TimeGrid grid(1.0, 12);
    OUSignalParams sig{0.0, 1.0, 1.0, 0.0};
    PathEnsemble drift = simulate_ou(sig, grid, 64, 9, true);
    PathEnsemble alpha = alpha_from_drift(drift, sig);
    RegressionConfig cfg;
    cfg.variables = {FeatureSpec::parse("alpha", 0.0),
                     FeatureSpec::parse("alpha_integral", 0.0)};
    cfg.degree = 2;

    const Eigen::Index anchor = 5;
    Eigen::MatrixXd targets = Eigen::MatrixXd::Random(64, grid.size());
    const PathEnsemble y(grid, targets, "y");

    FeatureSet state(cfg, grid, alpha);
    const Eigen::MatrixXd before = condexp_estimate(y, anchor, state);

    // Scramble the strict future of the feature source.
    PathEnsemble scrambled = alpha;
    for (Eigen::Index j = anchor + 1; j < grid.size(); ++j)
        scrambled.values.col(j) = alpha.values.col(j).reverse();
    FeatureSet state2(cfg, grid, scrambled);
    const Eigen::MatrixXd after = condexp_estimate(y, anchor, state2);
    CHECK((before - after).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("shared-gram multi-output equals per-target regressions") {
    CounterRng rng(21, 0);
    Eigen::MatrixXd basis(300, 6);
    for (Eigen::Index i = 0; i < basis.size(); ++i) basis.data()[i] = rng.next_normal();
    basis.col(0).setOnes();
    Eigen::MatrixXd targets(300, 5);
    for (Eigen::Index i = 0; i < targets.size(); ++i) targets.data()[i] = rng.next_normal();

    AnchorRegression reg(basis, 1e-6);
    const Eigen::MatrixXd joint = reg.fit(targets);
    for (Eigen::Index k = 0; k < targets.cols(); ++k) {
        const Eigen::MatrixXd single = reg.fit(targets.col(k));
        CHECK((joint.col(k) - single.col(0)).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("feature constructors") {
    const TimeGrid grid(1.0, 101);
    const PathEnsemble ones = PathEnsemble::constant(grid, 3, 1.0, "alpha");

    SUBCASE("identity feature") {
        RegressionConfig cfg;
        cfg.variables = {FeatureSpec::parse("alpha", 0.0)};
        FeatureSet state(cfg, grid, ones);
        CHECK((state.at(40).col(0).array() - 1.0).abs().maxCoeff() == 0.0);
    }
    SUBCASE("running integral of a constant is t") {
        RegressionConfig cfg;
        cfg.variables = {FeatureSpec::parse("alpha_integral", 0.0)};
        FeatureSet state(cfg, grid, ones);
        for (Eigen::Index i : {Eigen::Index{10}, Eigen::Index{50}, Eigen::Index{100}})
            CHECK(state.at(i)(0, 0) == doctest::Approx(grid.point(i)).epsilon(1e-12));
    }
    SUBCASE("exp-weighted integral of a constant converges to (1-e^{-kt})/k") {
        double prev = 0.0;
        for (Eigen::Index n : {101, 201, 401}) {
            const TimeGrid g(1.0, n);
            const PathEnsemble one = PathEnsemble::constant(g, 1, 1.0, "alpha");
            RegressionConfig cfg;
            cfg.variables = {FeatureSpec::parse("alpha_exp_avg", 5.0)};
            FeatureSet state(cfg, g, one);
            const double got = state.at(n - 1)(0, 0);
            const double want = (1.0 - std::exp(-5.0)) / 5.0;
            const double err = std::abs(got - want);
            if (prev > 0.0) CHECK(err < 0.6 * prev);
            prev = err;
        }
    }
    SUBCASE("rate features are zero until an iterate arrives") {
        RegressionConfig cfg;
        cfg.variables = {FeatureSpec::parse("rate", 0.0)};
        FeatureSet state(cfg, grid, ones);
        CHECK(state.at(5)(0, 0) == 0.0);
        Eigen::MatrixXd u = Eigen::MatrixXd::Constant(3, grid.size(), 2.0);
        state.update_rate(u);
        CHECK(state.at(5)(0, 0) == 2.0);
    }
    SUBCASE("unknown names are rejected") {
        CHECK_THROWS(FeatureSpec::parse("momentum", 0.0));
        CHECK_THROWS(FeatureSpec::parse("alpha_exp_avg", 0.0));
    }
}

TEST_CASE("singular gram without ridge is diagnosed") {
    const TimeGrid grid(1.0, 5);
    // Identical paths make every feature column constant -> rank-1 basis.
    const PathEnsemble alpha = PathEnsemble::constant(grid, 32, 1.5, "alpha");
    RegressionConfig cfg = alpha_config(2, 0.0);
    cfg.standardize = false;
    FeatureSet state(cfg, grid, alpha);
    Eigen::MatrixXd y = Eigen::MatrixXd::Random(32, grid.size());
    CHECK_THROWS_AS(condexp_estimate(PathEnsemble(grid, y, "y"), 2, state), std::runtime_error);
}
