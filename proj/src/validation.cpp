#include "volterra/validation.hpp"

#include "volterra/benchmark.hpp"
#include "volterra/condexp.hpp"
#include "volterra/fredholm.hpp"
#include "volterra/impact.hpp"
#include "volterra/kernels.hpp"
#include "volterra/rng.hpp"

#include <cmath>
#include <sstream>

namespace volterra {

namespace {

std::string num(double v) {
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

CheckResult check(const std::string& name, bool ok, const std::string& detail) {
    return CheckResult{name, ok, detail};
}

CheckResult adjoint_identity() {
    const TimeGrid grid(1.0, 101);
    const KernelSpec kernels[] = {
        KernelSpec{ExponentialSum{Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1)}},
        KernelSpec{ShiftedFractional{1.0, 0.6, 0.0}}};
    double worst = 0.0;
    CounterRng rng(11, 0);
    for (const auto& k : kernels) {
        const Eigen::MatrixXd kg = nystrom(k, grid).entries;
        for (int rep = 0; rep < 20; ++rep) {
            Eigen::VectorXd u(grid.size()), w(grid.size());
            for (Eigen::Index i = 0; i < grid.size(); ++i) {
                u[i] = rng.next_normal();
                w[i] = rng.next_normal();
            }
            const double lhs = grid.step() * (kg * u).dot(w);
            const double rhs = grid.step() * u.dot(kg.transpose() * w);
            worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
        }
    }
    return check("adjoint_identity", worst <= 1e-12, "max rel diff " + num(worst));
}

CheckResult penalty_psd_identity() {
    const TimeGrid grid(1.0, 101);
    const double dt = grid.step();
    const double phi = 0.7, varrho = 1.3;
    const Eigen::MatrixXd kh = penalty_kernel_matrix(grid, phi, varrho);
    const Eigen::MatrixXd sym = kh + kh.transpose();
    CounterRng rng(13, 0);
    double worst_rel = 0.0;
    double worst_defect = 0.0;
    const double defect_floor = -dt * (phi * grid.horizon() + varrho);
    for (int rep = 0; rep < 100; ++rep) {
        Eigen::VectorXd u(grid.size());
        for (Eigen::Index i = 0; i < grid.size(); ++i) u[i] = rng.next_normal();
        const double form = dt * u.dot(sym * u);
        // Exact discrete identity: 2 delta sum p_i u_i X_i =
        //   phi delta sum X_i^2 + varrho X_N^2 - delta^2 sum p_i u_i^2,
        // with X_i the left-rectangle running integral of u.
        double xint = 0.0, phi_part = 0.0, defect = 0.0;
        for (Eigen::Index i = 0; i < grid.size(); ++i) {
            if (i > 0) phi_part += dt * xint * xint;
            const double p = phi * (grid.horizon() - grid.point(i)) + varrho;
            defect += dt * dt * p * u[i] * u[i];
            xint += dt * u[i];
        }
        const double identity = phi * phi_part + varrho * xint * xint - defect;
        const double rel = std::abs(form - identity) / std::max(1.0, std::abs(form));
        worst_rel = std::max(worst_rel, rel);
        const double grid_norm = dt * u.squaredNorm();
        worst_defect = std::min(worst_defect, form / grid_norm - defect_floor);
    }
    const bool ok = worst_rel <= 1e-10 && worst_defect >= -1e-12;
    return check("penalty_psd_identity", ok,
                 "identity rel " + num(worst_rel) + ", defect margin " + num(worst_defect));
}

CheckResult impact_knot_and_derivatives() {
    const ImpactParams p = PiecewisePower{0.5, 0.8};
    bool ok = true;
    std::string why;
    if (std::abs(impact_h(p, 0.5) - 0.5) > 1e-12) { ok = false; why = "h(x0) != x0"; }
    if (std::abs(impact_h_prime(p, 0.5 * (1 + 1e-9)) - 1.0) > 1e-6) {
        ok = false;
        why = "h' not continuous at knot";
    }
    CounterRng rng(17, 0);
    double worst = 0.0;
    for (int rep = 0; rep < 2000; ++rep) {
        const double x = 6.0 * (2.0 * rng.next_uniform() - 1.0);
        if (std::abs(std::abs(x) - 0.5) < 1e-3) continue;
        const double eps = 1e-6 * std::max(1.0, std::abs(x));
        const double fd = (impact_h(p, x + eps) - impact_h(p, x - eps)) / (2 * eps);
        worst = std::max(worst, std::abs(fd - impact_h_prime(p, x)) /
                                    std::max(1e-8, std::abs(impact_h_prime(p, x))));
        if (std::abs(x) > 0.5 + 1e-2) {
            const double fd2 =
                (impact_h_prime(p, x + eps) - impact_h_prime(p, x - eps)) / (2 * eps);
            worst = std::max(worst, std::abs(fd2 - impact_h_second(p, x)) /
                                        std::max(1e-6, std::abs(impact_h_second(p, x))));
        }
    }
    if (worst > 1e-4) { ok = false; why = "finite differences off by " + num(worst); }
    return check("impact_knot_and_derivatives", ok, ok ? "fd max rel " + num(worst) : why);
}

CheckResult impact_oddness() {
    const ImpactParams p = PiecewisePower{0.01, 0.5};
    CounterRng rng(19, 0);
    double worst = 0.0;
    for (int rep = 0; rep < 10000; ++rep) {
        const double x = 1e3 * (2.0 * rng.next_uniform() - 1.0);
        worst = std::max(worst, std::abs(impact_h(p, x) + impact_h(p, -x)));
    }
    return check("impact_oddness", worst == 0.0, "max |h(x)+h(-x)| = " + num(worst));
}

CheckResult arrow_pratt_supremum() {
    double worst = 0.0;
    for (double c : {0.5, 0.6, 0.8, 0.95}) {
        const ImpactParams p = PiecewisePower{0.3, c};
        const double at_knot = arrow_pratt_ratio(p, 0.3 * (1 + 1e-9));
        worst = std::max(worst, std::abs(at_knot - (1.0 - c) / c));
    }
    return check("arrow_pratt_supremum", worst <= 1e-6, "max |R(x0+) - (1-c)/c| = " + num(worst));
}

CheckResult nystrom_refinement() {
    // (K 1)_i should approach the analytic integrals at first order in delta.
    const KernelSpec expk = ExponentialSum{Eigen::VectorXd::Constant(1, 2.0),
                                           Eigen::VectorXd::Constant(1, 3.0)};
    const KernelSpec frack = ShiftedFractional{1.0, 0.6, 0.0};
    auto max_err = [](const KernelSpec& k, Eigen::Index n, auto&& exact) {
        const TimeGrid grid(1.0, n);
        const Eigen::MatrixXd kg = nystrom(k, grid).entries;
        const Eigen::VectorXd conv = kg * Eigen::VectorXd::Ones(n);
        double err = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            err = std::max(err, std::abs(conv[i] - exact(grid.point(i))));
        return err;
    };
    const auto exp_exact = [](double t) { return 2.0 / 3.0 * (1.0 - std::exp(-3.0 * t)); };
    const auto frac_exact = [](double t) { return std::pow(t, 0.6) / 0.6; };
    const double e1 = max_err(expk, 51, exp_exact);
    const double e2 = max_err(expk, 101, exp_exact);
    const double e3 = max_err(expk, 201, exp_exact);
    const bool exp_ok = e2 < 0.7 * e1 && e3 < 0.7 * e2 && e3 < 0.02;
    const double f1 = max_err(frack, 51, frac_exact);
    const double f3 = max_err(frack, 401, frac_exact);
    const bool frac_ok = f3 < f1 && f3 < 0.05;
    return check("nystrom_refinement", exp_ok && frac_ok,
                 "exp errs " + num(e1) + "/" + num(e2) + "/" + num(e3) + ", frac " + num(f1) +
                     "->" + num(f3));
}

CheckResult picard_vs_forward_sweep() {
    // Small kernel so the Picard map u -> (Y - (K+K^T) u)/gamma contracts.
    const TimeGrid grid(1.0, 50);
    OUSignalParams sig{-2.0, 1.0, 0.0, 1.0};
    PathEnsemble drift = simulate_ou(sig, grid, 1, 5);
    ProblemSpec spec;
    spec.gamma = 1.0;
    spec.kernel = ExponentialSum{Eigen::VectorXd::Constant(1, 0.2),
                                 Eigen::VectorXd::Constant(1, 1.0)};
    spec.impact = IdentityImpact{};
    spec.grid = grid;
    spec.alpha = alpha_from_drift(drift, sig);
    DiscreteOperators ops(spec);

    // Deterministic conditional expectations: the table is Y itself.
    PathEnsemble source = spec.alpha;
    CondExpTable table;
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        Eigen::MatrixXd block(1, grid.size() - i);
        block.row(0) = source.values.row(0).tail(grid.size() - i);
        table.blocks.push_back(block);
    }
    const PathEnsemble swept = linear_fredholm_solve(spec, ops, source, table);

    Eigen::VectorXd u = Eigen::VectorXd::Zero(grid.size());
    const Eigen::VectorXd y = source.values.row(0).transpose();
    const Eigen::MatrixXd sym = ops.combined + ops.combined.transpose();
    for (int it = 0; it < 400; ++it) u = (y - sym * u) / spec.gamma;
    const double diff = (u - swept.values.row(0).transpose()).cwiseAbs().maxCoeff();
    return check("picard_vs_forward_sweep", diff <= 1e-8, "max abs diff " + num(diff));
}

CheckResult lsmc_constant_target() {
    const TimeGrid grid(1.0, 21);
    OUSignalParams sig{0.0, 1.0, 0.5, 1.0};
    PathEnsemble drift = simulate_ou(sig, grid, 512, 99, true);
    PathEnsemble alpha = alpha_from_drift(drift, sig);
    RegressionConfig reg;
    reg.variables = {FeatureSpec::parse("alpha", 0.0)};
    reg.degree = 2;
    reg.ridge = 0.0;
    FeatureSet state(reg, grid, alpha);
    // Deterministic target: every path sees the same values.
    Eigen::MatrixXd target(512, grid.size());
    for (Eigen::Index j = 0; j < grid.size(); ++j)
        target.col(j).setConstant(std::sin(0.5 + static_cast<double>(j)));
    PathEnsemble y(grid, target, "target");
    double worst = 0.0;
    for (Eigen::Index anchor : {Eigen::Index{3}, Eigen::Index{10}}) {
        const Eigen::MatrixXd block = condexp_estimate(y, anchor, state);
        for (Eigen::Index col = 0; col < block.cols(); ++col)
            worst = std::max(worst,
                             (block.col(col).array() - target(0, anchor + col)).abs().maxCoeff());
    }
    return check("lsmc_constant_target", worst <= 1e-10, "max abs err " + num(worst));
}

CheckResult basis_count() {
    bool ok = true;
    for (int p = 1; p <= 4; ++p)
        for (int d = 0; d <= 4; ++d) {
            const auto idx = graded_multi_indices(p, d);
            if (static_cast<Eigen::Index>(idx.size()) != basis_size(p, d)) ok = false;
        }
    const Eigen::MatrixXd feats = Eigen::MatrixXd::Random(32, 3);
    ok = ok && basis_expand(feats, PolyFamily::Legendre, 2).cols() == 10;
    return check("basis_count", ok, "binom(P+d,d) column counts");
}

CheckResult monotonicity_sampler() {
    const TimeGrid grid(1.0, 201);
    OUSignalParams sig{0.0, 1.0, 0.0, 0.0};
    PathEnsemble drift = simulate_ou(sig, grid, 1, 3);
    ProblemSpec spec;
    spec.gamma = 1.0;
    spec.kernel = ExponentialSum{Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1)};
    spec.impact = PiecewisePower{0.2, 0.5};
    spec.grid = grid;
    spec.alpha = alpha_from_drift(drift, sig);
    const auto op = monotonicity_operator(spec);
    const auto report = sample_monotonicity_of_operator(op, grid, 100, 2.0, 7);
    return check("monotonicity_sampler", report.passed, "min form " + num(report.min_value));
}

CheckResult benchmark_bulk_cancellation() {
    const TimeGrid grid(1.0, 101);
    OUSignalParams sig{-4.0, 1.0, 0.5, 2.0};
    PathEnsemble drift = simulate_ou(sig, grid, 16, 21, true);
    PathEnsemble alpha = alpha_from_drift(drift, sig);
    BenchmarkParams params{1.0, 0.8};
    const auto sol = explicit_benchmark(params, drift, alpha);
    // Delta Q_T must cancel J*_{T-}.
    const Eigen::Index n = grid.size();
    double worst = 0.0;
    for (Eigen::Index m = 0; m < drift.paths(); ++m) {
        const double f = alpha.values(m, n - 1) + params.tau * drift.values(m, n - 1);
        const double j_left = std::copysign(std::pow(std::abs(f) / (1 + params.c), 1 / params.c), f);
        worst = std::max(worst, std::abs(sol.bulk_close[m] + j_left));
    }
    return check("benchmark_bulk_cancellation", worst <= 1e-12, "max abs " + num(worst));
}

}  // namespace

std::vector<CheckResult> run_validation_suite(int threads) {
    (void)threads;
    std::vector<CheckResult> results;
    results.push_back(adjoint_identity());
    results.push_back(penalty_psd_identity());
    results.push_back(impact_knot_and_derivatives());
    results.push_back(impact_oddness());
    results.push_back(arrow_pratt_supremum());
    results.push_back(nystrom_refinement());
    results.push_back(picard_vs_forward_sweep());
    results.push_back(lsmc_constant_target());
    results.push_back(basis_count());
    results.push_back(monotonicity_sampler());
    results.push_back(benchmark_bulk_cancellation());
    return results;
}

bool all_passed(const std::vector<CheckResult>& results) {
    for (const auto& r : results)
        if (!r.passed) return false;
    return true;
}

}  // namespace volterra
