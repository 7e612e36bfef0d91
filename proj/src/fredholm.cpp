#include "volterra/fredholm.hpp"

#include "volterra/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <memory>
#include <stdexcept>

namespace volterra {

void ProblemSpec::validate() const {
    if (!(gamma > 0.0)) throw std::invalid_argument("ProblemSpec: gamma must be > 0");
    if (phi < 0.0 || varrho < 0.0)
        throw std::invalid_argument("ProblemSpec: penalties must be >= 0");
    volterra::validate(kernel);
    volterra::validate(impact);
    if (alpha.steps() != grid.size())
        throw std::invalid_argument("ProblemSpec: alpha does not match the grid");
    if (exogenous) {
        if (exogenous->steps() != grid.size() || exogenous->paths() != alpha.paths())
            throw std::invalid_argument("ProblemSpec: exogenous input shape mismatch");
    }
}

Eigen::MatrixXd penalty_kernel_matrix(const TimeGrid& grid, double phi, double varrho) {
    const Eigen::Index n = grid.size();
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 1; i < n; ++i) {
        const double w = grid.step() * (phi * (grid.horizon() - grid.point(i)) + varrho);
        k.row(i).head(i).setConstant(w);
    }
    return k;
}

DiscreteOperators::DiscreteOperators(const ProblemSpec& spec) : grid(spec.grid) {
    spec.validate();
    kernel = nystrom(spec.kernel, grid).entries;
    penalty = penalty_kernel_matrix(grid, spec.phi, spec.varrho);
    combined = kernel + penalty;
    const Eigen::Index n = grid.size();
    symmetric = combined + combined.transpose();
    symmetric.diagonal().array() += spec.gamma;
    factor.compute(symmetric);

    penalty_profile.resize(n);
    for (Eigen::Index i = 0; i < n; ++i)
        penalty_profile[i] = spec.phi * (grid.horizon() - grid.point(i)) + spec.varrho;

    // Zero-diagonal discretization defect: the symmetrized penalty and kernel
    // matrices sit above -delta (phi T + varrho) and -delta G(delta).
    const double dt = grid.step();
    double near_diag = 0.0;
    if (n >= 2) near_diag = kernel(1, 0);  // = delta G(delta)
    definiteness_margin =
        spec.gamma - dt * (spec.phi * grid.horizon() + spec.varrho) - near_diag;

    sweep_weights.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index m = n - i;
        Eigen::VectorXd e0 = Eigen::VectorXd::Zero(m);
        e0[0] = 1.0;
        sweep_weights[i] = Eigen::PartialPivLU<Eigen::MatrixXd>(symmetric.block(i, i, m, m))
                               .solve(e0);
    }
}

namespace {

Eigen::MatrixXd exogenous_values(const ProblemSpec& spec) {
    if (spec.exogenous) return spec.exogenous->values;
    return Eigen::MatrixXd::Zero(spec.alpha.paths(), spec.grid.size());
}

// Conditioned adjoint columns: for each anchor i, Ehat_{t_i} of the pathwise
// adjoint sums given in `targets` (anchor 0 = cross-path mean).  `regs` holds
// one regression per anchor >= 1.
Eigen::MatrixXd condition_columns(const Eigen::MatrixXd& targets,
                                  const std::vector<std::unique_ptr<AnchorRegression>>& regs) {
    const Eigen::Index n = targets.cols();
    const Eigen::Index m = targets.rows();
    Eigen::MatrixXd out(m, n);
    out.col(0).setConstant(targets.col(0).mean());
    for (Eigen::Index i = 1; i < n; ++i)
        out.col(i) = regs[i]->fit(targets.col(i));
    return out;
}

std::vector<std::unique_ptr<AnchorRegression>> build_anchor_regressions(const FeatureSet& state,
                                                                        Eigen::Index n,
                                                                        double ridge,
                                                                        int threads) {
    std::vector<std::unique_ptr<AnchorRegression>> regs(n);
    parallel_for(n - 1, threads, [&](std::ptrdiff_t lo, std::ptrdiff_t hi) {
        for (std::ptrdiff_t i = lo; i < hi; ++i)
            regs[i + 1] = std::make_unique<AnchorRegression>(state.anchor_basis(i + 1), ridge);
    });
    return regs;
}

}  // namespace

PathEnsemble distortion(const ProblemSpec& spec, const DiscreteOperators& ops,
                        const PathEnsemble& rate) {
    Eigen::MatrixXd z = rate.values * ops.kernel.transpose();
    if (spec.exogenous) z += spec.exogenous->values;
    return PathEnsemble(spec.grid, std::move(z), "distortion");
}

PathEnsemble distortion(const ProblemSpec& spec, const PathEnsemble& rate) {
    spec.validate();
    Eigen::MatrixXd kg = nystrom(spec.kernel, spec.grid).entries;
    Eigen::MatrixXd z = rate.values * kg.transpose();
    if (spec.exogenous) z += spec.exogenous->values;
    return PathEnsemble(spec.grid, std::move(z), "distortion");
}

PathEnsemble impact_cost_process(const ProblemSpec& spec, const PathEnsemble& rate) {
    const PathEnsemble z = distortion(spec, rate);
    Eigen::MatrixXd cost = 0.5 * spec.gamma * rate.values + impact_h(spec.impact, z.values);
    return PathEnsemble(spec.grid, std::move(cost), "impact_cost");
}

PathEnsemble apply_A(const ProblemSpec& spec, const PathEnsemble& rate, const FeatureSet* state) {
    spec.validate();
    const Eigen::MatrixXd kg = nystrom(spec.kernel, spec.grid).entries;
    Eigen::MatrixXd z = rate.values * kg.transpose() + exogenous_values(spec);
    const Eigen::MatrixXd weighted = impact_h_prime(spec.impact, z).cwiseProduct(rate.values);
    Eigen::MatrixXd adjoint = weighted * kg;  // (G^T w)_i pathwise
    if (state != nullptr && rate.paths() > 1) {
        auto regs = build_anchor_regressions(*state, spec.grid.size(), state->config().ridge, 1);
        adjoint = condition_columns(adjoint, regs);
    }
    return PathEnsemble(spec.grid, impact_h(spec.impact, z) + adjoint, "A(u)");
}

PathEnsemble apply_A_tilde(const ProblemSpec& spec, const PathEnsemble& rate,
                           const FeatureSet* state) {
    spec.validate();
    const Eigen::MatrixXd kg = nystrom(spec.kernel, spec.grid).entries;
    const Eigen::MatrixXd gu = rate.values * kg.transpose();
    Eigen::MatrixXd z = gu + exogenous_values(spec);
    const Eigen::MatrixXd weighted =
        (impact_h_prime(spec.impact, z).array() - 1.0).matrix().cwiseProduct(rate.values);
    Eigen::MatrixXd adjoint = weighted * kg;  // G^T ((h'(Z)-1) u)
    if (state != nullptr && rate.paths() > 1) {
        auto regs = build_anchor_regressions(*state, spec.grid.size(), state->config().ridge, 1);
        adjoint = condition_columns(adjoint, regs);
    }
    Eigen::MatrixXd value = impact_h(spec.impact, z) - gu + adjoint;
    return PathEnsemble(spec.grid, std::move(value), "A~(u)");
}

PathEnsemble linear_fredholm_solve(const ProblemSpec& spec, const DiscreteOperators& ops,
                                   const PathEnsemble& source, const CondExpTable& table) {
    const Eigen::Index n = spec.grid.size();
    const Eigen::Index m = source.paths();
    if (static_cast<Eigen::Index>(table.blocks.size()) != n)
        throw std::invalid_argument("linear_fredholm_solve: table has wrong anchor count");
    Eigen::MatrixXd u(m, n);
    Eigen::MatrixXd past = Eigen::MatrixXd::Zero(m, n);  // sum_{k<i} K(j,k) u_k
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::MatrixXd& block = table.blocks[i];
        if (block.rows() != m || block.cols() != n - i)
            throw std::invalid_argument("linear_fredholm_solve: table block shape mismatch");
        u.col(i) = (block - past.rightCols(n - i)) * ops.sweep_weights[i];
        if (i + 1 < n)
            past.rightCols(n - i - 1).noalias() +=
                u.col(i) * ops.combined.col(i).tail(n - i - 1).transpose();
    }
    return PathEnsemble(spec.grid, std::move(u), "rate");
}

double pnl(const ProblemSpec& spec, const PathEnsemble& rate) {
    const PathEnsemble cost = impact_cost_process(spec, rate);
    const Eigen::ArrayXXd integrand =
        (spec.alpha.values - cost.values).array() * rate.values.array();
    return spec.grid.step() * integrand.sum() / static_cast<double>(rate.paths());
}

std::pair<double, Eigen::VectorXd> residual_error(const ProblemSpec& spec,
                                                  const DiscreteOperators& ops,
                                                  const PathEnsemble& rate,
                                                  const FeatureSet* state) {
    const Eigen::Index n = spec.grid.size();
    const Eigen::MatrixXd z = rate.values * ops.kernel.transpose() + exogenous_values(spec);
    const Eigen::MatrixXd hz = impact_h(spec.impact, z);
    const Eigen::MatrixXd weighted = impact_h_prime(spec.impact, z).cwiseProduct(rate.values);
    // Combined adjoint targets (G* h'(Z)u + H* u), conditioned below.
    Eigen::MatrixXd adjoint = weighted * ops.kernel + rate.values * ops.penalty;
    if (state != nullptr && rate.paths() > 1) {
        auto regs = build_anchor_regressions(*state, n, state->config().ridge, 1);
        adjoint = condition_columns(adjoint, regs);
    }
    Eigen::MatrixXd residual = spec.gamma * rate.values + hz + adjoint +
                               rate.values * ops.penalty.transpose() - spec.alpha.values;
    residual.rowwise() +=
        (spec.initial_inventory * ops.penalty_profile).transpose();
    const Eigen::VectorXd per_path = residual.array().square().rowwise().sum();
    const double enm = spec.grid.step() * per_path.sum() / static_cast<double>(rate.paths());
    return {enm, per_path};
}

std::pair<double, Eigen::VectorXd> residual_error(const ProblemSpec& spec,
                                                  const PathEnsemble& rate,
                                                  const RegressionConfig& regression) {
    DiscreteOperators ops(spec);
    if (rate.paths() == 1) return residual_error(spec, ops, rate, nullptr);
    VolterraMatrix vm{spec.grid, ops.kernel};
    FeatureSet state(regression, spec.grid, spec.alpha, &vm);
    if (regression.depends_on_rate()) state.update_rate(rate.values);
    return residual_error(spec, ops, rate, &state);
}

ContractionDiagnostics contraction_diagnostics(const ProblemSpec& spec,
                                               const PathEnsemble& u_hat) {
    ContractionDiagnostics diag;
    diag.kernel_constant = admissibility_constant(spec.kernel, spec.grid.horizon());
    diag.sup_h_prime = impact_h_prime_sup(spec.impact);
    diag.lipschitz_h_prime = impact_h_prime_lipschitz(spec.impact);
    diag.m_gamma =
        spec.grid.step() * u_hat.values.array().square().rowwise().sum().maxCoeff();
    diag.c_tilde = 2.0 * std::sqrt(spec.grid.horizon() * diag.kernel_constant) *
                   (1.0 + diag.sup_h_prime +
                    0.5 * diag.lipschitz_h_prime *
                        std::sqrt(diag.kernel_constant * diag.m_gamma));
    diag.ratio = diag.c_tilde / spec.gamma;
    diag.certified = diag.c_tilde < spec.gamma;
    return diag;
}

SchemeReport iterate_scheme(const ProblemSpec& spec, const RegressionConfig& solve_regression,
                            const RegressionConfig& residual_regression,
                            const SchemeSettings& settings) {
    spec.validate();
    if (settings.iterations < 1)
        throw std::invalid_argument("iterate_scheme: need at least one iteration");

    const Eigen::Index n = spec.grid.size();
    const Eigen::Index m = spec.alpha.paths();
    const bool deterministic = settings.deterministic || m == 1;
    const double dt = spec.grid.step();

    DiscreteOperators ops(spec);
    const Eigen::MatrixXd g = exogenous_values(spec);

    // alpha~ = alpha - X0 (phi (T-t) + varrho)
    Eigen::MatrixXd alpha_eff = spec.alpha.values;
    alpha_eff.rowwise() -= (spec.initial_inventory * ops.penalty_profile).transpose();

    VolterraMatrix vm{spec.grid, ops.kernel};
    std::unique_ptr<FeatureSet> solve_state;
    std::unique_ptr<FeatureSet> residual_state;
    std::vector<std::unique_ptr<AnchorRegression>> residual_regs;
    std::vector<std::unique_ptr<AnchorRegression>> shared_solve_regs;
    const bool solve_basis_static = !solve_regression.depends_on_rate();
    if (!deterministic) {
        if (m <= solve_regression.basis_size())
            std::cerr << "iterate_scheme: " << m << " paths for "
                      << solve_regression.basis_size()
                      << " expanded features; regressions will be noisy" << std::endl;
        solve_state = std::make_unique<FeatureSet>(solve_regression, spec.grid, spec.alpha, &vm);
        if (solve_basis_static)
            shared_solve_regs = build_anchor_regressions(*solve_state, n, solve_regression.ridge,
                                                         settings.threads);
        residual_state =
            std::make_unique<FeatureSet>(residual_regression, spec.grid, spec.alpha, &vm);
        if (!residual_regression.depends_on_rate())
            residual_regs = build_anchor_regressions(*residual_state, n,
                                                     residual_regression.ridge,
                                                     settings.threads);
    }

    SchemeReport report;
    report.definiteness_margin = ops.definiteness_margin;
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(m, n);

    auto metrics_for = [&](const Eigen::MatrixXd& current)
        -> std::pair<double, Eigen::VectorXd> {
        PathEnsemble ens(spec.grid, current, "rate");
        if (deterministic) return residual_error(spec, ops, ens, nullptr);
        if (residual_regression.depends_on_rate()) {
            residual_state->update_rate(current);
            return residual_error(spec, ops, ens, residual_state.get());
        }
        // Reuse the cached signal-basis regressions.
        const Eigen::MatrixXd z = current * ops.kernel.transpose() + g;
        const Eigen::MatrixXd weighted = impact_h_prime(spec.impact, z).cwiseProduct(current);
        Eigen::MatrixXd adjoint = weighted * ops.kernel + current * ops.penalty;
        adjoint = condition_columns(adjoint, residual_regs);
        Eigen::MatrixXd residual = spec.gamma * current + impact_h(spec.impact, z) + adjoint +
                                   current * ops.penalty.transpose() - spec.alpha.values;
        residual.rowwise() += (spec.initial_inventory * ops.penalty_profile).transpose();
        const Eigen::VectorXd per_path = residual.array().square().rowwise().sum();
        return {dt * per_path.sum() / static_cast<double>(m), per_path};
    };

    for (int it = 1; it <= settings.iterations; ++it) {
        // Source term Y[n-1] = alpha~ - A~(u^{[n-1]}) built pathwise, with the
        // two adjoint pieces conditioned at their own time index.
        const Eigen::MatrixXd gu = u * ops.kernel.transpose();
        const Eigen::MatrixXd z = gu + g;
        const Eigen::MatrixXd hz = impact_h(spec.impact, z);
        const Eigen::MatrixXd w_nl = impact_h_prime(spec.impact, z).cwiseProduct(u);
        Eigen::MatrixXd adj_nl = w_nl * ops.kernel;  // G*(h'(Z) u) targets
        Eigen::MatrixXd adj_lin = u * ops.kernel;    // G* u targets

        Eigen::MatrixXd u_next(m, n);
        if (deterministic) {
            const Eigen::MatrixXd source =
                alpha_eff - hz - adj_nl + gu + adj_lin;
            u_next = ops.factor.solve(source.transpose()).transpose();
        } else {
            std::vector<std::unique_ptr<AnchorRegression>> local_regs;
            if (!solve_basis_static) {
                solve_state->update_rate(u);
                local_regs = build_anchor_regressions(*solve_state, n, solve_regression.ridge,
                                                      settings.threads);
            }
            const auto& regs = solve_basis_static ? shared_solve_regs : local_regs;
            const Eigen::MatrixXd adj_nl_c = condition_columns(adj_nl, regs);
            const Eigen::MatrixXd adj_lin_c = condition_columns(adj_lin, regs);
            const Eigen::MatrixXd source = alpha_eff - hz - adj_nl_c + gu + adj_lin_c;

            // Forward sweep: anchor i regresses the future of Y, subtracts the
            // already-fixed past, and reads off u_{t_i}.
            Eigen::MatrixXd past = Eigen::MatrixXd::Zero(m, n);
            std::vector<Eigen::MatrixXd> fitted(n);
            parallel_for(n - 1, settings.threads, [&](std::ptrdiff_t lo, std::ptrdiff_t hi) {
                for (std::ptrdiff_t i = lo; i < hi; ++i) {
                    const Eigen::Index anchor = i + 1;
                    const Eigen::Index future = n - anchor - 1;
                    if (future > 0) fitted[anchor] = regs[anchor]->fit(source.rightCols(future));
                }
            });
            for (Eigen::Index i = 0; i < n; ++i) {
                Eigen::MatrixXd block(m, n - i);
                block.col(0) = source.col(i);
                if (i + 1 < n) {
                    if (i == 0)
                        block.rightCols(n - 1) =
                            source.rightCols(n - 1).colwise().mean().replicate(m, 1);
                    else
                        block.rightCols(n - i - 1) = fitted[i];
                }
                u_next.col(i) = (block - past.rightCols(n - i)) * ops.sweep_weights[i];
                if (i + 1 < n)
                    past.rightCols(n - i - 1).noalias() +=
                        u_next.col(i) * ops.combined.col(i).tail(n - i - 1).transpose();
            }
        }

        const double du = std::sqrt((u_next - u).squaredNorm() * dt / static_cast<double>(m));
        if (!std::isfinite(du) || !u_next.allFinite()) {
            // Diverged: keep the last finite iterate and report the abort.
            IterationStats stats;
            stats.iteration = it;
            stats.update_norm = du;
            stats.residual = std::numeric_limits<double>::infinity();
            report.iterations.push_back(stats);
            report.iterations_run = it;
            report.aborted = true;
            break;
        }
        u = u_next;
        if (settings.record_iterates) report.iterates.push_back(u);

        IterationStats stats;
        stats.iteration = it;
        stats.update_norm = du;
        if (settings.record_metrics || it == settings.iterations) {
            auto [enm, per_path] = metrics_for(u);
            stats.residual = enm;
            stats.pnl = pnl(spec, PathEnsemble(spec.grid, u, "rate"));
            report.per_path_error = per_path;
        }
        report.iterations.push_back(stats);
        report.iterations_run = it;

        if (settings.record_metrics && !std::isfinite(stats.residual)) {
            report.aborted = true;
            break;
        }
        if (settings.stop_tolerance > 0.0 && it > 1) {
            const double scale =
                std::sqrt(u.squaredNorm() * dt / static_cast<double>(m));
            if (du < settings.stop_tolerance * std::max(scale, 1e-300)) break;
        }
    }

    report.rate = PathEnsemble(spec.grid, u, "rate");
    report.inventory = inventory_from_rate(report.rate, spec.initial_inventory);
    report.distortion = distortion(spec, ops, report.rate);
    Eigen::MatrixXd cost =
        0.5 * spec.gamma * u + impact_h(spec.impact, report.distortion.values);
    report.impact_cost = PathEnsemble(spec.grid, std::move(cost), "impact_cost");
    report.diagnostics = contraction_diagnostics(spec, report.rate);
    if (report.per_path_error.size() == 0)
        report.per_path_error = metrics_for(u).second;
    return report;
}

namespace {

// sup_t of int_0^t (phi (T-t) + varrho)^2 ds = t (phi (T-t) + varrho)^2.
double penalty_admissibility_constant(double phi, double varrho, double T) {
    auto value = [&](double t) {
        const double p = phi * (T - t) + varrho;
        return t * p * p;
    };
    double best = value(T);
    if (phi > 0.0) {
        const double t_star = (phi * T + varrho) / (3.0 * phi);
        if (t_star > 0.0 && t_star < T) best = std::max(best, value(t_star));
    }
    return best;
}

}  // namespace

AprioriBound apriori_bound(const ProblemSpec& spec) {
    spec.validate();
    AprioriBound out;
    const double T = spec.grid.horizon();
    const double sqT = std::sqrt(T);
    const double cg = admissibility_constant(spec.kernel, T);
    const double cg_adj = adjoint_admissibility_constant(spec.kernel, T);
    const double ch = penalty_admissibility_constant(spec.phi, spec.varrho, T);
    const double hp = impact_h_prime_sup(spec.impact);
    const double c_hg = std::sqrt(ch) + hp * std::sqrt(cg);

    const double gate = 2.0 * sqT * c_hg;
    if (spec.gamma <= gate) {
        out.threshold = gate;
        return out;  // not applicable
    }
    const double resolvent = 1.0 / (spec.gamma - gate);
    const double second =
        std::sqrt(ch) + 0.5 * hp * (std::sqrt(cg) + std::sqrt(T * cg_adj) * resolvent * c_hg);
    out.threshold = 2.0 * sqT * std::max(c_hg, second);
    if (spec.gamma <= out.threshold) return out;

    const double c_gamma =
        spec.gamma - sqT * (2.0 * std::sqrt(ch) +
                            hp * (std::sqrt(cg) + std::sqrt(T * cg_adj) * resolvent * c_hg));
    if (!(c_gamma > 0.0)) return out;

    const double dt = spec.grid.step();
    const Eigen::Index m = spec.alpha.paths();
    Eigen::MatrixXd alpha_eff = spec.alpha.values;
    Eigen::VectorXd pen(spec.grid.size());
    for (Eigen::Index i = 0; i < spec.grid.size(); ++i)
        pen[i] = spec.phi * (T - spec.grid.point(i)) + spec.varrho;
    alpha_eff.rowwise() -= (spec.initial_inventory * pen).transpose();

    Eigen::VectorXd alpha_norm =
        (alpha_eff.array().square().rowwise().sum() * dt).sqrt();
    Eigen::VectorXd hg_norm = Eigen::VectorXd::Zero(m);
    if (spec.exogenous) {
        const Eigen::MatrixXd hg = impact_h(spec.impact, spec.exogenous->values);
        hg_norm = (hg.array().square().rowwise().sum() * dt).sqrt();
    }

    // int_0^T E_t[||.||^2] dt: exact in the deterministic case, bounded by the
    // sample max over paths otherwise (the conditional field is unobservable).
    double alpha_cond, hg_cond;
    if (m == 1) {
        alpha_cond = std::sqrt(T) * alpha_norm[0];
        hg_cond = std::sqrt(T) * hg_norm[0];
    } else {
        alpha_cond = std::sqrt(T) * alpha_norm.maxCoeff();
        hg_cond = std::sqrt(T) * hg_norm.maxCoeff();
        out.conditional_estimated = true;
    }

    out.applicable = true;
    out.per_path =
        (alpha_norm.array() + hg_norm.array() +
         hp * std::sqrt(cg_adj) * resolvent * (alpha_cond + hg_cond)) /
        c_gamma;
    return out;
}

std::function<Eigen::VectorXd(const Eigen::VectorXd&)> monotonicity_operator(
    const ProblemSpec& spec) {
    spec.validate();
    const Eigen::MatrixXd kg = nystrom(spec.kernel, spec.grid).entries;
    Eigen::VectorXd g0 = Eigen::VectorXd::Zero(spec.grid.size());
    if (spec.exogenous) g0 = spec.exogenous->values.row(0).transpose();
    const ImpactParams impact = spec.impact;
    return [kg, g0, impact](const Eigen::VectorXd& u) {
        const Eigen::VectorXd z = kg * u + g0;
        Eigen::VectorXd hz(z.size()), w(z.size());
        for (Eigen::Index i = 0; i < z.size(); ++i) {
            hz[i] = impact_h(impact, z[i]);
            w[i] = impact_h_prime(impact, z[i]) * u[i];
        }
        return Eigen::VectorXd(hz + kg.transpose() * w);
    };
}

}  // namespace volterra
