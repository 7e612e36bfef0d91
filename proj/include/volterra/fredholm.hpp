#pragma once

#include "volterra/condexp.hpp"
#include "volterra/impact.hpp"
#include "volterra/kernels.hpp"
#include "volterra/ou_signal.hpp"
#include "volterra/time_grid.hpp"

#include <Eigen/LU>
#include <functional>
#include <optional>
#include <vector>

namespace volterra {

/// Everything the discrete optimality condition needs: slippage, penalties,
/// kernel, impact family, signal ensemble, and the optional exogenous
/// distortion input g (zero when absent).
struct ProblemSpec {
    double gamma = 1.0;
    double phi = 0.0;
    double varrho = 0.0;
    double initial_inventory = 0.0;  ///< X0
    KernelSpec kernel = ConstantKernel{0.0};
    ImpactParams impact = IdentityImpact{};
    TimeGrid grid{1.0, 2};
    PathEnsemble alpha;
    std::optional<PathEnsemble> exogenous;  ///< g, defaults to zero

    void validate() const;
    Eigen::Index paths() const { return alpha.paths(); }
};

/// Strictly lower triangular penalty matrix, entries delta (phi (T - t_i) + varrho).
Eigen::MatrixXd penalty_kernel_matrix(const TimeGrid& grid, double phi, double varrho);

/// Assembled discrete operators shared by the solver, the metrics, and the
/// diagnostics; built once per problem.
struct DiscreteOperators {
    explicit DiscreteOperators(const ProblemSpec& spec);

    TimeGrid grid;
    Eigen::MatrixXd kernel;          ///< K_G, strictly lower
    Eigen::MatrixXd penalty;         ///< K_H, strictly lower
    Eigen::MatrixXd combined;        ///< K = K_G + K_H
    Eigen::MatrixXd symmetric;       ///< F = gamma I + K + K^T
    Eigen::PartialPivLU<Eigen::MatrixXd> factor;  ///< of F (deterministic solve)
    Eigen::VectorXd penalty_profile; ///< phi (T - t_i) + varrho
    /// First row of F[i:, i:]^{-1} per anchor; the only piece of the
    /// conditioned system the sweep actually consumes.
    std::vector<Eigen::VectorXd> sweep_weights;
    /// gamma minus the O(delta) indefiniteness defect of the zero-diagonal
    /// discretization; non-positive values flag an ill-posed discrete system.
    double definiteness_margin = 0.0;
};

/// Z^u = g + G u per path.
PathEnsemble distortion(const ProblemSpec& spec, const PathEnsemble& rate);
PathEnsemble distortion(const ProblemSpec& spec, const DiscreteOperators& ops,
                        const PathEnsemble& rate);

/// I^u = (gamma/2) u + h(Z^u).
PathEnsemble impact_cost_process(const ProblemSpec& spec, const PathEnsemble& rate);

/// A(u) = h(Z^u) + G*(h'(Z^u) u); the adjoint term is conditioned with the
/// supplied feature state, or taken pathwise when `state` is null
/// (deterministic mode).
PathEnsemble apply_A(const ProblemSpec& spec, const PathEnsemble& rate,
                     const FeatureSet* state = nullptr);

/// A~(u) = A(u) - G u - G* u; identically zero for linear impact.
PathEnsemble apply_A_tilde(const ProblemSpec& spec, const PathEnsemble& rate,
                           const FeatureSet* state = nullptr);

/// Forward sweep for gamma u + (G+H) u + (G+H)* u = Y given the
/// conditional-expectation table of Y.  Anchor systems are path-independent;
/// u_{t_i} is read off as the first conditioned unknown.
PathEnsemble linear_fredholm_solve(const ProblemSpec& spec, const DiscreteOperators& ops,
                                   const PathEnsemble& source, const CondExpTable& table);

struct IterationStats {
    int iteration = 0;
    double residual = 0.0;      ///< E^{N,M}
    double pnl = 0.0;           ///< PnL^{N,M}
    double update_norm = 0.0;   ///< ||u^{[n]} - u^{[n-1]}|| over dt (x) P
};

struct ContractionDiagnostics {
    double kernel_constant = 0.0;   ///< C_G
    double sup_h_prime = 1.0;
    double lipschitz_h_prime = 0.0; ///< L
    double m_gamma = 0.0;           ///< sample max of int u^2 dt
    double c_tilde = 0.0;
    double ratio = 0.0;             ///< C_tilde / gamma
    bool certified = false;         ///< C_tilde < gamma
};

struct SchemeSettings {
    int iterations = 30;
    bool deterministic = false;   ///< skip all regressions (also implied by M == 1)
    double stop_tolerance = 0.0;  ///< early stop on relative update norm; 0 = fixed count
    int threads = 1;
    bool record_metrics = true;   ///< compute E^{N,M} and PnL every iteration
    bool record_iterates = false; ///< keep every u^{[n]} (deterministic diagnostics)
};

struct SchemeReport {
    std::vector<IterationStats> iterations;
    ContractionDiagnostics diagnostics;
    Eigen::VectorXd per_path_error;  ///< E^N(u(omega_m)) at the final iterate
    PathEnsemble rate;
    PathEnsemble inventory;
    PathEnsemble distortion;
    PathEnsemble impact_cost;
    double definiteness_margin = 0.0;
    bool aborted = false;  ///< residual went non-finite
    int iterations_run = 0;
    std::vector<Eigen::MatrixXd> iterates;  ///< filled when record_iterates is set
};

/// The iterative scheme: u[0] = 0; each step solves the linear Fredholm
/// equation with source Y[n-1] = alpha~ - A~(u^{[n-1]}).
/// `residual_regression` drives the error metric's independent conditional
/// expectations (ignored in deterministic mode).
SchemeReport iterate_scheme(const ProblemSpec& spec, const RegressionConfig& solve_regression,
                            const RegressionConfig& residual_regression,
                            const SchemeSettings& settings);

/// Empirical revenue functional (delta/M) sum_m sum_i (alpha - I^u) u.
double pnl(const ProblemSpec& spec, const PathEnsemble& rate);

/// Squared FOC residual: per-path E^N values and their (delta/M) average.
/// Adjoint terms inside the metric are conditioned with `state` when given.
std::pair<double, Eigen::VectorXd> residual_error(const ProblemSpec& spec,
                                                  const DiscreteOperators& ops,
                                                  const PathEnsemble& rate,
                                                  const FeatureSet* state = nullptr);
std::pair<double, Eigen::VectorXd> residual_error(const ProblemSpec& spec,
                                                  const PathEnsemble& rate,
                                                  const RegressionConfig& regression);

ContractionDiagnostics contraction_diagnostics(const ProblemSpec& spec,
                                               const PathEnsemble& u_hat);

struct AprioriBound {
    bool applicable = false;       ///< the lemma's gamma inequality holds
    double threshold = 0.0;        ///< smallest gamma the lemma accepts
    Eigen::VectorXd per_path;      ///< bound on ||u(omega)||_{L2}, when applicable
    bool conditional_estimated = false;  ///< stochastic surrogate was used
};

/// A-priori L2 bound on any solution, from the kernel/penalty constants and
/// the realized signals; "not applicable" when gamma is below the threshold.
AprioriBound apriori_bound(const ProblemSpec& spec);

/// Single-path nonlinear operator u -> A(u) for monotonicity sampling.
std::function<Eigen::VectorXd(const Eigen::VectorXd&)> monotonicity_operator(
    const ProblemSpec& spec);

}  // namespace volterra
