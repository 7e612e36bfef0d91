#pragma once

#include "volterra/kernels.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace volterra {

/// L2([0,T]) distance squared between the shifted fractional kernel and an
/// exponential sum, in closed form:
///   sum_{i,j} xi_i xi_j (1 - e^{-(x_i+x_j)T})/(x_i+x_j)
///   + xi^2 ((T+eps)^{2nu-1} - eps^{2nu-1})/(2nu-1)
///   - 2 xi sum_i xi_i e^{x_i eps} / x_i^nu * Gamma(nu) (P(nu, x_i(T+eps)) - P(nu, x_i eps)).
/// The cross term is evaluated through a log-scaled upper-tail form; the naive
/// expression loses all precision once x_i * eps is large.  Requires x_i > 0.
double expsum_fit_loss(const ShiftedFractional& frac, const ExponentialSum& sum, double horizon);

struct NelderMeadResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int evaluations = 0;
    bool converged = false;
};

/// Bare-bones Nelder-Mead on R^n; good enough for the smooth low-dimensional
/// kernel-fit objective when wrapped in multi-start.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& start, double initial_step,
                             int max_evaluations, double f_tolerance);

struct ExpSumFit {
    ExponentialSum kernel;
    double loss = 0.0;
    bool converged = false;
};

struct FitOptions {
    int multistart = 48;       ///< random starts per term count
    std::uint64_t seed = 2024;
    double rate_cap = 1e6;     ///< rates are clamped here; see module notes
    int max_evaluations = 40000;
    int threads = 1;
};

/// Best local fit with p terms, seeded incrementally from the (p-1)-term fit
/// when one is supplied.  Optimizes (log xi_i, log x_i); ties on loss break
/// toward the smallest rate sum.
ExpSumFit fit_exponential_sum(const ShiftedFractional& frac, int terms, double horizon,
                              const FitOptions& options = {},
                              const ExponentialSum* warm_start = nullptr);

/// Incremental table of fits for p = 1..max_terms (each fit warm-starts the next).
std::vector<ExpSumFit> fit_exponential_sum_table(const ShiftedFractional& frac, int max_terms,
                                                 double horizon, const FitOptions& options = {});

}  // namespace volterra
