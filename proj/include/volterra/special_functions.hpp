#pragma once

namespace volterra {

/// Gamma function on (0, inf).
double gamma_fn(double a);

/// Regularized lower incomplete gamma P(a, t) = gamma(a, t) / Gamma(a),
/// series for t < a + 1, Lentz continued fraction otherwise.
double reg_lower_incomplete_gamma(double a, double t);

/// log of the regularized upper incomplete gamma Q(a, t) = 1 - P(a, t),
/// continued-fraction branch, valid for t > a + 1.
double log_reg_upper_incomplete_gamma(double a, double t);

/// e^{x eps} * (P(nu, x (T+eps)) - P(nu, x eps)) evaluated without the
/// catastrophic cancellation that hits the naive form once x*eps is large.
/// Equals x^nu / Gamma(nu) * integral_0^T (t+eps)^{nu-1} e^{-x t} dt.
double scaled_gamma_tail_difference(double nu, double eps, double horizon, double x);

}  // namespace volterra
