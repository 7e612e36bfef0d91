#pragma once

#include "volterra/time_grid.hpp"

#include <Eigen/Core>
#include <string>
#include <variant>

namespace volterra {

/// G(t,s) = sum_i xi_i e^{-x_i (t-s)}, weights xi_i > 0, rates x_i >= 0.
struct ExponentialSum {
    Eigen::VectorXd weights;
    Eigen::VectorXd rates;
    void validate() const;
    Eigen::Index count() const { return weights.size(); }
};

/// G(t,s) = scale * (t - s + shift)^{exponent - 1}, exponent in (1/2, 1),
/// shift >= 0; shift = 0 is singular at zero lag.
struct ShiftedFractional {
    double scale = 1.0;
    double exponent = 0.6;
    double shift = 0.0;
    void validate() const;
};

/// G(t,s) = level (permanent impact).
struct ConstantKernel {
    double level = 0.0;
    void validate() const;
};

using KernelSpec = std::variant<ExponentialSum, ShiftedFractional, ConstantKernel>;

void validate(const KernelSpec& k);
std::string kernel_name(const KernelSpec& k);

/// G evaluated at lag t - s; requires t > s (the singular fractional case with
/// shift = 0 rejects t <= s outright).
double kernel_eval(const KernelSpec& k, double t, double s);

/// C_G = sup_{t in [0,T]} int_0^t G(t,s)^2 ds, closed form; the sup is
/// attained at t = T for all supported (convolution) kernels.
double admissibility_constant(const KernelSpec& k, double horizon);

/// C_G* = sup_{t} int_t^T G(s,t)^2 ds; equal to C_G for convolution kernels
/// (the sup moves to t = 0).
double adjoint_admissibility_constant(const KernelSpec& k, double horizon);

/// Strictly lower triangular Nystrom matrix, entries (i,j) = delta * G(t_i, t_j)
/// for j < i.  The zero diagonal is what makes the singular fractional kernel
/// usable: the smallest evaluated lag is one grid step.
struct VolterraMatrix {
    TimeGrid grid{1.0, 2};
    Eigen::MatrixXd entries;
};

VolterraMatrix nystrom(const KernelSpec& k, const TimeGrid& grid);

}  // namespace volterra
