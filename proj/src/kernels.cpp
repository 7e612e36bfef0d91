#include "volterra/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace volterra {

void ExponentialSum::validate() const {
    if (weights.size() < 1) throw std::invalid_argument("ExponentialSum: need p >= 1 terms");
    if (weights.size() != rates.size())
        throw std::invalid_argument("ExponentialSum: weights/rates size mismatch");
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
        if (!(weights[i] > 0.0)) throw std::invalid_argument("ExponentialSum: weights must be > 0");
        if (rates[i] < 0.0) throw std::invalid_argument("ExponentialSum: rates must be >= 0");
    }
}

void ShiftedFractional::validate() const {
    if (!(scale > 0.0)) throw std::invalid_argument("ShiftedFractional: scale must be > 0");
    if (!(exponent > 0.5 && exponent < 1.0))
        throw std::invalid_argument("ShiftedFractional: exponent must lie in (1/2, 1)");
    if (shift < 0.0) throw std::invalid_argument("ShiftedFractional: shift must be >= 0");
}

void ConstantKernel::validate() const {
    if (level < 0.0) throw std::invalid_argument("ConstantKernel: level must be >= 0");
}

void validate(const KernelSpec& k) {
    std::visit([](const auto& v) { v.validate(); }, k);
}

std::string kernel_name(const KernelSpec& k) {
    struct Visitor {
        std::string operator()(const ExponentialSum& e) const {
            return "exponential_sum(p=" + std::to_string(e.count()) + ")";
        }
        std::string operator()(const ShiftedFractional&) const { return "shifted_fractional"; }
        std::string operator()(const ConstantKernel&) const { return "constant"; }
    };
    return std::visit(Visitor{}, k);
}

double kernel_eval(const KernelSpec& k, double t, double s) {
    const double lag = t - s;
    struct Visitor {
        double lag;
        double operator()(const ExponentialSum& e) const {
            double acc = 0.0;
            for (Eigen::Index i = 0; i < e.count(); ++i)
                acc += e.weights[i] * std::exp(-e.rates[i] * lag);
            return acc;
        }
        double operator()(const ShiftedFractional& f) const {
            if (f.shift == 0.0 && lag <= 0.0)
                throw std::invalid_argument("kernel_eval: singular fractional kernel at lag <= 0");
            return f.scale * std::pow(lag + f.shift, f.exponent - 1.0);
        }
        double operator()(const ConstantKernel& c) const { return c.level; }
    };
    return std::visit(Visitor{lag}, k);
}

namespace {

// int_0^T (sum_i w_i e^{-x_i tau})^2 dtau, with the x_i + x_j -> 0 limit handled.
double expsum_square_integral(const ExponentialSum& e, double T) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < e.count(); ++i) {
        for (Eigen::Index j = 0; j < e.count(); ++j) {
            const double s = e.rates[i] + e.rates[j];
            const double w = e.weights[i] * e.weights[j];
            acc += (s > 0.0) ? w * (-std::expm1(-s * T)) / s : w * T;
        }
    }
    return acc;
}

double kernel_square_integral(const KernelSpec& k, double T) {
    struct Visitor {
        double T;
        double operator()(const ExponentialSum& e) const { return expsum_square_integral(e, T); }
        double operator()(const ShiftedFractional& f) const {
            const double q = 2.0 * f.exponent - 1.0;
            const double upper = std::pow(T + f.shift, q);
            const double lower = (f.shift > 0.0) ? std::pow(f.shift, q) : 0.0;
            return f.scale * f.scale * (upper - lower) / q;
        }
        double operator()(const ConstantKernel& c) const { return c.level * c.level * T; }
    };
    return std::visit(Visitor{T}, k);
}

}  // namespace

double admissibility_constant(const KernelSpec& k, double horizon) {
    if (!(horizon > 0.0)) throw std::invalid_argument("admissibility_constant: horizon must be > 0");
    validate(k);
    // Convolution kernels: int_0^t G(tau)^2 dtau is increasing in t, sup at t = T.
    return kernel_square_integral(k, horizon);
}

double adjoint_admissibility_constant(const KernelSpec& k, double horizon) {
    if (!(horizon > 0.0))
        throw std::invalid_argument("adjoint_admissibility_constant: horizon must be > 0");
    validate(k);
    // int_t^T G(s - t)^2 ds = int_0^{T-t} G(tau)^2 dtau, sup at t = 0.
    return kernel_square_integral(k, horizon);
}

VolterraMatrix nystrom(const KernelSpec& k, const TimeGrid& grid) {
    validate(k);
    const Eigen::Index n = grid.size();
    const double dt = grid.step();
    Eigen::MatrixXd entries = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 1; i < n; ++i)
        for (Eigen::Index j = 0; j < i; ++j)
            entries(i, j) = dt * kernel_eval(k, grid.point(i), grid.point(j));
    if (!entries.allFinite()) throw std::runtime_error("nystrom: non-finite kernel entries");
    return VolterraMatrix{grid, std::move(entries)};
}

}  // namespace volterra
