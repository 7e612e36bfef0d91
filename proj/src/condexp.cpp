#include "volterra/condexp.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

namespace volterra {

PolyFamily poly_family_from_name(const std::string& name) {
    if (name == "laguerre") return PolyFamily::Laguerre;
    if (name == "legendre") return PolyFamily::Legendre;
    if (name == "chebyshev") return PolyFamily::Chebyshev;
    if (name == "hermite") return PolyFamily::Hermite;
    throw std::invalid_argument("unknown polynomial family: " + name);
}

std::string poly_family_name(PolyFamily family) {
    switch (family) {
        case PolyFamily::Laguerre: return "laguerre";
        case PolyFamily::Legendre: return "legendre";
        case PolyFamily::Chebyshev: return "chebyshev";
        case PolyFamily::Hermite: return "hermite";
    }
    return "?";
}

std::vector<std::vector<int>> graded_multi_indices(int variables, int degree) {
    std::vector<std::vector<int>> out;
    std::vector<int> current(variables, 0);
    auto rec = [&](auto&& self, int pos, int remaining) -> void {
        if (pos == variables - 1) {
            current[pos] = remaining;
            out.push_back(current);
            return;
        }
        for (int l = remaining; l >= 0; --l) {
            current[pos] = l;
            self(self, pos + 1, remaining - l);
        }
    };
    for (int total = 0; total <= degree; ++total) rec(rec, 0, total);
    return out;
}

Eigen::Index basis_size(int variables, int degree) {
    // binom(P + d, d)
    Eigen::Index n = 1;
    for (int i = 1; i <= degree; ++i)
        n = n * (variables + i) / i;
    return n;
}

namespace {

// Column l holds the family's degree-l polynomial of x, via the standard
// three-term recurrences.
Eigen::MatrixXd univariate_values(const Eigen::VectorXd& x, PolyFamily family, int degree) {
    const Eigen::Index m = x.size();
    Eigen::MatrixXd vals(m, degree + 1);
    vals.col(0).setOnes();
    if (degree == 0) return vals;
    switch (family) {
        case PolyFamily::Laguerre:
            vals.col(1) = Eigen::VectorXd::Ones(m) - x;
            for (int n = 1; n < degree; ++n)
                vals.col(n + 1) = (((2.0 * n + 1.0) - x.array()) * vals.col(n).array() -
                                   n * vals.col(n - 1).array()) / (n + 1.0);
            break;
        case PolyFamily::Legendre:
            vals.col(1) = x;
            for (int n = 1; n < degree; ++n)
                vals.col(n + 1) = ((2.0 * n + 1.0) * x.array() * vals.col(n).array() -
                                   n * vals.col(n - 1).array()) / (n + 1.0);
            break;
        case PolyFamily::Chebyshev:
            vals.col(1) = x;
            for (int n = 1; n < degree; ++n)
                vals.col(n + 1) = 2.0 * x.array() * vals.col(n).array() - vals.col(n - 1).array();
            break;
        case PolyFamily::Hermite:  // probabilists'
            vals.col(1) = x;
            for (int n = 1; n < degree; ++n)
                vals.col(n + 1) = x.array() * vals.col(n).array() - n * vals.col(n - 1).array();
            break;
    }
    return vals;
}

}  // namespace

Eigen::MatrixXd basis_expand(const Eigen::MatrixXd& features, PolyFamily family, int degree) {
    if (degree < 0) throw std::invalid_argument("basis_expand: degree must be >= 0");
    if (!features.allFinite()) throw std::invalid_argument("basis_expand: non-finite features");
    const int p = static_cast<int>(features.cols());
    const auto indices = graded_multi_indices(p, degree);
    std::vector<Eigen::MatrixXd> uni;
    uni.reserve(p);
    for (int v = 0; v < p; ++v)
        uni.push_back(univariate_values(features.col(v), family, degree));

    Eigen::MatrixXd out(features.rows(), static_cast<Eigen::Index>(indices.size()));
    for (Eigen::Index col = 0; col < out.cols(); ++col) {
        Eigen::VectorXd prod = Eigen::VectorXd::Ones(features.rows());
        for (int v = 0; v < p; ++v) {
            const int l = indices[static_cast<std::size_t>(col)][v];
            if (l > 0) prod.array() *= uni[v].col(l).array();
        }
        out.col(col) = prod;
    }
    return out;
}

FeatureSpec FeatureSpec::parse(const std::string& name, double kappa) {
    FeatureSpec spec;
    spec.kappa = kappa;
    if (name == "alpha") spec.kind = Kind::Alpha;
    else if (name == "alpha_integral") spec.kind = Kind::AlphaIntegral;
    else if (name == "alpha_exp_avg") spec.kind = Kind::AlphaExpAvg;
    else if (name == "rate") spec.kind = Kind::Rate;
    else if (name == "rate_integral") spec.kind = Kind::RateIntegral;
    else if (name == "rate_exp_avg") spec.kind = Kind::RateExpAvg;
    else if (name == "alpha_kernel_conv") spec.kind = Kind::AlphaKernelConv;
    else throw std::invalid_argument("unknown regression variable: " + name);
    if ((spec.kind == Kind::AlphaExpAvg || spec.kind == Kind::RateExpAvg) && !(kappa > 0.0))
        throw std::invalid_argument("exp-weighted feature needs kappa > 0: " + name);
    return spec;
}

std::string FeatureSpec::name() const {
    switch (kind) {
        case Kind::Alpha: return "alpha";
        case Kind::AlphaIntegral: return "alpha_integral";
        case Kind::AlphaExpAvg: return "alpha_exp_avg";
        case Kind::Rate: return "rate";
        case Kind::RateIntegral: return "rate_integral";
        case Kind::RateExpAvg: return "rate_exp_avg";
        case Kind::AlphaKernelConv: return "alpha_kernel_conv";
    }
    return "?";
}

bool RegressionConfig::depends_on_rate() const {
    for (const auto& v : variables)
        if (v.depends_on_rate()) return true;
    return false;
}

namespace {

Eigen::MatrixXd running_integral(const Eigen::MatrixXd& w, double dt) {
    Eigen::MatrixXd out(w.rows(), w.cols());
    out.col(0).setZero();
    for (Eigen::Index j = 1; j < w.cols(); ++j)
        out.col(j) = out.col(j - 1) + dt * w.col(j - 1);
    return out;
}

Eigen::MatrixXd exp_weighted_integral(const Eigen::MatrixXd& w, double dt, double kappa) {
    // F_i = e^{-kappa dt} (F_{i-1} + dt w_{i-1}); left-rectangle in the integrand.
    const double decay = std::exp(-kappa * dt);
    Eigen::MatrixXd out(w.rows(), w.cols());
    out.col(0).setZero();
    for (Eigen::Index j = 1; j < w.cols(); ++j)
        out.col(j) = decay * (out.col(j - 1) + dt * w.col(j - 1));
    return out;
}

}  // namespace

FeatureSet::FeatureSet(const RegressionConfig& config, const TimeGrid& grid,
                       const PathEnsemble& alpha, const VolterraMatrix* kernel)
    : config_(config), grid_(grid), paths_(alpha.paths()), alpha_(&alpha), kernel_(kernel) {
    if (config_.variables.empty())
        throw std::invalid_argument("FeatureSet: need at least one regression variable");
    columns_.resize(config_.variables.size());
    const double dt = grid_.step();
    for (std::size_t v = 0; v < config_.variables.size(); ++v) {
        const auto& spec = config_.variables[v];
        switch (spec.kind) {
            case FeatureSpec::Kind::Alpha: columns_[v] = alpha.values; break;
            case FeatureSpec::Kind::AlphaIntegral:
                columns_[v] = running_integral(alpha.values, dt);
                break;
            case FeatureSpec::Kind::AlphaExpAvg:
                columns_[v] = exp_weighted_integral(alpha.values, dt, spec.kappa);
                break;
            case FeatureSpec::Kind::AlphaKernelConv:
                if (!kernel)
                    throw std::invalid_argument("alpha_kernel_conv needs a kernel matrix");
                columns_[v] = alpha.values * kernel->entries.transpose();
                break;
            default:
                columns_[v].setZero(paths_, grid_.size());  // filled by update_rate
        }
    }
}

void FeatureSet::update_rate(const Eigen::MatrixXd& rate) {
    const double dt = grid_.step();
    for (std::size_t v = 0; v < config_.variables.size(); ++v) {
        const auto& spec = config_.variables[v];
        switch (spec.kind) {
            case FeatureSpec::Kind::Rate: columns_[v] = rate; break;
            case FeatureSpec::Kind::RateIntegral:
                columns_[v] = running_integral(rate, dt);
                break;
            case FeatureSpec::Kind::RateExpAvg:
                columns_[v] = exp_weighted_integral(rate, dt, spec.kappa);
                break;
            default: break;
        }
    }
}

Eigen::MatrixXd FeatureSet::at(Eigen::Index anchor) const {
    Eigen::MatrixXd raw(paths_, static_cast<Eigen::Index>(columns_.size()));
    for (std::size_t v = 0; v < columns_.size(); ++v)
        raw.col(static_cast<Eigen::Index>(v)) = columns_[v].col(anchor);
    return raw;
}

Eigen::MatrixXd FeatureSet::anchor_basis(Eigen::Index anchor) const {
    Eigen::MatrixXd raw = at(anchor);
    if (config_.standardize) {
        for (Eigen::Index v = 0; v < raw.cols(); ++v) {
            const double mean = raw.col(v).mean();
            raw.col(v).array() -= mean;
            const double sd = std::sqrt(raw.col(v).squaredNorm() /
                                        static_cast<double>(raw.rows()));
            if (sd > 1e-12) raw.col(v) /= sd;
            else raw.col(v).setZero();
        }
    }
    if (!raw.allFinite())
        throw std::runtime_error("FeatureSet: non-finite features at anchor " +
                                 std::to_string(anchor));
    return basis_expand(raw, config_.family, config_.degree);
}

AnchorRegression::AnchorRegression(Eigen::MatrixXd basis, double ridge) : basis_(std::move(basis)) {
    if (ridge < 0.0) throw std::invalid_argument("AnchorRegression: ridge must be >= 0");
    Eigen::MatrixXd gram = basis_.transpose() * basis_;
    // The constant column (always first in graded order) is left unpenalized,
    // so the large-ridge limit collapses onto the cross-path sample mean.
    if (gram.rows() > 1) gram.diagonal().tail(gram.rows() - 1).array() += ridge;
    gram_.compute(gram);
    const double d_max = gram_.vectorD().cwiseAbs().maxCoeff();
    const double d_min = gram_.vectorD().minCoeff();
    if (ridge == 0.0 && (d_min <= d_max * 1e-14))
        throw std::runtime_error(
            "AnchorRegression: singular Gram matrix; set ridge > 0 to regularize");
}

Eigen::MatrixXd AnchorRegression::fit(const Eigen::Ref<const Eigen::MatrixXd>& targets) const {
    return basis_ * gram_.solve(basis_.transpose() * targets);
}

Eigen::MatrixXd condexp_estimate(const PathEnsemble& targets, Eigen::Index anchor,
                                 const FeatureSet& state) {
    const Eigen::Index n = targets.steps();
    const Eigen::Index m = targets.paths();
    if (anchor < 0 || anchor >= n) throw std::invalid_argument("condexp_estimate: anchor out of range");
    if (m != state.paths()) throw std::invalid_argument("condexp_estimate: path count mismatch");
    if (m <= state.config().basis_size() && anchor == 0)
        std::cerr << "condexp_estimate: " << m << " paths for "
                  << state.config().basis_size() << " expanded features; estimates will be noisy" << std::endl;

    Eigen::MatrixXd block(m, n - anchor);
    block.col(0) = targets.values.col(anchor);  // E_{t_i}[Y_{t_i}] = Y_{t_i}
    if (anchor + 1 >= n) return block;

    const auto future = targets.values.rightCols(n - anchor - 1);
    if (anchor == 0) {
        // F_0 is trivial: plain cross-path means.
        block.rightCols(n - 1) = future.colwise().mean().replicate(m, 1);
        return block;
    }
    AnchorRegression reg(state.anchor_basis(anchor), state.config().ridge);
    block.rightCols(n - anchor - 1) = reg.fit(future);
    return block;
}

CondExpTable condexp_table(const PathEnsemble& targets, const FeatureSet& state) {
    CondExpTable table;
    table.blocks.reserve(targets.steps());
    for (Eigen::Index i = 0; i < targets.steps(); ++i)
        table.blocks.push_back(condexp_estimate(targets, i, state));
    return table;
}

}  // namespace volterra
