#pragma once

#include "volterra/kernels.hpp"
#include "volterra/time_grid.hpp"

#include <Eigen/Cholesky>
#include <optional>
#include <string>
#include <vector>

namespace volterra {

enum class PolyFamily { Laguerre, Legendre, Chebyshev, Hermite };

PolyFamily poly_family_from_name(const std::string& name);
std::string poly_family_name(PolyFamily family);

/// Multi-indices (l_1..l_P) with sum l_p <= d, graded lexicographic order.
std::vector<std::vector<int>> graded_multi_indices(int variables, int degree);

/// Number of expanded features, binom(P + d, d).
Eigen::Index basis_size(int variables, int degree);

/// Tensor-product polynomial expansion of an M x P feature block into
/// M x binom(P+d, d) columns, one per multi-index.
Eigen::MatrixXd basis_expand(const Eigen::MatrixXd& features, PolyFamily family, int degree);

/// A named feature constructor mapping stored ensembles to an M x N matrix.
struct FeatureSpec {
    enum class Kind {
        Alpha,            ///< the signal itself
        AlphaIntegral,    ///< int_0^t alpha ds
        AlphaExpAvg,      ///< int_0^t e^{-kappa (t-s)} alpha_s ds
        Rate,             ///< current iterate u
        RateIntegral,     ///< int_0^t u ds
        RateExpAvg,       ///< int_0^t e^{-kappa (t-s)} u_s ds
        AlphaKernelConv,  ///< int_0^t G(t,s) alpha_s ds
    };
    Kind kind = Kind::Alpha;
    double kappa = 0.0;  ///< decay for the exp-weighted kinds

    static FeatureSpec parse(const std::string& name, double kappa);
    std::string name() const;
    bool depends_on_rate() const {
        return kind == Kind::Rate || kind == Kind::RateIntegral || kind == Kind::RateExpAvg;
    }
};

struct RegressionConfig {
    std::vector<FeatureSpec> variables;
    PolyFamily family = PolyFamily::Laguerre;
    int degree = 2;
    double ridge = 1e-6;
    bool standardize = true;

    bool depends_on_rate() const;
    Eigen::Index basis_size() const {
        return volterra::basis_size(static_cast<int>(variables.size()), degree);
    }
};

/// The per-variable M x N matrices the anchors slice their state from.
/// Rate-dependent variables are rebuilt per scheme iteration; signal-only
/// variables are built once.
class FeatureSet {
public:
    FeatureSet(const RegressionConfig& config, const TimeGrid& grid,
               const PathEnsemble& alpha, const VolterraMatrix* kernel = nullptr);

    /// Recompute the rate-dependent variables from the current iterate.
    void update_rate(const Eigen::MatrixXd& rate);

    /// Raw M x P features at anchor i.
    Eigen::MatrixXd at(Eigen::Index anchor) const;

    /// Standardized (if configured) and polynomial-expanded basis at anchor i.
    Eigen::MatrixXd anchor_basis(Eigen::Index anchor) const;

    const RegressionConfig& config() const { return config_; }
    Eigen::Index paths() const { return paths_; }

private:
    RegressionConfig config_;
    TimeGrid grid_;
    Eigen::Index paths_;
    const PathEnsemble* alpha_;
    const VolterraMatrix* kernel_;
    std::vector<Eigen::MatrixXd> columns_;  // one M x N matrix per variable
};

/// Ridge regression with one shared Gram factorization serving any number of
/// target columns (multi-output least squares).
class AnchorRegression {
public:
    AnchorRegression(Eigen::MatrixXd basis, double ridge);

    /// Fitted values X beta for each target column.
    Eigen::MatrixXd fit(const Eigen::Ref<const Eigen::MatrixXd>& targets) const;

private:
    Eigen::MatrixXd basis_;
    Eigen::LDLT<Eigen::MatrixXd> gram_;
};

/// Conditional-expectation block at one anchor: column j-i of block(i) holds
/// Ehat_{t_i}[Y_{t_j}] per path, with the j = i column equal to Y_{t_i}.
/// Anchor 0 conditions on trivial information and uses cross-path means.
Eigen::MatrixXd condexp_estimate(const PathEnsemble& targets, Eigen::Index anchor,
                                 const FeatureSet& state);

struct CondExpTable {
    std::vector<Eigen::MatrixXd> blocks;  // blocks[i] is M x (N - i)
};

CondExpTable condexp_table(const PathEnsemble& targets, const FeatureSet& state);

}  // namespace volterra
