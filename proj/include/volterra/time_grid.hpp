#pragma once

#include <Eigen/Core>
#include <string>

namespace volterra {

/// Uniform grid t_0 = 0 < t_1 < ... < t_{N-1} = T with step T/(N-1).
///
/// All quadratures in this library are left-rectangle sums on this grid,
/// which keeps every Volterra matrix strictly lower triangular and never
/// evaluates a kernel at zero lag.
class TimeGrid {
public:
    TimeGrid(double horizon, Eigen::Index points);

    double horizon() const { return horizon_; }
    Eigen::Index size() const { return points_.size(); }
    double step() const { return step_; }
    double point(Eigen::Index i) const { return points_[i]; }
    const Eigen::VectorXd& points() const { return points_; }

    bool operator==(const TimeGrid& other) const {
        return horizon_ == other.horizon_ && points_.size() == other.points_.size();
    }

private:
    double horizon_;
    double step_;
    Eigen::VectorXd points_;
};

/// M sample paths of one scalar process on a common grid, row m = path m.
///
/// Immutable after construction apart from direct access to values() by the
/// module that built it; every entry is required to be finite.
struct PathEnsemble {
    PathEnsemble() = default;
    PathEnsemble(TimeGrid grid, Eigen::MatrixXd values, std::string label);

    Eigen::Index paths() const { return values.rows(); }
    Eigen::Index steps() const { return values.cols(); }

    /// Constant process, all rows identical.
    static PathEnsemble constant(const TimeGrid& grid, Eigen::Index paths,
                                 double value, std::string label);
    /// All-zero ensemble.
    static PathEnsemble zero(const TimeGrid& grid, Eigen::Index paths, std::string label);

    void require_finite() const;

    TimeGrid grid{1.0, 2};
    Eigen::MatrixXd values;
    std::string label;
};

/// Discrete L2 norm over dt (x) P: sqrt(delta/M * sum_{m,i} v_{m,i}^2).
double ensemble_l2_norm(const PathEnsemble& v);

}  // namespace volterra
