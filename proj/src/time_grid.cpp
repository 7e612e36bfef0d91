#include "volterra/time_grid.hpp"

#include <cmath>
#include <stdexcept>

namespace volterra {

TimeGrid::TimeGrid(double horizon, Eigen::Index points) : horizon_(horizon) {
    if (!(horizon > 0.0)) throw std::invalid_argument("TimeGrid: horizon must be positive");
    if (points < 2) throw std::invalid_argument("TimeGrid: need at least 2 points");
    step_ = horizon / static_cast<double>(points - 1);
    points_.resize(points);
    for (Eigen::Index i = 0; i < points; ++i)
        points_[i] = step_ * static_cast<double>(i);
    points_[points - 1] = horizon;  // exact endpoint
}

PathEnsemble::PathEnsemble(TimeGrid g, Eigen::MatrixXd v, std::string l)
    : grid(std::move(g)), values(std::move(v)), label(std::move(l)) {
    if (values.rows() < 1) throw std::invalid_argument("PathEnsemble: need at least one path");
    if (values.cols() != grid.size())
        throw std::invalid_argument("PathEnsemble: column count must match grid");
    require_finite();
}

PathEnsemble PathEnsemble::constant(const TimeGrid& grid, Eigen::Index paths,
                                    double value, std::string label) {
    return PathEnsemble(grid, Eigen::MatrixXd::Constant(paths, grid.size(), value),
                        std::move(label));
}

PathEnsemble PathEnsemble::zero(const TimeGrid& grid, Eigen::Index paths, std::string label) {
    return constant(grid, paths, 0.0, std::move(label));
}

void PathEnsemble::require_finite() const {
    if (!values.allFinite())
        throw std::runtime_error("PathEnsemble '" + label + "' contains non-finite entries");
}

double ensemble_l2_norm(const PathEnsemble& v) {
    const double ms = v.values.squaredNorm() / static_cast<double>(v.paths());
    return std::sqrt(v.grid.step() * ms);
}

}  // namespace volterra
