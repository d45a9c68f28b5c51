#include "evc/grid.hpp"

#include <cmath>

#include "evc/common.hpp"

namespace evc {

GridMeasure make_grid_measure(std::vector<SimplexPoint> points,
                              Eigen::VectorXd weights) {
    if (points.empty()) throw DomainError("grid measure: no points");
    if (static_cast<Eigen::Index>(points.size()) != weights.size())
        throw DimensionMismatch("grid measure: points/weights length mismatch");
    for (Eigen::Index i = 0; i < weights.size(); ++i)
        if (!(weights[i] > 0.0)) throw DomainError("grid measure: nonpositive weight");
    if (std::abs(weights.sum() - 1.0) > 1e-12)
        throw DomainError("grid measure: weights must sum to 1");
    return GridMeasure{std::move(points), std::move(weights)};
}

GridMeasure uniform_grid_2d(int n_points) {
    if (n_points < 1) throw DomainError("uniform_grid_2d: need at least one point");
    std::vector<SimplexPoint> pts;
    pts.reserve(n_points);
    for (int i = 1; i <= n_points; ++i)
        pts.push_back(simplex2(static_cast<double>(i) / (n_points + 1)));
    Eigen::VectorXd w = Eigen::VectorXd::Constant(n_points, 1.0 / n_points);
    return GridMeasure{std::move(pts), std::move(w)};
}

}  // namespace evc
