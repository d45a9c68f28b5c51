#pragma once

#include <Eigen/Dense>
#include <vector>

#include "evc/simplex.hpp"

namespace evc {

// A discrete probability measure on the simplex: the M of the weighted
// least-squares projection. Weights are positive and sum to one.
struct GridMeasure {
    std::vector<SimplexPoint> points;
    Eigen::VectorXd weights;

    int size() const { return static_cast<int>(points.size()); }
};

GridMeasure make_grid_measure(std::vector<SimplexPoint> points,
                              Eigen::VectorXd weights);

// Uniform measure on t_i = i/(N+1), i = 1..N (d=2). N=19 gives the
// default estimation grid t = 0.05, 0.10, ..., 0.95.
GridMeasure uniform_grid_2d(int n_points);

}  // namespace evc
