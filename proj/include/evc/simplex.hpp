#pragma once

#include <Eigen/Dense>

namespace evc {

// A point on the unit simplex: nonnegative coordinates summing to one.
// For d=2 the scalar t stands for the pair (t, 1-t).
class SimplexPoint {
public:
    explicit SimplexPoint(Eigen::VectorXd coords);

    int d() const { return static_cast<int>(w_.size()); }
    const Eigen::VectorXd& coords() const { return w_; }
    double operator[](int j) const { return w_[j]; }

    // First coordinate; the canonical scalar parametrization when d=2.
    double t() const { return w_[0]; }

    bool is_vertex(double tol = 1e-12) const;
    int vertex_index(double tol = 1e-12) const;  // -1 if not a vertex

private:
    Eigen::VectorXd w_;
};

// Validates and renormalizes: entries must be nonnegative with positive sum.
SimplexPoint make_simplex_point(const Eigen::VectorXd& coords);

// (t, 1-t) for t in [0,1].
SimplexPoint simplex2(double t);

}  // namespace evc
