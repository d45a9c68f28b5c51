#include "evc/simplex.hpp"

#include <cmath>

#include "evc/common.hpp"

namespace evc {

SimplexPoint::SimplexPoint(Eigen::VectorXd coords) : w_(std::move(coords)) {}

bool SimplexPoint::is_vertex(double tol) const {
    return vertex_index(tol) >= 0;
}

int SimplexPoint::vertex_index(double tol) const {
    for (int j = 0; j < d(); ++j)
        if (std::abs(w_[j] - 1.0) <= tol) return j;
    return -1;
}

SimplexPoint make_simplex_point(const Eigen::VectorXd& coords) {
    if (coords.size() < 2) throw DimensionMismatch("simplex point needs d >= 2");
    for (Eigen::Index j = 0; j < coords.size(); ++j) {
        if (!std::isfinite(coords[j]))
            throw DomainError("simplex point: non-finite coordinate");
        if (coords[j] < 0.0)
            throw DomainError("simplex point: negative coordinate");
    }
    const double s = coords.sum();
    if (s <= 0.0) throw DomainError("simplex point: zero vector");
    return SimplexPoint(coords / s);
}

SimplexPoint simplex2(double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw OutOfRange("simplex2: t outside [0,1]");
    Eigen::VectorXd w(2);
    w << t, 1.0 - t;
    return SimplexPoint(std::move(w));
}

}  // namespace evc
