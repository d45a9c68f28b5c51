#pragma once

#include <Eigen/Dense>
#include <vector>

#include "evc/pickands.hpp"

namespace evc {

// Model weights theta_1..theta_{p-1}; the last basis element carries weight
// 1 - sum(theta). Unconstrained estimates may leave the closed parameter set
// {theta >= 0, sum <= 1}; feasible() reports membership.
struct Theta {
    Eigen::VectorXd values;
    bool feasible(double slack = 1e-12) const;
};

struct BasisFamily {
    std::vector<PickandsModel> basis;
    int d = 2;
    int p() const { return static_cast<int>(basis.size()); }
};

// Validates shared dimension and pairwise distinctness of the A_i on a grid.
// Linear dependence is not checked here; it surfaces as a rank-deficient
// Gram matrix in the projection estimator.
BasisFamily make_basis_family(std::vector<PickandsModel> basis);

// A(w, theta) = sum_i theta_i A_i(w) + (1 - sum theta) A_p(w). Affine in
// theta, so infeasible values still evaluate; strict rejects them.
double family_A(const BasisFamily& fam, const Theta& theta, const SimplexPoint& w,
                bool strict = false);
double family_A_t(const BasisFamily& fam, const Theta& theta, double t,
                  bool strict = false);

// h_j(w) = A_j(w) - A_p(w), j = 1..p-1.
Eigen::VectorXd family_h(const BasisFamily& fam, const SimplexPoint& w);
Eigen::VectorXd family_h_t(const BasisFamily& fam, double t);

// C(u, theta) = exp(-r A(w, theta)), r = |log u|_1, w = (-log u)/r.
double copula_eval(const BasisFamily& fam, const Theta& theta,
                   const Eigen::VectorXd& u);

// Gradient of C in theta: dC/dtheta_j = -r h_j(w) C(u, theta). Zero by
// continuity when r = 0 or C = 0.
Eigen::VectorXd copula_gradient(const BasisFamily& fam, const Theta& theta,
                                const Eigen::VectorXd& u);

}  // namespace evc
