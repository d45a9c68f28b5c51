#pragma once

#include <Eigen/Dense>
#include <functional>
#include <variant>
#include <vector>

#include "evc/simplex.hpp"

namespace evc {

// A Pickands dependence function given directly, with optional analytic
// derivatives (d=2, parametrized by t).
struct ClosedForm {
    std::function<double(double)> A;
    std::function<double(double)> dA;   // optional
    std::function<double(double)> d2A;  // optional
};

// A spectral density f on [0,1] (d=2). When the antiderivatives
// g(z) = int_0^z t f(t) dt and h(z) = int_0^z f(t) dt are supplied in closed
// form, A and its derivatives are exact:
//   A(z)  = z - g(1-z) + (1-z) h(1-z)
//   A'(z) = 1 - h(1-z),  A''(z) = f(1-z).
// Otherwise A is computed by adaptive quadrature of the max-kernel integral,
// splitting at 1-z and at the density's own breakpoints.
struct SpectralDensity {
    std::function<double(double)> f;
    std::function<double(double)> g;  // optional, supply together with h
    std::function<double(double)> h;
    std::vector<double> breakpoints;  // non-smooth points of f
};

// A purely atomic spectral measure: pairs (location s_k in [0,1], mass c_k>0).
// A(t) = sum_k c_k max(s_k t, (1-s_k)(1-t)).
struct Atoms {
    std::vector<std::pair<double, double>> atoms;
};

struct PickandsModel {
    std::variant<ClosedForm, SpectralDensity, Atoms> impl;
    int d = 2;
};

double pickands_eval(const PickandsModel& model, const SimplexPoint& w);

// Scalar-parametrized evaluation and derivatives, d=2 only. Closed-form
// models without analytic derivatives fall back to central differences with
// step cbrt(eps); atomic models return the a.e. derivative.
double pickands_eval_t(const PickandsModel& model, double t);
double pickands_deriv(const PickandsModel& model, double t);
double pickands_second(const PickandsModel& model, double t);

// l(x) = |x|_1 * A(x / |x|_1); l(0) = 0.
double tail_dep_l(const PickandsModel& model, const Eigen::VectorXd& x);

struct ValidationReport {
    double vertex_violation = 0.0;     // max |A(e_j) - 1|
    double bounds_violation = 0.0;     // max of (max(w)-A)+ and (A-1)+
    double convexity_violation = 0.0;  // max midpoint-convexity defect (d=2)
    double moment_violation = 0.0;     // density models: unit first moments
    bool pass(double tol = 1e-9) const {
        return vertex_violation <= tol && bounds_violation <= tol &&
               convexity_violation <= tol && moment_violation <= 1e-8;
    }
};

ValidationReport validate_pickands(const PickandsModel& model, int grid_size);

}  // namespace evc
