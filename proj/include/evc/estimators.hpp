#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "evc/family.hpp"
#include "evc/grid.hpp"
#include "evc/simplex.hpp"

namespace evc {

inline constexpr double kEulerGamma = 0.57721566490153286;

// Per-column marginal specification for the exponential transform.
struct Marginal {
    enum Kind { Uniform01, Exponential1, Ranks, Custom };
    Kind kind = Ranks;
    std::function<double(double)> cdf;  // Custom only
    static Marginal uniform01() { return {Uniform01, {}}; }
    static Marginal exponential1() { return {Exponential1, {}}; }
    static Marginal ranks() { return {Ranks, {}}; }
    static Marginal custom(std::function<double(double)> f) {
        return {Custom, std::move(f)};
    }
};

// Standard-exponential pseudo-observations Y_ij = -log F_j(X_ij).
struct ExpMarginSample {
    Eigen::MatrixXd y;  // n x d, entries >= 0
    int n() const { return static_cast<int>(y.rows()); }
    int d() const { return static_cast<int>(y.cols()); }
};

// Ranks use Y = -log(rank/(n+1)) with average ranks on ties.
ExpMarginSample exp_margins(const Eigen::MatrixXd& data,
                            const std::vector<Marginal>& marginals);

// xi_i(w) = min over {j : w_j > 0} of Y_ij / w_j; Exp(A(w)) distributed.
Eigen::VectorXd xi(const ExpMarginSample& sample, const SimplexPoint& w);

// Nonparametric estimators. The plain one is exp(-mean(log xi) - gamma);
// zero xi values are dropped (counted into *dropped when given), all-zero
// throws ZeroXi. The OLS one regresses -log xi(w) - gamma on the endpoint
// values -log Y_j - gamma with intercept; exact calibration at the vertices.
double pickands_np(const ExpMarginSample& sample, const SimplexPoint& w,
                   int* dropped = nullptr);
double pickands_ols(const ExpMarginSample& sample, const SimplexPoint& w);

// Batch variants sharing one design factorization across grid points.
Eigen::VectorXd pickands_np_grid(const ExpMarginSample& sample,
                                 const std::vector<SimplexPoint>& points,
                                 int* dropped = nullptr);
Eigen::VectorXd pickands_ols_grid(const ExpMarginSample& sample,
                                  const std::vector<SimplexPoint>& points);

struct GramResult {
    Eigen::MatrixXd s;  // (p-1)x(p-1), s_ij = sum_l M_l h_i(w_l) h_j(w_l)
    bool full_rank = false;
    double eig_min = 0.0, eig_max = 0.0;
};

GramResult gram_matrix(const BasisFamily& fam, const GridMeasure& m);

enum class EstimatorKind { Plain, Ols };

struct ProjectionFit {
    Theta theta_hat;
    GramResult gram;
    Eigen::VectorXd rhs;
    std::optional<Eigen::MatrixXd> v_hat;
    EstimatorKind kind = EstimatorKind::Plain;
    bool constrained = false;
};

// Weighted least-squares projection theta = S^{-1} r of the centered
// estimates a_hat_l = A_hat(w_l) - A_p(w_l) onto span{h_1..h_{p-1}}.
ProjectionFit project_theta(const Eigen::VectorXd& a_hat, const BasisFamily& fam,
                            const GridMeasure& m);

// S-metric projections of theta_hat: onto the simplex {theta >= 0, sum <= 1}
// and onto the box [0,1]^{p-1}. Both enumerate active sets exactly (p <= 7).
ProjectionFit constrain_theta(const ProjectionFit& fit);
ProjectionFit constrain_theta_box(const ProjectionFit& fit);

ProjectionFit fit_parametric_A(const ExpMarginSample& sample, const BasisFamily& fam,
                               const GridMeasure& m, EstimatorKind kind,
                               bool constrained);

// Plug-in asymptotic covariance of sqrt(n)(theta_hat - theta0). a_values are
// the pointwise A estimates at m's points (same kind as requested); all
// -log xi covariances are replaced by empirical ones over the sample.
Eigen::MatrixXd asym_cov(const ExpMarginSample& sample, const BasisFamily& fam,
                         const GridMeasure& m, EstimatorKind kind,
                         const Eigen::VectorXd& a_values);

struct Interval {
    double lo = 0.0, hi = 0.0;
};

// Pointwise normal confidence intervals from the plug-in covariance.
Interval ci_for_A(const ProjectionFit& fit, const BasisFamily& fam,
                  const SimplexPoint& w, double level, int n);
Interval ci_for_C(const ProjectionFit& fit, const BasisFamily& fam,
                  const Eigen::VectorXd& u, double level, int n);

}  // namespace evc
