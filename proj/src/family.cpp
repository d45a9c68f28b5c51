#include "evc/family.hpp"

#include <cmath>

#include "evc/common.hpp"

namespace evc {
namespace {

void check_theta(const BasisFamily& fam, const Theta& theta, bool strict) {
    if (theta.values.size() != fam.p() - 1)
        throw DimensionMismatch("family_A: theta length must be p-1");
    if (strict && !theta.feasible()) throw InvalidTheta("family_A: theta outside Theta");
}

void check_u(const BasisFamily& fam, const Eigen::VectorXd& u) {
    if (u.size() != fam.d) throw DimensionMismatch("copula: dimension mismatch");
    for (Eigen::Index j = 0; j < u.size(); ++j)
        if (!(u[j] >= 0.0 && u[j] <= 1.0))
            throw OutOfRange("copula: u outside [0,1]^d");
}

}  // namespace

bool Theta::feasible(double slack) const {
    if (values.size() == 0) return false;
    for (Eigen::Index i = 0; i < values.size(); ++i)
        if (!(values[i] >= -slack) || !std::isfinite(values[i])) return false;
    return values.sum() <= 1.0 + slack;
}

BasisFamily make_basis_family(std::vector<PickandsModel> basis) {
    if (basis.size() < 2) throw DomainError("make_basis_family: p >= 2 required");
    const int d = basis.front().d;
    for (const auto& m : basis)
        if (m.d != d) throw DimensionMismatch("make_basis_family: mixed dimensions");
    if (d != 2) throw UnsupportedModel("make_basis_family: only d=2 implemented");
    const int grid = 21;
    for (std::size_t i = 0; i < basis.size(); ++i)
        for (std::size_t j = i + 1; j < basis.size(); ++j) {
            double diff = 0.0;
            for (int k = 0; k <= grid; ++k) {
                const double t = static_cast<double>(k) / grid;
                diff = std::max(diff, std::abs(pickands_eval_t(basis[i], t) -
                                               pickands_eval_t(basis[j], t)));
            }
            if (diff <= 1e-12)
                throw DomainError("make_basis_family: basis elements coincide");
        }
    return {std::move(basis), d};
}

double family_A_t(const BasisFamily& fam, const Theta& theta, double t, bool strict) {
    check_theta(fam, theta, strict);
    const double ap = pickands_eval_t(fam.basis.back(), t);
    double acc = (1.0 - theta.values.sum()) * ap;
    for (int i = 0; i + 1 < fam.p(); ++i)
        acc += theta.values[i] * pickands_eval_t(fam.basis[i], t);
    return acc;
}

double family_A(const BasisFamily& fam, const Theta& theta, const SimplexPoint& w,
                bool strict) {
    if (w.d() != fam.d) throw DimensionMismatch("family_A: dimension mismatch");
    return family_A_t(fam, theta, w.t(), strict);
}

Eigen::VectorXd family_h_t(const BasisFamily& fam, double t) {
    const double ap = pickands_eval_t(fam.basis.back(), t);
    Eigen::VectorXd h(fam.p() - 1);
    for (int i = 0; i + 1 < fam.p(); ++i)
        h[i] = pickands_eval_t(fam.basis[i], t) - ap;
    return h;
}

Eigen::VectorXd family_h(const BasisFamily& fam, const SimplexPoint& w) {
    if (w.d() != fam.d) throw DimensionMismatch("family_h: dimension mismatch");
    return family_h_t(fam, w.t());
}

double copula_eval(const BasisFamily& fam, const Theta& theta,
                   const Eigen::VectorXd& u) {
    check_u(fam, u);
    check_theta(fam, theta, false);
    double r = 0.0;
    for (Eigen::Index j = 0; j < u.size(); ++j) {
        if (u[j] == 0.0) return 0.0;
        r -= std::log(u[j]);
    }
    if (r == 0.0) return 1.0;
    const double t = -std::log(u[0]) / r;
    return std::exp(-r * family_A_t(fam, theta, t));
}

Eigen::VectorXd copula_gradient(const BasisFamily& fam, const Theta& theta,
                                const Eigen::VectorXd& u) {
    check_u(fam, u);
    check_theta(fam, theta, false);
    const int q = fam.p() - 1;
    double r = 0.0;
    for (Eigen::Index j = 0; j < u.size(); ++j) {
        if (u[j] == 0.0) return Eigen::VectorXd::Zero(q);
        r -= std::log(u[j]);
    }
    if (r == 0.0) return Eigen::VectorXd::Zero(q);
    const double t = -std::log(u[0]) / r;
    const double c = std::exp(-r * family_A_t(fam, theta, t));
    return (-r * c) * family_h_t(fam, t);
}

}  // namespace evc
