#include "evc/pickands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "evc/common.hpp"
#include "evc/quadrature.hpp"

namespace evc {
namespace {

double fd_step() {
    static const double s = std::cbrt(std::numeric_limits<double>::epsilon());
    return s;
}

double eval_density_A(const SpectralDensity& sd, double z) {
    if (sd.g && sd.h) return z - sd.g(1.0 - z) + (1.0 - z) * sd.h(1.0 - z);
    // max(tz, (1-t)(1-z)) switches branch at t = 1-z.
    std::vector<double> cuts = sd.breakpoints;
    cuts.push_back(1.0 - z);
    auto kernel = [&](double t) {
        return std::max(t * z, (1.0 - t) * (1.0 - z)) * sd.f(t);
    };
    return integrate(kernel, 0.0, 1.0, tol().quad_abs, cuts);
}

double eval_atoms_A(const Atoms& at, double t) {
    double s = 0.0;
    for (const auto& [loc, mass] : at.atoms)
        s += mass * std::max(loc * t, (1.0 - loc) * (1.0 - t));
    return s;
}

}  // namespace

double pickands_eval_t(const PickandsModel& model, double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw OutOfRange("pickands_eval: t outside [0,1]");
    if (std::holds_alternative<ClosedForm>(model.impl))
        return std::get<ClosedForm>(model.impl).A(t);
    if (std::holds_alternative<SpectralDensity>(model.impl))
        return eval_density_A(std::get<SpectralDensity>(model.impl), t);
    return eval_atoms_A(std::get<Atoms>(model.impl), t);
}

double pickands_eval(const PickandsModel& model, const SimplexPoint& w) {
    if (w.d() != model.d) throw DimensionMismatch("pickands_eval: dimension mismatch");
    if (model.d != 2) throw UnsupportedModel("pickands_eval: only d=2 models implemented");
    return pickands_eval_t(model, w.t());
}

double pickands_deriv(const PickandsModel& model, double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw OutOfRange("pickands_deriv: t outside [0,1]");
    if (std::holds_alternative<SpectralDensity>(model.impl)) {
        const auto& sd = std::get<SpectralDensity>(model.impl);
        if (sd.g && sd.h) return 1.0 - sd.h(1.0 - t);
        auto f = sd.f;
        return 1.0 - integrate(f, 0.0, 1.0 - t, tol().quad_abs, sd.breakpoints);
    }
    if (std::holds_alternative<Atoms>(model.impl)) {
        const auto& at = std::get<Atoms>(model.impl);
        double s = 0.0;
        for (const auto& [loc, mass] : at.atoms)
            s += mass * (loc * t > (1.0 - loc) * (1.0 - t) ? loc : -(1.0 - loc));
        return s;
    }
    const auto& cf = std::get<ClosedForm>(model.impl);
    if (cf.dA) return cf.dA(t);
    const double s = fd_step();
    const double lo = std::max(0.0, t - s), hi = std::min(1.0, t + s);
    return (cf.A(hi) - cf.A(lo)) / (hi - lo);
}

double pickands_second(const PickandsModel& model, double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw OutOfRange("pickands_second: t outside [0,1]");
    if (std::holds_alternative<SpectralDensity>(model.impl)) {
        const auto& sd = std::get<SpectralDensity>(model.impl);
        return sd.f(1.0 - t);
    }
    if (std::holds_alternative<Atoms>(model.impl)) return 0.0;  // a.e.
    const auto& cf = std::get<ClosedForm>(model.impl);
    if (cf.d2A) return cf.d2A(t);
    const double s = std::sqrt(fd_step());
    if (t - s < 0.0 || t + s > 1.0)
        throw OutOfRange("pickands_second: finite difference needs interior t");
    return (cf.A(t + s) - 2.0 * cf.A(t) + cf.A(t - s)) / (s * s);
}

double tail_dep_l(const PickandsModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.d) throw DimensionMismatch("tail_dep_l: dimension mismatch");
    for (Eigen::Index j = 0; j < x.size(); ++j)
        if (!(x[j] >= 0.0)) throw DomainError("tail_dep_l: negative input");
    const double r = x.sum();
    if (r == 0.0) return 0.0;
    return r * pickands_eval(model, make_simplex_point(x));
}

ValidationReport validate_pickands(const PickandsModel& model, int grid_size) {
    if (grid_size < 3) throw DomainError("validate_pickands: grid_size >= 3 required");
    ValidationReport rep;
    rep.vertex_violation = std::max(std::abs(pickands_eval_t(model, 0.0) - 1.0),
                                    std::abs(pickands_eval_t(model, 1.0) - 1.0));
    std::vector<double> av(grid_size);
    for (int i = 0; i < grid_size; ++i) {
        const double t = static_cast<double>(i) / (grid_size - 1);
        av[i] = pickands_eval_t(model, t);
        const double lower = std::max(t, 1.0 - t);
        rep.bounds_violation = std::max({rep.bounds_violation, lower - av[i], av[i] - 1.0});
    }
    for (int i = 1; i + 1 < grid_size; ++i)
        rep.convexity_violation =
            std::max(rep.convexity_violation, av[i] - 0.5 * (av[i - 1] + av[i + 1]));
    if (std::holds_alternative<SpectralDensity>(model.impl)) {
        const auto& sd = std::get<SpectralDensity>(model.impl);
        const double m1 = integrate([&](double t) { return t * sd.f(t); }, 0.0, 1.0,
                                    tol().quad_abs, sd.breakpoints);
        const double m2 = integrate([&](double t) { return (1.0 - t) * sd.f(t); }, 0.0,
                                    1.0, tol().quad_abs, sd.breakpoints);
        rep.moment_violation = std::max(std::abs(m1 - 1.0), std::abs(m2 - 1.0));
    }
    return rep;
}

}  // namespace evc
