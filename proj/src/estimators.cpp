#include "evc/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "evc/common.hpp"
#include "evc/stats.hpp"

namespace evc {
namespace {

Eigen::VectorXd rank_column(const Eigen::VectorXd& x) {
    const int n = static_cast<int>(x.size());
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return x[a] < x[b]; });
    Eigen::VectorXd rank(n);
    int i = 0;
    while (i < n) {
        int j = i;
        while (j < n && x[idx[j]] == x[idx[i]]) ++j;
        const double avg = 0.5 * (i + j - 1) + 1.0;  // mean of 1-based positions
        for (int k = i; k < j; ++k) rank[idx[k]] = avg;
        i = j;
    }
    if (x[idx[0]] == x[idx[n - 1]])
        throw DegenerateColumn("exp_margins: constant column, ranks undefined");
    return rank;
}

// -log xi_i(w_l) - gamma for every sample row and grid point.
Eigen::MatrixXd log_xi_matrix(const ExpMarginSample& sample,
                              const std::vector<SimplexPoint>& points) {
    const int n = sample.n(), npts = static_cast<int>(points.size());
    Eigen::MatrixXd out(n, npts);
    for (int l = 0; l < npts; ++l) {
        const Eigen::VectorXd v = xi(sample, points[l]);
        for (int i = 0; i < n; ++i) {
            if (v[i] <= 0.0) throw ZeroXi("estimator: xi = 0, degenerate observation");
            out(i, l) = -std::log(v[i]) - kEulerGamma;
        }
    }
    return out;
}

Eigen::MatrixXd endpoint_matrix(const ExpMarginSample& sample) {
    Eigen::MatrixXd e(sample.n(), sample.d());
    for (int i = 0; i < sample.n(); ++i)
        for (int j = 0; j < sample.d(); ++j) {
            if (sample.y(i, j) <= 0.0)
                throw ZeroXi("estimator: Y = 0 at an endpoint, degenerate observation");
            e(i, j) = -std::log(sample.y(i, j)) - kEulerGamma;
        }
    return e;
}

Eigen::MatrixXd design_H(const BasisFamily& fam, const GridMeasure& m) {
    Eigen::MatrixXd h(m.size(), fam.p() - 1);
    for (int l = 0; l < m.size(); ++l) h.row(l) = family_h(fam, m.points[l]).transpose();
    return h;
}

double quad_form(const Eigen::MatrixXd& s, const Eigen::VectorXd& d) {
    return d.dot(s * d);
}

}  // namespace

ExpMarginSample exp_margins(const Eigen::MatrixXd& data,
                            const std::vector<Marginal>& marginals) {
    const int n = static_cast<int>(data.rows()), d = static_cast<int>(data.cols());
    if (n < 2) throw DomainError("exp_margins: n >= 2 required");
    if (static_cast<int>(marginals.size()) != d)
        throw DimensionMismatch("exp_margins: one marginal per column required");
    if (!data.allFinite()) throw DomainError("exp_margins: non-finite input");
    Eigen::MatrixXd y(n, d);
    for (int j = 0; j < d; ++j) {
        const Marginal& mg = marginals[j];
        if (mg.kind == Marginal::Ranks) {
            const Eigen::VectorXd rank = rank_column(data.col(j));
            for (int i = 0; i < n; ++i) y(i, j) = -std::log(rank[i] / (n + 1));
            continue;
        }
        for (int i = 0; i < n; ++i) {
            const double x = data(i, j);
            double f = 0.0;
            switch (mg.kind) {
                case Marginal::Uniform01: f = x; break;
                case Marginal::Exponential1: f = -std::expm1(-x); break;
                case Marginal::Custom: f = mg.cdf(x); break;
                default: break;
            }
            if (!(f > 0.0 && f <= 1.0))
                throw DomainError("exp_margins: marginal cdf value outside (0,1]");
            y(i, j) = -std::log(f);
        }
    }
    return {y};
}

Eigen::VectorXd xi(const ExpMarginSample& sample, const SimplexPoint& w) {
    if (w.d() != sample.d()) throw DimensionMismatch("xi: dimension mismatch");
    Eigen::VectorXd out(sample.n());
    for (int i = 0; i < sample.n(); ++i) {
        double m = std::numeric_limits<double>::infinity();
        for (int j = 0; j < sample.d(); ++j)
            if (w[j] > 0.0) m = std::min(m, sample.y(i, j) / w[j]);
        if (!std::isfinite(m)) throw DomainError("xi: no positive weight");
        out[i] = m;
    }
    return out;
}

Eigen::VectorXd pickands_np_grid(const ExpMarginSample& sample,
                                 const std::vector<SimplexPoint>& points,
                                 int* dropped) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(points.size()));
    for (std::size_t l = 0; l < points.size(); ++l) {
        const Eigen::VectorXd v = xi(sample, points[l]);
        double acc = 0.0;
        int kept = 0;
        for (int i = 0; i < sample.n(); ++i) {
            if (v[i] > 0.0) {
                acc += std::log(v[i]);
                ++kept;
            } else if (dropped) {
                ++*dropped;
            }
        }
        if (kept == 0) throw ZeroXi("pickands_np: all xi vanish");
        out[l] = std::exp(-acc / kept - kEulerGamma);
    }
    return out;
}

double pickands_np(const ExpMarginSample& sample, const SimplexPoint& w, int* dropped) {
    return pickands_np_grid(sample, {w}, dropped)[0];
}

Eigen::VectorXd pickands_ols_grid(const ExpMarginSample& sample,
                                  const std::vector<SimplexPoint>& points) {
    const int n = sample.n(), d = sample.d();
    if (n <= d + 1) throw SingularDesign("pickands_ols: n > d+1 required");
    Eigen::MatrixXd x(n, d + 1);
    x.col(0).setOnes();
    x.rightCols(d) = endpoint_matrix(sample);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < d + 1)
        throw SingularDesign("pickands_ols: collinear endpoint covariates");
    const Eigen::MatrixXd beta = qr.solve(log_xi_matrix(sample, points));
    return beta.row(0).array().exp();
}

double pickands_ols(const ExpMarginSample& sample, const SimplexPoint& w) {
    return pickands_ols_grid(sample, {w})[0];
}

GramResult gram_matrix(const BasisFamily& fam, const GridMeasure& m) {
    const Eigen::MatrixXd h = design_H(fam, m);
    Eigen::MatrixXd s = h.transpose() * m.weights.asDiagonal() * h;
    s = 0.5 * (s + s.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
    GramResult out;
    out.s = s;
    out.eig_min = eig.eigenvalues().minCoeff();
    out.eig_max = eig.eigenvalues().maxCoeff();
    out.full_rank = out.eig_max > 0.0 && out.eig_min > tol().rank_rel * out.eig_max;
    return out;
}

ProjectionFit project_theta(const Eigen::VectorXd& a_hat, const BasisFamily& fam,
                            const GridMeasure& m) {
    if (a_hat.size() != m.size())
        throw DimensionMismatch("project_theta: one value per grid point required");
    GramResult gram = gram_matrix(fam, m);
    if (!gram.full_rank)
        throw RankDeficient("project_theta: Gram matrix rank-deficient, basis not identifiable");
    const Eigen::MatrixXd h = design_H(fam, m);
    const Eigen::VectorXd r = h.transpose() * m.weights.cwiseProduct(a_hat);
    ProjectionFit fit;
    fit.theta_hat = Theta{gram.s.ldlt().solve(r)};
    fit.gram = std::move(gram);
    fit.rhs = r;
    return fit;
}

ProjectionFit constrain_theta(const ProjectionFit& fit) {
    if (!fit.gram.full_rank) throw RankDeficient("constrain_theta: S rank-deficient");
    const Eigen::VectorXd& t = fit.theta_hat.values;
    const Eigen::MatrixXd& s = fit.gram.s;
    const int q = static_cast<int>(t.size());
    ProjectionFit out = fit;
    out.constrained = true;
    if (fit.theta_hat.feasible()) return out;

    const Eigen::VectorXd st = s * t;
    double best_obj = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best = Eigen::VectorXd::Zero(q);
    for (int mask = 0; mask < (1 << q); ++mask) {
        std::vector<int> free;
        for (int i = 0; i < q; ++i)
            if (!(mask & (1 << i))) free.push_back(i);
        const int f = static_cast<int>(free.size());
        for (int sum_active = 0; sum_active <= 1; ++sum_active) {
            if (sum_active && f == 0) continue;
            Eigen::VectorXd cand = Eigen::VectorXd::Zero(q);
            if (f > 0) {
                const int dim = f + sum_active;
                Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(dim, dim);
                Eigen::VectorXd rhs(dim);
                for (int a = 0; a < f; ++a) {
                    for (int b = 0; b < f; ++b) kkt(a, b) = s(free[a], free[b]);
                    rhs[a] = st[free[a]];
                }
                if (sum_active) {
                    kkt.col(f).head(f).setOnes();
                    kkt.row(f).head(f).setOnes();
                    rhs[f] = 1.0;
                }
                Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
                if (!lu.isInvertible()) continue;
                const Eigen::VectorXd sol = lu.solve(rhs);
                for (int a = 0; a < f; ++a) cand[free[a]] = sol[a];
            }
            bool ok = true;
            for (int a = 0; a < f; ++a)
                if (cand[free[a]] < -1e-10) ok = false;
            if (!sum_active && cand.sum() > 1.0 + 1e-10) ok = false;
            if (!ok) continue;
            const double obj = quad_form(s, Eigen::VectorXd(cand - t));
            if (obj < best_obj) {
                best_obj = obj;
                best = cand;
            }
        }
    }
    best = best.cwiseMax(0.0);
    if (best.sum() > 1.0) best /= best.sum();
    out.theta_hat = Theta{best};
    return out;
}

ProjectionFit constrain_theta_box(const ProjectionFit& fit) {
    if (!fit.gram.full_rank) throw RankDeficient("constrain_theta_box: S rank-deficient");
    const Eigen::VectorXd& t = fit.theta_hat.values;
    const Eigen::MatrixXd& s = fit.gram.s;
    const int q = static_cast<int>(t.size());
    ProjectionFit out = fit;
    out.constrained = true;
    if (t.minCoeff() >= 0.0 && t.maxCoeff() <= 1.0) return out;

    const Eigen::VectorXd st = s * t;
    int combos = 1;
    for (int i = 0; i < q; ++i) combos *= 3;
    double best_obj = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best = Eigen::VectorXd::Zero(q);
    for (int code = 0; code < combos; ++code) {
        // per-coordinate state: 0 free, 1 at lower bound 0, 2 at upper bound 1
        std::vector<int> free;
        Eigen::VectorXd cand = Eigen::VectorXd::Zero(q);
        int c = code;
        for (int i = 0; i < q; ++i, c /= 3) {
            const int state = c % 3;
            if (state == 0)
                free.push_back(i);
            else
                cand[i] = state == 2 ? 1.0 : 0.0;
        }
        const int f = static_cast<int>(free.size());
        if (f > 0) {
            Eigen::MatrixXd sff(f, f);
            Eigen::VectorXd rhs(f);
            for (int a = 0; a < f; ++a) {
                for (int b = 0; b < f; ++b) sff(a, b) = s(free[a], free[b]);
                double adj = st[free[a]];
                for (int i = 0; i < q; ++i)
                    if (cand[i] != 0.0) adj -= s(free[a], i) * cand[i];
                rhs[a] = adj;
            }
            const Eigen::VectorXd sol = sff.ldlt().solve(rhs);
            bool ok = true;
            for (int a = 0; a < f; ++a) {
                if (sol[a] < -1e-12 || sol[a] > 1.0 + 1e-12) ok = false;
                cand[free[a]] = sol[a];
            }
            if (!ok) continue;
        }
        const double obj = quad_form(s, Eigen::VectorXd(cand - t));
        if (obj < best_obj) {
            best_obj = obj;
            best = cand;
        }
    }
    out.theta_hat = Theta{best.cwiseMax(0.0).cwiseMin(1.0)};
    return out;
}

ProjectionFit fit_parametric_A(const ExpMarginSample& sample, const BasisFamily& fam,
                               const GridMeasure& m, EstimatorKind kind,
                               bool constrained) {
    const Eigen::VectorXd a = kind == EstimatorKind::Plain
                                  ? pickands_np_grid(sample, m.points)
                                  : pickands_ols_grid(sample, m.points);
    Eigen::VectorXd a_hat(m.size());
    for (int l = 0; l < m.size(); ++l)
        a_hat[l] = a[l] - pickands_eval(fam.basis.back(), m.points[l]);
    ProjectionFit fit = project_theta(a_hat, fam, m);
    fit.kind = kind;
    if (constrained) fit = constrain_theta(fit);
    return fit;
}

Eigen::MatrixXd asym_cov(const ExpMarginSample& sample, const BasisFamily& fam,
                         const GridMeasure& m, EstimatorKind kind,
                         const Eigen::VectorXd& a_values) {
    const int npts = m.size(), d = sample.d();
    if (a_values.size() != npts)
        throw DimensionMismatch("asym_cov: one A value per grid point required");
    const GramResult gram = gram_matrix(fam, m);
    if (!gram.full_rank) throw RankDeficient("asym_cov: S rank-deficient");

    const Eigen::MatrixXd lx = log_xi_matrix(sample, m.points);
    Eigen::MatrixXd sigma(npts, npts);
    if (kind == EstimatorKind::Plain) {
        sigma = sample_cov(lx);
    } else {
        Eigen::MatrixXd t(sample.n(), npts + d);
        t.leftCols(npts) = lx;
        t.rightCols(d) = endpoint_matrix(sample);
        const Eigen::MatrixXd cfull = sample_cov(t);
        const Eigen::MatrixXd cgrid = cfull.topLeftCorner(npts, npts);
        const Eigen::MatrixXd k = cfull.topRightCorner(npts, d);
        const Eigen::MatrixXd end = cfull.bottomRightCorner(d, d);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(end);
        if (eig.eigenvalues().minCoeff() <= 1e-12 * eig.eigenvalues().maxCoeff())
            throw SingularEndpointCovariance("asym_cov: endpoint covariance singular");
        sigma = cgrid - k * end.ldlt().solve(k.transpose());
    }
    sigma = (a_values * a_values.transpose()).cwiseProduct(sigma).eval();

    const Eigen::MatrixXd h = design_H(fam, m);
    const Eigen::MatrixXd omega = h.transpose() * m.weights.asDiagonal() * sigma *
                                  m.weights.asDiagonal() * h;
    const auto ldlt = gram.s.ldlt();
    Eigen::MatrixXd v = ldlt.solve(ldlt.solve(omega).transpose());
    return 0.5 * (v + v.transpose());
}

Interval ci_for_A(const ProjectionFit& fit, const BasisFamily& fam,
                  const SimplexPoint& w, double level, int n) {
    if (!fit.v_hat) throw MissingCovariance("ci_for_A: no plug-in covariance in fit");
    if (!(level > 0.0 && level < 1.0)) throw DomainError("ci_for_A: level outside (0,1)");
    if (n < 1) throw DomainError("ci_for_A: n >= 1 required");
    const double center = family_A(fam, fit.theta_hat, w);
    const Eigen::VectorXd h = family_h(fam, w);
    const double var = std::max(0.0, h.dot(*fit.v_hat * h));
    const double half = normal_quantile(0.5 * (1.0 + level)) * std::sqrt(var / n);
    double wmax = 0.0;
    for (int j = 0; j < w.d(); ++j) wmax = std::max(wmax, w[j]);
    auto clamp = [&](double x) { return std::min(1.0, std::max(wmax, x)); };
    return {clamp(center - half), clamp(center + half)};
}

Interval ci_for_C(const ProjectionFit& fit, const BasisFamily& fam,
                  const Eigen::VectorXd& u, double level, int n) {
    if (!fit.v_hat) throw MissingCovariance("ci_for_C: no plug-in covariance in fit");
    if (!(level > 0.0 && level < 1.0)) throw DomainError("ci_for_C: level outside (0,1)");
    if (n < 1) throw DomainError("ci_for_C: n >= 1 required");
    const double center = copula_eval(fam, fit.theta_hat, u);
    const Eigen::VectorXd g = copula_gradient(fam, fit.theta_hat, u);
    const double var = std::max(0.0, g.dot(*fit.v_hat * g));
    const double half = normal_quantile(0.5 * (1.0 + level)) * std::sqrt(var / n);
    auto clamp = [](double x) { return std::min(1.0, std::max(0.0, x)); };
    return {clamp(center - half), clamp(center + half)};
}

}  // namespace evc
