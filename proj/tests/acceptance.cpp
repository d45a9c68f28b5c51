// Acceptance gate: every release-blocking property on one pass/fail line.
// Exit code is the number of failed checks.

#include <sys/wait.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "evc/common.hpp"
#include "evc/csv.hpp"
#include "evc/estimators.hpp"
#include "evc/family.hpp"
#include "evc/grid.hpp"
#include "evc/quadrature.hpp"
#include "evc/rng.hpp"
#include "evc/sampler.hpp"
#include "evc/stats.hpp"
#include "evc/study.hpp"
#include "evc/trig.hpp"

using namespace evc;
namespace fs = std::filesystem;

namespace {

int g_fails = 0;

void check(const std::string& name, bool ok, const std::string& detail) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name;
    if (!detail.empty()) std::cout << "  (" << detail << ")";
    std::cout << std::endl;
    if (!ok) ++g_fails;
}

std::string num(double x) {
    std::ostringstream ss;
    ss.precision(4);
    ss << x;
    return ss.str();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "<missing:" + path + ">";
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

constexpr std::uint64_t kMasterSeed = 20240817;

// ---- closed-form oracles ----------------------------------------------------

void oracle_checks() {
    const auto basis = trig_basis();
    double worst_a = 0.0;
    for (int i = 0; i < 3; ++i) {
        const auto& sd = std::get<SpectralDensity>(basis[i].impl);
        for (int k = 0; k <= 100; ++k) {
            const double z = k / 100.0;
            std::vector<double> brk = sd.breakpoints;
            if (z > 0.0 && z < 1.0) brk.push_back(1.0 - z);
            const double numeric = integrate(
                [&](double t) {
                    return std::max(t * z, (1.0 - t) * (1.0 - z)) * sd.f(t);
                },
                0.0, 1.0, 1e-10, brk);
            worst_a = std::max(worst_a, std::abs(trig_A(i + 1, z) - numeric));
        }
    }
    check("trig Pickands functions match the max-kernel integral", worst_a <= 1e-8,
          "max |A - quad| = " + num(worst_a) + ", tol 1e-8");

    const BasisFamily fam = make_basis_family(trig_basis());
    const SamplerState st = make_sampler(fam, Theta{Eigen::Vector2d(0.3, 0.2)});
    double worst_pdf = 0.0;
    for (int k = 1; k <= 9; ++k) {
        const double z = k / 10.0;
        const double hs = 1e-5;
        const double fd = (gz_cdf(st, z + hs) - gz_cdf(st, z - hs)) / (2 * hs);
        worst_pdf = std::max(worst_pdf, std::abs(gz_pdf(st, z) - fd));
    }
    check("Z density matches finite differences of G_Z", worst_pdf <= 1e-5,
          "max |pdf - fd| = " + num(worst_pdf) + ", tol 1e-5");

    const Theta th{Eigen::Vector2d(0.2, 0.3)};
    double worst_grad = 0.0;
    for (double u1 : {0.3, 0.7})
        for (double u2 : {0.3, 0.7}) {
            const Eigen::Vector2d u(u1, u2);
            const Eigen::VectorXd grad = copula_gradient(fam, th, u);
            for (int j = 0; j < 2; ++j) {
                Eigen::VectorXd tp = th.values, tm = th.values;
                const double hs = 1e-6;
                tp[j] += hs;
                tm[j] -= hs;
                const double fd = (copula_eval(fam, Theta{tp}, u) -
                                   copula_eval(fam, Theta{tm}, u)) /
                                  (2 * hs);
                worst_grad = std::max(worst_grad, std::abs(grad[j] - fd));
            }
        }
    check("copula gradient matches finite differences", worst_grad <= 1e-6,
          "max |grad - fd| = " + num(worst_grad) + ", tol 1e-6");
}

// ---- sampler distribution ---------------------------------------------------

void sampler_checks() {
    const BasisFamily fam = make_basis_family(trig_basis());
    const int n = 100000;
    const double crit = ks_critical(0.01, n);
    const std::vector<Eigen::Vector2d> thetas = {
        {0.0, 0.0}, {0.5, 0.5}, {1.0, 0.0}};

    double worst_margin = 0.0, worst_cop = 0.0, worst_z = 0.0;
    for (std::size_t k = 0; k < thetas.size(); ++k) {
        const Theta th{thetas[k]};
        const std::uint64_t seed = derive_key(kMasterSeed, 30 + k);
        const Eigen::MatrixXd x = sample_n(fam, th, n, seed);
        auto unif = [](double v) { return v; };
        worst_margin = std::max(worst_margin, ks_statistic(x.col(0), unif));
        worst_margin = std::max(worst_margin, ks_statistic(x.col(1), unif));

        for (double u1 : {0.2, 0.4, 0.6, 0.8})
            for (double u2 : {0.2, 0.4, 0.6, 0.8}) {
                int count = 0;
                for (int i = 0; i < n; ++i)
                    if (x(i, 0) <= u1 && x(i, 1) <= u2) ++count;
                const double emp = static_cast<double>(count) / n;
                const double mod = copula_eval(fam, th, Eigen::Vector2d(u1, u2));
                worst_cop = std::max(worst_cop, std::abs(emp - mod));
            }

        const SamplerState st = make_sampler(fam, th, seed);
        Rng rng(derive_key(seed, 424242));
        Eigen::VectorXd z(n);
        for (int i = 0; i < n; ++i) z[i] = sample_Z(st, rng);
        worst_z =
            std::max(worst_z, ks_statistic(z, [&](double v) { return gz_cdf(st, v); }));
    }
    check("sampler margins are uniform (KS, 1% level, n=1e5)", worst_margin < crit,
          "max D = " + num(worst_margin) + ", crit = " + num(crit));
    check("empirical copula matches the model on the 0.2 grid", worst_cop <= 0.01,
          "max |C_n - C| = " + num(worst_cop) + ", tol 0.01");
    check("Z draws follow G_Z (KS, 1% level, n=1e5)", worst_z < crit,
          "max D = " + num(worst_z) + ", crit = " + num(crit));
}

// ---- exact structure --------------------------------------------------------

void structure_checks() {
    const BasisFamily fam = make_basis_family(trig_basis());
    const GridMeasure m = uniform_grid_2d(19);

    double worst_idem = 0.0;
    for (auto th0 : {Eigen::Vector2d(0.1, 0.1), Eigen::Vector2d(0.05, 0.9),
                     Eigen::Vector2d(0.8, 0.1), Eigen::Vector2d(0.0, 0.0),
                     Eigen::Vector2d(0.2, 0.5)}) {
        Eigen::VectorXd a(m.size());
        for (int l = 0; l < m.size(); ++l)
            a[l] = family_A(fam, Theta{th0}, m.points[l]) -
                   pickands_eval(fam.basis.back(), m.points[l]);
        const ProjectionFit fit = project_theta(a, fam, m);
        worst_idem =
            std::max(worst_idem, (fit.theta_hat.values - th0).cwiseAbs().maxCoeff());
    }
    check("projection is idempotent on the family", worst_idem <= 1e-10,
          "max |theta - theta0| = " + num(worst_idem) + ", tol 1e-10");

    const Eigen::MatrixXd x = sample_n(fam, Theta{Eigen::Vector2d(0.2, 0.3)}, 100,
                                       derive_key(kMasterSeed, 50));
    const ExpMarginSample s =
        exp_margins(x, {Marginal::uniform01(), Marginal::uniform01()});
    const double v1 = std::abs(pickands_ols(s, simplex2(1.0)) - 1.0);
    const double v2 = std::abs(pickands_ols(s, simplex2(0.0)) - 1.0);
    check("OLS estimator is exact at the vertices", std::max(v1, v2) <= 1e-12,
          "max |A_hat(e_j) - 1| = " + num(std::max(v1, v2)) + ", tol 1e-12");

    const Theta th{Eigen::Vector2d(0.1, 0.1)};
    double worst_ms = 0.0;
    for (double k : {2.0, 3.0, 5.0})
        for (double u1 : {0.3, 0.8})
            for (double u2 : {0.45, 0.9}) {
                const Eigen::Vector2d u(u1, u2);
                const double lhs = copula_eval(
                    fam, th, Eigen::Vector2d(std::pow(u1, k), std::pow(u2, k)));
                const double rhs = std::pow(copula_eval(fam, th, u), k);
                worst_ms = std::max(worst_ms, std::abs(lhs - rhs));
            }
    check("copula is max-stable", worst_ms <= 1e-12,
          "max defect = " + num(worst_ms) + ", tol 1e-12");

    const BasisFamily bad = make_basis_family(nonidentifiable_atomic_basis());
    const GramResult gram = gram_matrix(bad, m);
    check("linearly dependent atomic family is flagged rank-deficient",
          !gram.full_rank,
          "eig_min/eig_max = " + num(gram.eig_min / gram.eig_max));
}

// ---- Monte Carlo study ------------------------------------------------------

const CellResult* find_cell(const StudyResult& res, int ti, int n) {
    for (const auto& c : res.cells)
        if (c.theta_index == ti && c.n == n) return &c;
    return nullptr;
}

void study_checks(const StudyResult& res, double wall_seconds) {
    check("study runtime within budget", wall_seconds < 900.0,
          num(wall_seconds) + " s, budget 900 s");

    struct Expect {
        int ti;
        int n;
        double r;
        double tol;
    };
    const std::vector<Expect> table = {
        {1, 25, 0.375, 0.05}, {1, 50, 0.444, 0.05},  {1, 100, 0.512, 0.05},
        {1, 200, 0.613, 0.05}, {2, 25, 0.504, 0.06}, {2, 100, 0.636, 0.06},
        {3, 25, 0.480, 0.06},  {3, 100, 0.696, 0.06}};
    for (const auto& e : table) {
        const CellResult* c = find_cell(res, e.ti, e.n);
        if (!c) {
            check("table cell theta" + std::to_string(e.ti) + " n=" +
                      std::to_string(e.n),
                  false, "cell missing");
            continue;
        }
        const double r = c->imse_par_ols / c->imse_ols;
        check("IMSE ratio theta" + std::to_string(e.ti) + " n=" + std::to_string(e.n),
              std::abs(r - e.r) <= e.tol,
              "r = " + num(r) + ", expected " + num(e.r) + " +/- " + num(e.tol));
    }

    const double plateau[3] = {0.903, 0.868, 0.900};
    bool plateau_ok = true;
    std::string plateau_detail;
    for (int ti = 1; ti <= 3; ++ti) {
        const CellResult* c = find_cell(res, ti, 3200);
        const double r = c ? c->imse_par_ols / c->imse_ols : -1.0;
        plateau_ok = plateau_ok && c && std::abs(r - plateau[ti - 1]) <= 0.07;
        plateau_detail += (ti > 1 ? ", " : "") + num(r);
    }
    check("IMSE ratio plateau at n=3200", plateau_ok,
          "r = " + plateau_detail + ", expected {0.903, 0.868, 0.900} +/- 0.07");

    const CellResult* gap = find_cell(res, 1, 50);
    const double gratio = gap ? gap->imse_np / gap->imse_ols : 0.0;
    check("endpoint correction dominates the plain estimator", gratio > 10.0,
          "IMSE_np / IMSE_ols = " + num(gratio) + " at n=50, need > 10");

    // secondary invariants
    bool trend_ok = true;
    std::string trend_detail;
    for (int ti = 1; ti <= 3; ++ti) {
        double acc = 0.0;
        for (int n : {400, 800, 1600}) {
            const CellResult* a = find_cell(res, ti, n);
            const CellResult* b = find_cell(res, ti, 2 * n);
            acc += (a && b) ? a->imse_ols / b->imse_ols : 0.0;
        }
        acc /= 3.0;
        trend_ok = trend_ok && acc >= 1.5 && acc <= 2.6;
        trend_detail += (ti > 1 ? ", " : "") + num(acc);
    }
    check("raw OLS IMSE halves with n (rate check)", trend_ok,
          "mean doubling ratios = " + trend_detail + ", band [1.5, 2.6]");

    bool stab_ok = true;
    std::string stab_detail;
    for (int ti = 1; ti <= 3; ++ti)
        for (int n : {1600, 3200}) {
            const CellResult* c = find_cell(res, ti, n);
            const double r = c ? c->imse_par_ols / c->imse_ols : -1.0;
            stab_ok = stab_ok && c && std::abs(r - plateau[ti - 1]) <= 0.06;
            stab_detail += (stab_detail.empty() ? "" : ", ") + num(r);
        }
    check("IMSE ratio has stabilized by n=1600", stab_ok,
          "r(1600), r(3200) = " + stab_detail + ", plateau +/- 0.06");
}

// ---- Asymptotic covariance --------------------------------------------------

void covariance_checks() {
    const BasisFamily fam = make_basis_family(trig_basis());
    const GridMeasure m = uniform_grid_2d(19);
    const Eigen::Vector2d theta0(0.1, 0.1);
    const int n = 3200, reps = 1000;
    const double truth = family_A(fam, Theta{theta0}, simplex2(0.5));

    Eigen::MatrixXd hg(m.size(), 2);
    Eigen::VectorXd ap(m.size());
    for (int l = 0; l < m.size(); ++l) {
        hg.row(l) = family_h(fam, m.points[l]).transpose();
        ap[l] = pickands_eval(fam.basis.back(), m.points[l]);
    }
    const GramResult gram = gram_matrix(fam, m);
    const Eigen::MatrixXd proj =
        gram.s.ldlt().solve(Eigen::MatrixXd(hg.transpose() * m.weights.asDiagonal()));

    const std::uint64_t cov_seed = derive_key(kMasterSeed, 1000003);
    Eigen::MatrixXd thetas(reps, 2);
    Eigen::MatrixXd vrows(reps, 3);  // v00, v01, v11 per replicate
    std::vector<char> covered(reps, 0);

    std::atomic<int> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    auto worker = [&]() {
        try {
            for (;;) {
                const int r = next.fetch_add(1);
                if (r >= reps) return;
                const Eigen::MatrixXd x =
                    sample_n(fam, Theta{theta0}, n, derive_key(cov_seed, r));
                const ExpMarginSample s =
                    exp_margins(x, {Marginal::uniform01(), Marginal::uniform01()});
                const Eigen::VectorXd aols = pickands_ols_grid(s, m.points);
                ProjectionFit fit;
                fit.theta_hat = Theta{proj * (aols - ap)};
                fit.gram = gram;
                fit.kind = EstimatorKind::Ols;
                fit.v_hat = asym_cov(s, fam, m, EstimatorKind::Ols, aols);
                thetas.row(r) = fit.theta_hat.values.transpose();
                vrows(r, 0) = (*fit.v_hat)(0, 0);
                vrows(r, 1) = (*fit.v_hat)(0, 1);
                vrows(r, 2) = (*fit.v_hat)(1, 1);
                const Interval ci = ci_for_A(fit, fam, simplex2(0.5), 0.95, n);
                covered[r] = (truth >= ci.lo && truth <= ci.hi) ? 1 : 0;
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(err_mutex);
            if (!first_error) first_error = std::current_exception();
            next.store(reps);
        }
    };
    const unsigned hc = std::thread::hardware_concurrency();
    const int nthreads = hc > 0 ? static_cast<int>(hc) : 4;
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);

    const Eigen::MatrixXd mc = sample_cov(thetas) * n;
    Eigen::Matrix2d vbar;
    vbar(0, 0) = vrows.col(0).mean();
    vbar(0, 1) = vbar(1, 0) = vrows.col(1).mean();
    vbar(1, 1) = vrows.col(2).mean();

    double worst_rel = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            worst_rel = std::max(
                worst_rel, std::abs(vbar(i, j) - mc(i, j)) / std::abs(mc(i, j)));
    check("plug-in covariance matches the Monte Carlo law of sqrt(n) theta_hat",
          worst_rel <= 0.20,
          "max entrywise rel diff = " + num(worst_rel) + ", tol 0.20");

    double cov = 0.0;
    for (int r = 0; r < reps; ++r) cov += covered[r];
    cov /= reps;
    check("pointwise 95% interval for A(1/2) covers at nominal rate",
          cov >= 0.92 && cov <= 0.97,
          "coverage = " + num(cov) + ", band [0.92, 0.97]");
}

// ---- determinism ------------------------------------------------------------

void determinism_checks() {
    const fs::path base = fs::path("acceptance_determinism");
    fs::remove_all(base);
    fs::create_directories(base);

    StudyConfig cfg;
    cfg.thetas = {Eigen::Vector2d(0.1, 0.1)};
    cfg.sample_sizes = {25, 50};
    cfg.replicates = 30;
    cfg.grid_points = 19;
    cfg.display_points = 21;
    cfg.master_seed = 777;

    const std::string dir1 = (base / "p1").string(), dir8 = (base / "p8").string();
    const char* bin = std::getenv("EVC_BIN");
    bool ran_cli = false;
    if (bin && *bin) {
        const std::string cfg_path = (base / "det.cfg").string();
        {
            std::ofstream f(cfg_path);
            f << "thetas = 0.1,0.1\nsample_sizes = 25,50\nreplicates = 30\n"
              << "display_points = 21\nmaster_seed = 777\n";
        }
        const std::string quiet = " > /dev/null 2>&1";
        const int r1 = std::system((std::string(bin) + " study " + cfg_path +
                                    " --threads 1 --out " + dir1 + quiet)
                                       .c_str());
        const int r8 = std::system((std::string(bin) + " study " + cfg_path +
                                    " --threads 8 --out " + dir8 + quiet)
                                       .c_str());
        ran_cli = r1 != -1 && WEXITSTATUS(r1) == 0 && r8 != -1 && WEXITSTATUS(r8) == 0;
    }
    if (!ran_cli) {
        StudyConfig c1 = cfg;
        c1.output_dir = dir1;
        c1.parallelism = 1;
        run_study(c1);
        StudyConfig c8 = cfg;
        c8.output_dir = dir8;
        c8.parallelism = 8;
        run_study(c8);
    }

    bool same = true;
    std::string diff;
    for (const char* f :
         {"imse.csv", "ratio.csv", "ratio_w.csv", "quartiles.csv", "cell_t1_n25.csv",
          "cell_t1_n50.csv", "theta_t1_n25.csv", "theta_t1_n50.csv"}) {
        if (slurp(dir1 + "/" + f) != slurp(dir8 + "/" + f)) {
            same = false;
            diff = f;
        }
    }
    check("study output is byte-identical across thread counts", same,
          same ? std::string(ran_cli ? "via cli" : "in process")
               : "first difference in " + diff);
    fs::remove_all(base);
}

}  // namespace

int main() {
    std::cout << "acceptance checks\n=================\n";
    const auto t0 = std::chrono::steady_clock::now();

    oracle_checks();
    sampler_checks();
    structure_checks();

    StudyConfig cfg = desk_default();
    // 6400 feeds no check below; everything reads cells at n <= 3200
    cfg.sample_sizes = {25, 50, 100, 200, 400, 800, 1600, 3200};
    cfg.output_dir = "acceptance_study";
    const auto s0 = std::chrono::steady_clock::now();
    const StudyResult res = run_study(cfg, &std::cout);
    const double study_wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - s0).count();
    study_checks(res, study_wall);

    covariance_checks();
    determinism_checks();

    const double total =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "=================\n"
              << (g_fails == 0 ? "all checks passed" : "FAILURES: " +
                                                           std::to_string(g_fails))
              << " (" << static_cast<int>(total) << " s)\n";
    return g_fails;
}
