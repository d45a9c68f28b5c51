#include "evc/study.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <thread>

#include "evc/common.hpp"
#include "evc/csv.hpp"
#include "evc/rng.hpp"
#include "evc/sampler.hpp"
#include "evc/trig.hpp"

namespace fs = std::filesystem;

namespace evc {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

[[noreturn]] void bad_config(int line, const std::string& what) {
    throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

double parse_real(const std::string& s, int line) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) bad_config(line, "not a number: '" + s + "'");
    return v;
}

long parse_int(const std::string& s, int line) {
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size()) bad_config(line, "not an integer: '" + s + "'");
    return v;
}

bool parse_bool(const std::string& s, int line) {
    if (s == "true") return true;
    if (s == "false") return false;
    bad_config(line, "expected true or false, got '" + s + "'");
}

void validate_config(const StudyConfig& cfg) {
    if (cfg.thetas.empty()) throw ConfigError("config: no thetas");
    for (const auto& th : cfg.thetas) {
        if (th.size() != 2) throw ConfigError("config: theta vectors must have length 2");
        if (!Theta{th}.feasible()) throw ConfigError("config: infeasible theta");
    }
    if (cfg.sample_sizes.empty()) throw ConfigError("config: no sample sizes");
    for (int n : cfg.sample_sizes)
        if (n < 5) throw ConfigError("config: sample sizes must be >= 5");
    if (cfg.replicates < 1 || cfg.replicates_tail < 1)
        throw ConfigError("config: replicates must be >= 1");
    if (cfg.grid_points < 2 || cfg.display_points < 2)
        throw ConfigError("config: grids need at least 2 points");
    if (cfg.parallelism < 0) throw ConfigError("config: parallelism must be >= 0");
    if (cfg.output_dir.empty()) throw ConfigError("config: output_dir empty");
    if (!(cfg.use_np || cfg.use_ols || cfg.use_par || cfg.use_par_ols))
        throw ConfigError("config: no estimators selected");
}

int resolve_threads(int parallelism, int reps) {
    int t = parallelism > 0 ? parallelism
                            : static_cast<int>(std::thread::hardware_concurrency());
    if (t < 1) t = 1;
    return std::min(t, reps);
}

double quantile_sorted(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double pos = p * (static_cast<double>(v.size()) - 1.0);
    const auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= v.size()) return v.back();
    const double frac = pos - static_cast<double>(lo);
    return v[lo] + frac * (v[lo + 1] - v[lo]);
}

std::string cell_path(const StudyConfig& cfg, int ti, int n) {
    return cfg.output_dir + "/cell_t" + std::to_string(ti) + "_n" + std::to_string(n) +
           ".csv";
}

std::string theta_path(const StudyConfig& cfg, int ti, int n) {
    return cfg.output_dir + "/theta_t" + std::to_string(ti) + "_n" + std::to_string(n) +
           ".csv";
}

bool display_enabled(const StudyConfig& cfg) { return cfg.use_ols && cfg.use_par_ols; }

Eigen::VectorXd mse_columns(const Eigen::MatrixXd& est, const Eigen::VectorXd& truth) {
    Eigen::VectorXd out(est.cols());
    for (Eigen::Index l = 0; l < est.cols(); ++l)
        out[l] = (est.col(l).array() - truth[l]).square().mean();
    return out;
}

void write_cell_file(const StudyConfig& cfg, const CellResult& cell) {
    CsvWriter w(cell_path(cfg, cell.theta_index, cell.n), {"key", "point", "value"});
    auto scalar = [&](const char* key, double v) {
        w.row({key, "-1", fmt17(v)});
    };
    auto vec = [&](const char* key, const Eigen::VectorXd& v) {
        for (Eigen::Index l = 0; l < v.size(); ++l)
            w.row({key, std::to_string(l), fmt17(v[l])});
    };
    scalar("n", cell.n);
    scalar("reps", cell.reps);
    scalar("theta_index", cell.theta_index);
    vec("theta0", cell.theta0);
    if (cfg.use_np) {
        scalar("imse_np", cell.imse_np);
        vec("mse_np", cell.mse_np);
    }
    if (cfg.use_ols) {
        scalar("imse_ols", cell.imse_ols);
        vec("mse_ols", cell.mse_ols);
    }
    if (cfg.use_par) {
        scalar("imse_par", cell.imse_par);
        vec("mse_par", cell.mse_par);
    }
    if (cfg.use_par_ols) {
        scalar("imse_par_ols", cell.imse_par_ols);
        vec("mse_par_ols", cell.mse_par_ols);
    }
    if (display_enabled(cfg)) {
        vec("mse_disp_ols", cell.mse_disp_ols);
        vec("mse_disp_par_ols", cell.mse_disp_par_ols);
    }
    w.close();
}

void write_theta_file(const StudyConfig& cfg, const CellResult& cell) {
    if (!cfg.use_par && !cfg.use_par_ols) return;
    std::vector<std::string> header{"rep"};
    if (cfg.use_par)
        for (int j = 0; j < cell.theta_par.cols(); ++j)
            header.push_back("par" + std::to_string(j + 1));
    if (cfg.use_par_ols)
        for (int j = 0; j < cell.theta_par_ols.cols(); ++j)
            header.push_back("par_ols" + std::to_string(j + 1));
    CsvWriter w(theta_path(cfg, cell.theta_index, cell.n), header);
    for (int r = 0; r < cell.reps; ++r) {
        std::vector<std::string> row{std::to_string(r)};
        if (cfg.use_par)
            for (int j = 0; j < cell.theta_par.cols(); ++j)
                row.push_back(fmt17(cell.theta_par(r, j)));
        if (cfg.use_par_ols)
            for (int j = 0; j < cell.theta_par_ols.cols(); ++j)
                row.push_back(fmt17(cell.theta_par_ols(r, j)));
        w.row(row);
    }
    w.close();
}

// Returns the finished cell stored on disk, or nothing if absent, stale, or
// inconsistent with the current config (then it is recomputed).
std::optional<CellResult> load_cell(const StudyConfig& cfg, int ti,
                                    const Eigen::VectorXd& theta0, int n, int reps,
                                    int q) {
    const std::string path = cell_path(cfg, ti, n);
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::map<std::string, std::map<int, double>> fields;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            first = false;
            continue;  // header
        }
        const auto cells = split(line, ',');
        if (cells.size() != 3) return std::nullopt;
        char* end = nullptr;
        const long idx = std::strtol(cells[1].c_str(), &end, 10);
        if (end != cells[1].c_str() + cells[1].size()) return std::nullopt;
        const double v = std::strtod(cells[2].c_str(), &end);
        if (end != cells[2].c_str() + cells[2].size()) return std::nullopt;
        fields[cells[0]][static_cast<int>(idx)] = v;
    }
    auto scalar = [&](const char* key) -> std::optional<double> {
        const auto it = fields.find(key);
        if (it == fields.end() || it->second.size() != 1 ||
            it->second.begin()->first != -1)
            return std::nullopt;
        return it->second.begin()->second;
    };
    auto vec = [&](const char* key, int len) -> std::optional<Eigen::VectorXd> {
        const auto it = fields.find(key);
        if (it == fields.end() || static_cast<int>(it->second.size()) != len)
            return std::nullopt;
        Eigen::VectorXd out(len);
        for (const auto& [idx, v] : it->second) {
            if (idx < 0 || idx >= len) return std::nullopt;
            out[idx] = v;
        }
        return out;
    };
    const auto got_n = scalar("n"), got_reps = scalar("reps");
    const auto got_theta = vec("theta0", static_cast<int>(theta0.size()));
    if (!got_n || !got_reps || !got_theta) return std::nullopt;
    if (*got_n != n || *got_reps != reps) return std::nullopt;
    if ((*got_theta - theta0).cwiseAbs().maxCoeff() != 0.0) return std::nullopt;

    CellResult cell;
    cell.theta_index = ti;
    cell.theta0 = theta0;
    cell.n = n;
    cell.reps = reps;
    const int ng = cfg.grid_points, nd = cfg.display_points;
    if (cfg.use_np) {
        const auto i = scalar("imse_np");
        const auto m = vec("mse_np", ng);
        if (!i || !m) return std::nullopt;
        cell.imse_np = *i;
        cell.mse_np = *m;
    }
    if (cfg.use_ols) {
        const auto i = scalar("imse_ols");
        const auto m = vec("mse_ols", ng);
        if (!i || !m) return std::nullopt;
        cell.imse_ols = *i;
        cell.mse_ols = *m;
    }
    if (cfg.use_par) {
        const auto i = scalar("imse_par");
        const auto m = vec("mse_par", ng);
        if (!i || !m) return std::nullopt;
        cell.imse_par = *i;
        cell.mse_par = *m;
    }
    if (cfg.use_par_ols) {
        const auto i = scalar("imse_par_ols");
        const auto m = vec("mse_par_ols", ng);
        if (!i || !m) return std::nullopt;
        cell.imse_par_ols = *i;
        cell.mse_par_ols = *m;
    }
    if (display_enabled(cfg)) {
        const auto a = vec("mse_disp_ols", nd), b = vec("mse_disp_par_ols", nd);
        if (!a || !b) return std::nullopt;
        cell.mse_disp_ols = *a;
        cell.mse_disp_par_ols = *b;
    }
    if (cfg.use_par || cfg.use_par_ols) {
        CsvTable t;
        try {
            t = read_csv(theta_path(cfg, ti, n));
        } catch (const Error&) {
            return std::nullopt;
        }
        const int want = 1 + q * (cfg.use_par ? 1 : 0) + q * (cfg.use_par_ols ? 1 : 0);
        if (t.values.rows() != reps || t.values.cols() != want) return std::nullopt;
        int col = 1;
        if (cfg.use_par) {
            cell.theta_par = t.values.middleCols(col, q);
            col += q;
        }
        if (cfg.use_par_ols) cell.theta_par_ols = t.values.middleCols(col, q);
    }
    return cell;
}

struct CellWorkspace {
    BasisFamily fam;
    GridMeasure mgrid, mdisp;
    Eigen::MatrixXd hg, hd;      // family_h rows on the two grids
    Eigen::VectorXd a3g, a3d;    // last basis element on the two grids
    GramResult gram;
    Eigen::MatrixXd proj;        // S^{-1} H^T W
    std::vector<SimplexPoint> combined;  // grid then display points
};

CellResult run_cell(const StudyConfig& cfg, const CellWorkspace& ws, int ti, int ni,
                    const Eigen::VectorXd& theta0, int n, int reps) {
    const int ng = ws.mgrid.size(), nd = ws.mdisp.size();
    const int q = ws.fam.p() - 1;
    const bool disp = display_enabled(cfg);
    const Eigen::VectorXd truth_g = ws.a3g + ws.hg * theta0;

    Eigen::MatrixXd est_np(cfg.use_np ? reps : 0, ng);
    Eigen::MatrixXd est_ols(cfg.use_ols ? reps : 0, ng);
    Eigen::MatrixXd est_par(cfg.use_par ? reps : 0, ng);
    Eigen::MatrixXd est_par_ols(cfg.use_par_ols ? reps : 0, ng);
    Eigen::MatrixXd disp_ols(disp ? reps : 0, nd);
    Eigen::MatrixXd disp_par_ols(disp ? reps : 0, nd);
    Eigen::MatrixXd th_par(cfg.use_par ? reps : 0, q);
    Eigen::MatrixXd th_par_ols(cfg.use_par_ols ? reps : 0, q);

    const std::uint64_t cell_seed =
        derive_key(derive_key(cfg.master_seed, static_cast<std::uint64_t>(ti - 1)),
                   static_cast<std::uint64_t>(ni));
    const std::vector<Marginal> margins{Marginal::uniform01(), Marginal::uniform01()};

    std::atomic<int> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    auto worker = [&]() {
        try {
            for (;;) {
                const int r = next.fetch_add(1);
                if (r >= reps) return;
                const std::uint64_t seed_rep =
                    derive_key(cell_seed, static_cast<std::uint64_t>(r));
                const Eigen::MatrixXd x = sample_n(ws.fam, Theta{theta0}, n, seed_rep);
                const ExpMarginSample s = exp_margins(x, margins);
                if (cfg.use_np || cfg.use_par) {
                    const Eigen::VectorXd anp = pickands_np_grid(s, ws.mgrid.points);
                    if (cfg.use_np) est_np.row(r) = anp.transpose();
                    if (cfg.use_par) {
                        ProjectionFit fit;
                        fit.theta_hat = Theta{ws.proj * (anp - ws.a3g)};
                        fit.gram = ws.gram;
                        fit.kind = EstimatorKind::Plain;
                        const Eigen::VectorXd th =
                            apply_constraint(fit, cfg.constraint).theta_hat.values;
                        th_par.row(r) = th.transpose();
                        est_par.row(r) = (ws.a3g + ws.hg * th).transpose();
                    }
                }
                if (cfg.use_ols || cfg.use_par_ols) {
                    const Eigen::VectorXd aols = pickands_ols_grid(
                        s, disp ? ws.combined : ws.mgrid.points);
                    const Eigen::VectorXd aols_g = aols.head(ng);
                    if (cfg.use_ols) est_ols.row(r) = aols_g.transpose();
                    if (disp) disp_ols.row(r) = aols.tail(nd).transpose();
                    if (cfg.use_par_ols) {
                        ProjectionFit fit;
                        fit.theta_hat = Theta{ws.proj * (aols_g - ws.a3g)};
                        fit.gram = ws.gram;
                        fit.kind = EstimatorKind::Ols;
                        const Eigen::VectorXd th =
                            apply_constraint(fit, cfg.constraint).theta_hat.values;
                        th_par_ols.row(r) = th.transpose();
                        est_par_ols.row(r) = (ws.a3g + ws.hg * th).transpose();
                        if (disp)
                            disp_par_ols.row(r) = (ws.a3d + ws.hd * th).transpose();
                    }
                }
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(err_mutex);
            if (!first_error) first_error = std::current_exception();
            next.store(reps);
        }
    };
    const int nthreads = resolve_threads(cfg.parallelism, reps);
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    CellResult cell;
    cell.theta_index = ti;
    cell.theta0 = theta0;
    cell.n = n;
    cell.reps = reps;
    if (cfg.use_np) {
        cell.mse_np = mse_columns(est_np, truth_g);
        cell.imse_np = imse(est_np, truth_g, ws.mgrid);
    }
    if (cfg.use_ols) {
        cell.mse_ols = mse_columns(est_ols, truth_g);
        cell.imse_ols = imse(est_ols, truth_g, ws.mgrid);
    }
    if (cfg.use_par) {
        cell.mse_par = mse_columns(est_par, truth_g);
        cell.imse_par = imse(est_par, truth_g, ws.mgrid);
        cell.theta_par = th_par;
    }
    if (cfg.use_par_ols) {
        cell.mse_par_ols = mse_columns(est_par_ols, truth_g);
        cell.imse_par_ols = imse(est_par_ols, truth_g, ws.mgrid);
        cell.theta_par_ols = th_par_ols;
    }
    if (disp) {
        const Eigen::VectorXd truth_d = ws.a3d + ws.hd * theta0;
        cell.mse_disp_ols = mse_columns(disp_ols, truth_d);
        cell.mse_disp_par_ols = mse_columns(disp_par_ols, truth_d);
    }
    return cell;
}

void write_summaries(const StudyResult& res, const CellWorkspace& ws) {
    const StudyConfig& cfg = res.config;
    {
        CsvWriter w(cfg.output_dir + "/imse.csv",
                    {"theta_index", "theta1", "theta2", "n", "reps", "estimator",
                     "imse"});
        for (const auto& c : res.cells) {
            auto row = [&](const char* est, double v) {
                w.row({std::to_string(c.theta_index), fmt17(c.theta0[0]),
                       fmt17(c.theta0[1]), std::to_string(c.n), std::to_string(c.reps),
                       est, fmt17(v)});
            };
            if (cfg.use_np) row("np", c.imse_np);
            if (cfg.use_ols) row("ols", c.imse_ols);
            if (cfg.use_par) row("par", c.imse_par);
            if (cfg.use_par_ols) row("par_ols", c.imse_par_ols);
        }
        w.close();
    }
    if (cfg.use_ols && cfg.use_par_ols) {
        CsvWriter w(cfg.output_dir + "/ratio.csv",
                    {"theta_index", "theta1", "theta2", "n", "reps", "imse_nonp_ols",
                     "imse_par_ols", "r"});
        for (const auto& c : res.cells)
            w.row({std::to_string(c.theta_index), fmt17(c.theta0[0]),
                   fmt17(c.theta0[1]), std::to_string(c.n), std::to_string(c.reps),
                   fmt17(c.imse_ols), fmt17(c.imse_par_ols),
                   fmt17(c.imse_par_ols / c.imse_ols)});
        w.close();
    }
    if (display_enabled(cfg)) {
        CsvWriter w(cfg.output_dir + "/ratio_w.csv",
                    {"theta_index", "theta1", "theta2", "n", "t", "mse_nonp_ols",
                     "mse_par_ols", "r"});
        for (const auto& c : res.cells)
            for (int l = 0; l < ws.mdisp.size(); ++l)
                w.row({std::to_string(c.theta_index), fmt17(c.theta0[0]),
                       fmt17(c.theta0[1]), std::to_string(c.n),
                       fmt17(ws.mdisp.points[l].t()), fmt17(c.mse_disp_ols[l]),
                       fmt17(c.mse_disp_par_ols[l]),
                       fmt17(c.mse_disp_par_ols[l] / c.mse_disp_ols[l])});
        w.close();
    }
    if (cfg.use_par || cfg.use_par_ols) {
        CsvWriter w(cfg.output_dir + "/quartiles.csv",
                    {"theta_index", "theta1", "theta2", "n", "estimator", "component",
                     "q1", "median", "q3", "mean"});
        for (const auto& c : res.cells) {
            auto block = [&](const char* est, const Eigen::MatrixXd& th) {
                for (int j = 0; j < th.cols(); ++j) {
                    std::vector<double> col(th.rows());
                    for (int r = 0; r < th.rows(); ++r) col[r] = th(r, j);
                    w.row({std::to_string(c.theta_index), fmt17(c.theta0[0]),
                           fmt17(c.theta0[1]), std::to_string(c.n), est,
                           std::to_string(j + 1), fmt17(quantile_sorted(col, 0.25)),
                           fmt17(quantile_sorted(col, 0.5)),
                           fmt17(quantile_sorted(col, 0.75)), fmt17(th.col(j).mean())});
                }
            };
            if (cfg.use_par) block("par", c.theta_par);
            if (cfg.use_par_ols) block("par_ols", c.theta_par_ols);
        }
        w.close();
    }
}

}  // namespace

ProjectionFit apply_constraint(const ProjectionFit& fit, Constraint c) {
    switch (c) {
        case Constraint::None: return fit;
        case Constraint::Simplex: return constrain_theta(fit);
        case Constraint::Box: return constrain_theta_box(fit);
    }
    throw DomainError("apply_constraint: unknown constraint");
}

StudyConfig desk_default() {
    StudyConfig cfg;
    cfg.thetas = {Eigen::Vector2d(0.1, 0.1), Eigen::Vector2d(0.05, 0.9),
                  Eigen::Vector2d(0.8, 0.1)};
    cfg.sample_sizes = {25, 50, 100, 200, 400, 800, 1600, 3200, 6400};
    return cfg;
}

std::string study_schema() {
    return R"(# evc study configuration: key = value, one per line, '#' starts a comment.
# Keys, meanings, and defaults:
#
#   thetas          semicolon-separated theta vectors    0.1,0.1; 0.05,0.9; 0.8,0.1
#   sample_sizes    comma-separated integers (>= 5)      25,50,100,200,400,800,1600,3200,6400
#   replicates      replicates below tail_from           1000
#   replicates_tail replicates from tail_from up         250
#   tail_from       threshold for the reduced count      800
#   grid_points     estimation grid size, t = i/(N+1)    19
#   display_points  display grid for the r(w) curves     101
#   estimators      subset of np,ols,par,par_ols         np,ols,par,par_ols
#   constrained     none | simplex | box | true | false  box
#   master_seed     64-bit seed of the replicate tree    20240817
#   output_dir      directory for the CSV set            study_out
#   parallelism     worker threads, 0 = hardware         0
#   full            full replicate count everywhere      false
#
# 'constrained = true' selects box, 'false' selects none. The study runs the
# trigonometric three-element family; thetas have length 2.
)";
}

StudyConfig parse_study_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    StudyConfig cfg = desk_default();
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) bad_config(lineno, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "thetas") {
            cfg.thetas.clear();
            for (const auto& part : split(val, ';')) {
                const auto comps = split(part, ',');
                Eigen::VectorXd th(comps.size());
                for (std::size_t i = 0; i < comps.size(); ++i)
                    th[static_cast<Eigen::Index>(i)] = parse_real(trim(comps[i]), lineno);
                cfg.thetas.push_back(th);
            }
        } else if (key == "sample_sizes") {
            cfg.sample_sizes.clear();
            for (const auto& part : split(val, ','))
                cfg.sample_sizes.push_back(static_cast<int>(parse_int(trim(part), lineno)));
        } else if (key == "replicates") {
            cfg.replicates = static_cast<int>(parse_int(val, lineno));
        } else if (key == "replicates_tail") {
            cfg.replicates_tail = static_cast<int>(parse_int(val, lineno));
        } else if (key == "tail_from") {
            cfg.tail_from = static_cast<int>(parse_int(val, lineno));
        } else if (key == "grid_points") {
            cfg.grid_points = static_cast<int>(parse_int(val, lineno));
        } else if (key == "display_points") {
            cfg.display_points = static_cast<int>(parse_int(val, lineno));
        } else if (key == "estimators") {
            cfg.use_np = cfg.use_ols = cfg.use_par = cfg.use_par_ols = false;
            for (const auto& part : split(val, ',')) {
                const std::string est = trim(part);
                if (est == "np")
                    cfg.use_np = true;
                else if (est == "ols")
                    cfg.use_ols = true;
                else if (est == "par")
                    cfg.use_par = true;
                else if (est == "par_ols")
                    cfg.use_par_ols = true;
                else
                    bad_config(lineno, "unknown estimator '" + est + "'");
            }
        } else if (key == "constrained") {
            if (val == "none" || val == "false")
                cfg.constraint = Constraint::None;
            else if (val == "simplex")
                cfg.constraint = Constraint::Simplex;
            else if (val == "box" || val == "true")
                cfg.constraint = Constraint::Box;
            else
                bad_config(lineno, "unknown constraint '" + val + "'");
        } else if (key == "master_seed") {
            char* end = nullptr;
            cfg.master_seed = std::strtoull(val.c_str(), &end, 10);
            if (val.empty() || end != val.c_str() + val.size())
                bad_config(lineno, "not an unsigned integer: '" + val + "'");
        } else if (key == "output_dir") {
            cfg.output_dir = val;
        } else if (key == "parallelism") {
            cfg.parallelism = static_cast<int>(parse_int(val, lineno));
        } else if (key == "full") {
            cfg.full = parse_bool(val, lineno);
        } else {
            bad_config(lineno, "unknown key '" + key + "'");
        }
    }
    validate_config(cfg);
    return cfg;
}

double imse(const Eigen::MatrixXd& estimates, const Eigen::VectorXd& truth,
            const GridMeasure& m) {
    if (estimates.cols() != truth.size() || truth.size() != m.size())
        throw DimensionMismatch("imse: grid sizes disagree");
    if (estimates.rows() < 1) throw DomainError("imse: no replicates");
    double acc = 0.0;
    for (Eigen::Index l = 0; l < truth.size(); ++l)
        acc += m.weights[l] * (estimates.col(l).array() - truth[l]).square().mean();
    return acc;
}

StudyResult run_study(const StudyConfig& cfg, std::ostream* log) {
    validate_config(cfg);
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec) throw IoError("cannot create output dir: " + cfg.output_dir);

    CellWorkspace ws;
    ws.fam = make_basis_family(trig_basis());
    ws.mgrid = uniform_grid_2d(cfg.grid_points);
    ws.mdisp = uniform_grid_2d(cfg.display_points);
    const int q = ws.fam.p() - 1;
    ws.hg.resize(ws.mgrid.size(), q);
    ws.a3g.resize(ws.mgrid.size());
    for (int l = 0; l < ws.mgrid.size(); ++l) {
        ws.hg.row(l) = family_h(ws.fam, ws.mgrid.points[l]).transpose();
        ws.a3g[l] = pickands_eval(ws.fam.basis.back(), ws.mgrid.points[l]);
    }
    ws.hd.resize(ws.mdisp.size(), q);
    ws.a3d.resize(ws.mdisp.size());
    for (int l = 0; l < ws.mdisp.size(); ++l) {
        ws.hd.row(l) = family_h(ws.fam, ws.mdisp.points[l]).transpose();
        ws.a3d[l] = pickands_eval(ws.fam.basis.back(), ws.mdisp.points[l]);
    }
    ws.gram = gram_matrix(ws.fam, ws.mgrid);
    if (!ws.gram.full_rank) throw RankDeficient("run_study: Gram matrix rank-deficient");
    ws.proj = ws.gram.s.ldlt().solve(
        Eigen::MatrixXd(ws.hg.transpose() * ws.mgrid.weights.asDiagonal()));
    ws.combined = ws.mgrid.points;
    ws.combined.insert(ws.combined.end(), ws.mdisp.points.begin(), ws.mdisp.points.end());

    StudyResult out;
    out.config = cfg;
    for (std::size_t t = 0; t < cfg.thetas.size(); ++t) {
        for (std::size_t i = 0; i < cfg.sample_sizes.size(); ++i) {
            const int ti = static_cast<int>(t) + 1;
            const int n = cfg.sample_sizes[i];
            const int reps = cfg.reps_for(n);
            if (auto cached = load_cell(cfg, ti, cfg.thetas[t], n, reps, q)) {
                if (log)
                    *log << "cell theta" << ti << " n=" << n << " reps=" << reps
                         << ": loaded from " << cell_path(cfg, ti, n) << "\n";
                out.cells.push_back(std::move(*cached));
                continue;
            }
            CellResult cell = run_cell(cfg, ws, ti, static_cast<int>(i), cfg.thetas[t],
                                       n, reps);
            write_cell_file(cfg, cell);
            write_theta_file(cfg, cell);
            if (log) {
                *log << "cell theta" << ti << " n=" << n << " reps=" << reps;
                if (cfg.use_ols && cfg.use_par_ols)
                    *log << " r=" << cell.imse_par_ols / cell.imse_ols;
                *log << "\n";
            }
            out.cells.push_back(std::move(cell));
        }
    }
    write_summaries(out, ws);
    return out;
}

}  // namespace evc
