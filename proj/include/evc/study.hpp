#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "evc/estimators.hpp"
#include "evc/grid.hpp"

namespace evc {

// Feasibility restriction applied to the projected theta before scoring.
// Box reproduces the reference Monte Carlo results; Simplex is the full
// parameter-set projection; None scores the unconstrained estimator.
enum class Constraint { None, Simplex, Box };

ProjectionFit apply_constraint(const ProjectionFit& fit, Constraint c);

struct StudyConfig {
    std::vector<Eigen::VectorXd> thetas;
    std::vector<int> sample_sizes;
    int replicates = 1000;
    int replicates_tail = 250;  // used once n >= tail_from, unless full
    int tail_from = 800;
    int grid_points = 19;
    int display_points = 101;
    bool use_np = true, use_ols = true, use_par = true, use_par_ols = true;
    Constraint constraint = Constraint::Box;
    std::uint64_t master_seed = 20240817;
    std::string output_dir = "study_out";
    int parallelism = 0;  // 0 = hardware concurrency
    bool full = false;

    int reps_for(int n) const {
        return (!full && n >= tail_from) ? replicates_tail : replicates;
    }
};

StudyConfig desk_default();
std::string study_schema();
StudyConfig parse_study_config(const std::string& path);

// One (theta, n) cell, aggregated over replicates.
struct CellResult {
    int theta_index = 0;  // 1-based, matches file names
    Eigen::VectorXd theta0;
    int n = 0;
    int reps = 0;
    Eigen::VectorXd mse_np, mse_ols, mse_par, mse_par_ols;  // on the M grid
    Eigen::VectorXd mse_disp_ols, mse_disp_par_ols;         // on the display grid
    double imse_np = 0, imse_ols = 0, imse_par = 0, imse_par_ols = 0;
    Eigen::MatrixXd theta_par, theta_par_ols;  // reps x (p-1), as scored
};

struct StudyResult {
    StudyConfig config;
    std::vector<CellResult> cells;
};

// M-weighted grid average of the replicate-mean squared errors.
double imse(const Eigen::MatrixXd& estimates, const Eigen::VectorXd& truth,
            const GridMeasure& m);

// Runs every (theta, n) cell of the config on the trigonometric family,
// flushing each finished cell to output_dir (cell_t<i>_n<n>.csv plus the
// per-replicate theta file) and skipping cells already on disk. Summary
// tables imse.csv, ratio.csv, ratio_w.csv, quartiles.csv are rewritten at
// the end. Replicates run on a work pool; results are keyed by replicate
// index, so output is independent of parallelism.
StudyResult run_study(const StudyConfig& cfg, std::ostream* log = nullptr);

}  // namespace evc
