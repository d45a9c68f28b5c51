// evc: sampling, fitting, and Monte Carlo study driver for the parametric
// extreme-value copula family.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "evc/common.hpp"
#include "evc/csv.hpp"
#include "evc/estimators.hpp"
#include "evc/family.hpp"
#include "evc/sampler.hpp"
#include "evc/study.hpp"
#include "evc/trig.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::vector<std::string> g_argv;

json base_manifest(const std::string& command, double wall_seconds) {
    json j;
    j["command"] = command;
    j["argv"] = g_argv;
    j["versions"] = {
        {"evc", kVersion},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                      std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"compiler", __VERSION__},
    };
    j["wall_time_seconds"] = wall_seconds;
    return j;
}

void write_manifest(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << j.dump(2) << "\n";
    if (!out) throw evc::IoError("cannot write manifest: " + path);
}

void ensure_parent_dir(const std::string& path) {
    const fs::path parent = fs::path(path).parent_path();
    if (parent.empty()) return;
    std::error_code ec;
    fs::create_directories(parent, ec);
    if (ec) throw evc::IoError("cannot create directory: " + parent.string());
}

Eigen::VectorXd parse_theta_arg(const std::string& s) {
    std::vector<double> vals;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto pos = s.find(',', start);
        if (pos == std::string::npos) pos = s.size();
        const std::string part = s.substr(start, pos - start);
        char* end = nullptr;
        const double v = std::strtod(part.c_str(), &end);
        if (part.empty() || end != part.c_str() + part.size())
            throw evc::ConfigError("--theta: not a number: '" + part + "'");
        vals.push_back(v);
        start = pos + 1;
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i)
        out[static_cast<Eigen::Index>(i)] = vals[i];
    return out;
}

std::vector<evc::PickandsModel> make_basis(const std::string& family,
                                           double breakpoint, bool breakpoint_set) {
    if (family == "trig")
        return breakpoint_set ? evc::trig_basis(breakpoint) : evc::trig_basis();
    if (family == "atomic4") return evc::nonidentifiable_atomic_basis();
    throw evc::ConfigError("unknown family '" + family + "'");
}

int env_threads() {
    const char* s = std::getenv("EVC_THREADS");
    if (!s || !*s) return 0;
    char* end = nullptr;
    const long v = std::strtol(s, &end, 10);
    return (!*end && v > 0) ? static_cast<int>(v) : 0;
}

// ---- sample ----------------------------------------------------------------

struct SampleArgs {
    std::string theta = "0,0";
    std::string family = "trig";
    double breakpoint = evc::kTrigBreakpoint;
    bool breakpoint_set = false;
    int n = 1000;
    std::uint64_t seed = 1;
    std::string out = "sample.csv";
};

int cmd_sample(const SampleArgs& a) {
    const auto start = std::chrono::steady_clock::now();
    const evc::BasisFamily fam =
        evc::make_basis_family(make_basis(a.family, a.breakpoint, a.breakpoint_set));
    const evc::Theta theta{parse_theta_arg(a.theta)};
    if (a.n < 0) throw evc::ConfigError("-n must be >= 0");
    ensure_parent_dir(a.out);

    Eigen::MatrixXd x(0, 2);
    if (a.n > 0) x = evc::sample_n(fam, theta, a.n, a.seed);
    evc::write_csv(a.out, {"x1", "x2"}, x);

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json m = base_manifest("sample", wall);
    m["config"] = {{"family", a.family},
                   {"breakpoint", a.breakpoint_set ? a.breakpoint : evc::kTrigBreakpoint},
                   {"theta", std::vector<double>(theta.values.begin(), theta.values.end())},
                   {"n", a.n}};
    m["seed"] = a.seed;
    m["outputs"] = {a.out};
    write_manifest(a.out + ".manifest.json", m);
    std::cout << "wrote " << a.n << " pairs to " << a.out << "\n";
    return 0;
}

// ---- fit -------------------------------------------------------------------

struct FitArgs {
    std::string input;
    std::string margins = "ranks";
    std::string family = "trig";
    double breakpoint = evc::kTrigBreakpoint;
    bool breakpoint_set = false;
    int grid = 19;
    std::string kind = "ols";
    std::string constrained = "box";
    double level = 0.95;
    std::string out = "fit_out";
};

evc::Marginal margin_of(const std::string& name) {
    if (name == "ranks") return evc::Marginal::ranks();
    if (name == "uniform") return evc::Marginal::uniform01();
    if (name == "exp") return evc::Marginal::exponential1();
    throw evc::ConfigError("unknown margins '" + name + "'");
}

evc::Constraint constraint_of(const std::string& name) {
    if (name == "none") return evc::Constraint::None;
    if (name == "simplex") return evc::Constraint::Simplex;
    if (name == "box") return evc::Constraint::Box;
    throw evc::ConfigError("unknown constraint '" + name + "'");
}

int cmd_fit(const FitArgs& a) {
    const auto start = std::chrono::steady_clock::now();
    if (a.grid < 2) throw evc::ConfigError("--grid must be >= 2");
    if (!(a.level > 0.0 && a.level < 1.0))
        throw evc::ConfigError("--level must be in (0,1)");
    const evc::EstimatorKind kind = [&] {
        if (a.kind == "ols") return evc::EstimatorKind::Ols;
        if (a.kind == "np") return evc::EstimatorKind::Plain;
        throw evc::ConfigError("unknown kind '" + a.kind + "'");
    }();
    const evc::Constraint constraint = constraint_of(a.constrained);

    const evc::CsvTable table = evc::read_csv(a.input);
    if (table.values.cols() != 2)
        throw evc::DimensionMismatch("fit: input must have exactly 2 columns");
    const evc::Marginal marg = margin_of(a.margins);
    const evc::ExpMarginSample sample = evc::exp_margins(table.values, {marg, marg});

    const evc::BasisFamily fam =
        evc::make_basis_family(make_basis(a.family, a.breakpoint, a.breakpoint_set));
    const evc::GridMeasure m = evc::uniform_grid_2d(a.grid);
    const evc::GridMeasure disp = evc::uniform_grid_2d(101);

    const Eigen::VectorXd raw = kind == evc::EstimatorKind::Ols
                                    ? evc::pickands_ols_grid(sample, m.points)
                                    : evc::pickands_np_grid(sample, m.points);
    Eigen::VectorXd ap(m.size());
    for (int l = 0; l < m.size(); ++l)
        ap[l] = evc::pickands_eval(fam.basis.back(), m.points[l]);
    evc::ProjectionFit fit = evc::project_theta(raw - ap, fam, m);
    fit.kind = kind;
    fit.v_hat = evc::asym_cov(sample, fam, m, kind, raw);
    fit = evc::apply_constraint(fit, constraint);

    fs::create_directories(a.out);
    const int q = fam.p() - 1;
    const int n = sample.n();
    {
        evc::CsvWriter w(a.out + "/theta.csv", {"component", "theta_hat", "se"});
        for (int j = 0; j < q; ++j)
            w.row({std::to_string(j + 1), evc::fmt17(fit.theta_hat.values[j]),
                   evc::fmt17(std::sqrt((*fit.v_hat)(j, j) / n))});
        w.close();
    }
    {
        std::vector<std::string> header;
        for (int j = 0; j < q; ++j) header.push_back("theta" + std::to_string(j + 1));
        evc::write_csv(a.out + "/vcov.csv", header, *fit.v_hat);
    }
    {
        const Eigen::VectorXd raw_disp =
            kind == evc::EstimatorKind::Ols ? evc::pickands_ols_grid(sample, disp.points)
                                            : evc::pickands_np_grid(sample, disp.points);
        evc::CsvWriter w(a.out + "/fit.csv", {"t", "a_raw", "a_fit", "ci_lo", "ci_hi"});
        for (int l = 0; l < disp.size(); ++l) {
            const evc::SimplexPoint& wpt = disp.points[l];
            const double afit = evc::family_A(fam, fit.theta_hat, wpt);
            const evc::Interval ci = evc::ci_for_A(fit, fam, wpt, a.level, n);
            w.row({evc::fmt17(wpt.t()), evc::fmt17(raw_disp[l]), evc::fmt17(afit),
                   evc::fmt17(ci.lo), evc::fmt17(ci.hi)});
        }
        w.close();
    }

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json mf = base_manifest("fit", wall);
    mf["config"] = {{"input", a.input},         {"margins", a.margins},
                    {"family", a.family},       {"grid", a.grid},
                    {"kind", a.kind},           {"constrained", a.constrained},
                    {"level", a.level},         {"n", n}};
    mf["outputs"] = {a.out + "/theta.csv", a.out + "/vcov.csv", a.out + "/fit.csv"};
    write_manifest(a.out + "/manifest.json", mf);

    std::cout << "n = " << n << ", theta_hat = (";
    for (int j = 0; j < q; ++j)
        std::cout << (j ? ", " : "") << fit.theta_hat.values[j];
    std::cout << ")" << (fit.constrained ? " [constrained]" : "") << "\n";
    return 0;
}

// ---- study -----------------------------------------------------------------

struct StudyArgs {
    std::string config;
    bool full = false;
    bool print_schema = false;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = -1;
};

json config_json(const evc::StudyConfig& cfg) {
    json thetas = json::array();
    for (const auto& th : cfg.thetas)
        thetas.push_back(std::vector<double>(th.begin(), th.end()));
    std::string constraint = "box";
    if (cfg.constraint == evc::Constraint::None) constraint = "none";
    if (cfg.constraint == evc::Constraint::Simplex) constraint = "simplex";
    return {{"thetas", thetas},
            {"sample_sizes", cfg.sample_sizes},
            {"replicates", cfg.replicates},
            {"replicates_tail", cfg.replicates_tail},
            {"tail_from", cfg.tail_from},
            {"grid_points", cfg.grid_points},
            {"display_points", cfg.display_points},
            {"estimators",
             {{"np", cfg.use_np},
              {"ols", cfg.use_ols},
              {"par", cfg.use_par},
              {"par_ols", cfg.use_par_ols}}},
            {"constrained", constraint},
            {"master_seed", cfg.master_seed},
            {"output_dir", cfg.output_dir},
            {"parallelism", cfg.parallelism},
            {"full", cfg.full}};
}

int cmd_study(const StudyArgs& a) {
    if (a.print_schema) {
        std::cout << evc::study_schema();
        return 0;
    }
    const auto start = std::chrono::steady_clock::now();
    evc::StudyConfig cfg =
        a.config.empty() ? evc::desk_default() : evc::parse_study_config(a.config);
    if (a.full) cfg.full = true;
    if (a.seed_set) cfg.master_seed = a.seed;
    if (!a.out.empty()) cfg.output_dir = a.out;
    if (a.threads >= 0)
        cfg.parallelism = a.threads;
    else if (const int t = env_threads(); t > 0)
        cfg.parallelism = t;

    const evc::StudyResult res = evc::run_study(cfg, &std::cout);

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json m = base_manifest("study", wall);
    m["config"] = config_json(cfg);
    m["seed"] = cfg.master_seed;
    json outputs = json::array();
    outputs.push_back(cfg.output_dir + "/imse.csv");
    if (cfg.use_ols && cfg.use_par_ols) {
        outputs.push_back(cfg.output_dir + "/ratio.csv");
        outputs.push_back(cfg.output_dir + "/ratio_w.csv");
    }
    if (cfg.use_par || cfg.use_par_ols)
        outputs.push_back(cfg.output_dir + "/quartiles.csv");
    for (const auto& c : res.cells)
        outputs.push_back(cfg.output_dir + "/cell_t" + std::to_string(c.theta_index) +
                          "_n" + std::to_string(c.n) + ".csv");
    m["outputs"] = outputs;
    write_manifest(cfg.output_dir + "/manifest.json", m);
    std::cout << "study finished: " << res.cells.size() << " cells, "
              << cfg.output_dir << "/\n";
    return 0;
}

// ---- hist2d ----------------------------------------------------------------

struct HistArgs {
    std::string input;
    int bins = 10;
    std::string out = "hist2d.csv";
};

int cmd_hist2d(const HistArgs& a) {
    if (a.bins < 2) throw evc::ConfigError("--bins must be >= 2");
    const evc::CsvTable table = evc::read_csv(a.input);
    if (table.values.cols() < 2)
        throw evc::DimensionMismatch("hist2d: input needs at least 2 columns");
    std::vector<long> counts(static_cast<std::size_t>(a.bins) * a.bins, 0);
    for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
        int idx[2];
        for (int j = 0; j < 2; ++j) {
            const double x = table.values(i, j);
            if (!(x >= 0.0 && x <= 1.0))
                throw evc::ParseError("hist2d: value outside [0,1]",
                                      static_cast<std::size_t>(i + 1),
                                      static_cast<std::size_t>(j + 1));
            idx[j] = std::min(a.bins - 1, static_cast<int>(x * a.bins));
        }
        ++counts[static_cast<std::size_t>(idx[0]) * a.bins + idx[1]];
    }
    ensure_parent_dir(a.out);
    evc::CsvWriter w(a.out, {"i", "j", "count"});
    for (int i = 0; i < a.bins; ++i)
        for (int j = 0; j < a.bins; ++j)
            w.row({std::to_string(i), std::to_string(j),
                   std::to_string(counts[static_cast<std::size_t>(i) * a.bins + j])});
    w.close();
    std::cout << "wrote " << a.bins << "x" << a.bins << " histogram to " << a.out
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    g_argv.assign(argv, argv + argc);
    CLI::App app{"extreme-value copula tools: exact sampling, Pickands fitting, "
                 "Monte Carlo study"};
    app.require_subcommand(1);

    SampleArgs sa;
    auto* smp = app.add_subcommand("sample", "draw exact pairs from the family");
    smp->add_option("-n", sa.n, "number of pairs")->capture_default_str();
    smp->add_option("--theta", sa.theta, "weights, comma-separated")
        ->capture_default_str();
    smp->add_option("--family", sa.family, "trig | atomic4")->capture_default_str();
    auto* sbp = smp->add_option("--breakpoint", sa.breakpoint,
                                "breakpoint of the first basis density");
    smp->add_option("--seed", sa.seed, "sampler seed")->capture_default_str();
    smp->add_option("--out", sa.out, "output CSV")->capture_default_str();

    FitArgs fa;
    auto* fit = app.add_subcommand("fit", "fit the family to a two-column sample");
    fit->add_option("--input", fa.input, "input CSV, one pair per row")->required();
    fit->add_option("--margins", fa.margins, "ranks | uniform | exp")
        ->capture_default_str();
    fit->add_option("--family", fa.family, "trig | atomic4")->capture_default_str();
    auto* fbp = fit->add_option("--breakpoint", fa.breakpoint,
                                "breakpoint of the first basis density");
    fit->add_option("--grid", fa.grid, "estimation grid size")->capture_default_str();
    fit->add_option("--kind", fa.kind, "ols | np")->capture_default_str();
    fit->add_option("--constrained", fa.constrained, "none | simplex | box")
        ->capture_default_str();
    fit->add_option("--level", fa.level, "confidence level")->capture_default_str();
    fit->add_option("--out", fa.out, "output directory")->capture_default_str();

    StudyArgs ta;
    auto* st = app.add_subcommand("study", "run the Monte Carlo study");
    st->add_option("config", ta.config, "config file (key = value)");
    st->add_flag("--full", ta.full, "full replicate count at every sample size");
    st->add_flag("--print-schema", ta.print_schema, "print the config schema");
    st->add_option("--out", ta.out, "override output_dir");
    auto* sseed = st->add_option("--seed", ta.seed, "override master_seed");
    st->add_option("--threads", ta.threads, "worker threads (0 = hardware)");

    HistArgs ha;
    auto* hs = app.add_subcommand("hist2d", "bin a two-column sample on [0,1]^2");
    hs->add_option("--input", ha.input, "input CSV")->required();
    hs->add_option("--bins", ha.bins, "bins per axis")->capture_default_str();
    hs->add_option("--out", ha.out, "output CSV")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 3;
    }
    sa.breakpoint_set = sbp->count() > 0;
    fa.breakpoint_set = fbp->count() > 0;
    ta.seed_set = sseed->count() > 0;

    try {
        if (smp->parsed()) return cmd_sample(sa);
        if (fit->parsed()) return cmd_fit(fa);
        if (st->parsed()) return cmd_study(ta);
        if (hs->parsed()) return cmd_hist2d(ha);
    } catch (const evc::RankDeficient& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const evc::SingularDesign& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const evc::SingularEndpointCovariance& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const evc::DegenerateColumn& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const evc::ZeroXi& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const evc::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const evc::UnsupportedModel& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const evc::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const evc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
