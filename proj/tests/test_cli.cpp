#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "evc/csv.hpp"

namespace fs = std::filesystem;

namespace {

// EVC_BIN points at the evc binary; ctest sets it from the build tree.
const char* bin() { return std::getenv("EVC_BIN"); }

struct RunResult {
    int code = -1;
    std::string out;
};

RunResult run(const std::string& args) {
    static int counter = 0;
    const fs::path log =
        fs::temp_directory_path() / ("evc_cli_" + std::to_string(++counter) + ".log");
    const std::string cmd =
        std::string(bin()) + " " + args + " > " + log.string() + " 2>&1";
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.code = (raw == -1) ? -1 : WEXITSTATUS(raw);
    std::ifstream in(log);
    std::ostringstream ss;
    ss << in.rdbuf();
    r.out = ss.str();
    fs::remove(log);
    return r;
}

fs::path workdir() {
    const fs::path dir = fs::temp_directory_path() / "evc_cli_test";
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("sample writes a csv and a manifest") {
    REQUIRE(bin() != nullptr);
    const fs::path dir = workdir();
    const std::string out = (dir / "s.csv").string();
    const RunResult r =
        run("sample -n 200 --theta 0.1,0.1 --seed 42 --out " + out);
    CHECK(r.code == 0);
    const evc::CsvTable t = evc::read_csv(out);
    REQUIRE(t.header.size() == 2);
    CHECK(t.header[0] == "x1");
    REQUIRE(t.values.rows() == 200);
    CHECK(t.values.minCoeff() > 0.0);
    CHECK(t.values.maxCoeff() < 1.0);

    const std::string manifest = out + ".manifest.json";
    REQUIRE(fs::exists(manifest));
    std::ifstream in(manifest);
    std::ostringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str().find("\"command\": \"sample\"") != std::string::npos);
    CHECK(ss.str().find("\"seed\": 42") != std::string::npos);

    // same seed, same bytes
    const std::string out2 = (dir / "s2.csv").string();
    CHECK(run("sample -n 200 --theta 0.1,0.1 --seed 42 --out " + out2).code == 0);
    std::ifstream a(out), b(out2);
    std::ostringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == sb.str());

    // n = 0 gives a header-only file
    const std::string out0 = (dir / "s0.csv").string();
    CHECK(run("sample -n 0 --out " + out0).code == 0);
    std::ifstream z(out0);
    std::string line;
    std::getline(z, line);
    CHECK(line == "x1,x2");
    CHECK_FALSE(std::getline(z, line));
}

TEST_CASE("fit produces estimates and intervals") {
    REQUIRE(bin() != nullptr);
    const fs::path dir = workdir();
    const std::string data = (dir / "d.csv").string();
    REQUIRE(run("sample -n 500 --theta 0.1,0.1 --seed 7 --out " + data).code == 0);

    const std::string outdir = (dir / "fit1").string();
    const RunResult r = run("fit --input " + data + " --margins uniform --out " + outdir);
    CHECK(r.code == 0);
    const evc::CsvTable theta = evc::read_csv(outdir + "/theta.csv");
    REQUIRE(theta.values.rows() == 2);
    CHECK(theta.values(0, 1) > -0.5);
    CHECK(theta.values(0, 2) > 0.0);  // standard error
    const evc::CsvTable fitcsv = evc::read_csv(outdir + "/fit.csv");
    CHECK(fitcsv.values.rows() == 101);
    for (int l = 0; l < 101; ++l) {
        CHECK(fitcsv.values(l, 3) <= fitcsv.values(l, 2));  // ci_lo <= a_fit
        CHECK(fitcsv.values(l, 4) >= fitcsv.values(l, 2));
        CHECK(fitcsv.values(l, 4) <= 1.0);
    }
    CHECK(fs::exists(outdir + "/vcov.csv"));
    CHECK(fs::exists(outdir + "/manifest.json"));

    // rank margins work on the same data
    CHECK(run("fit --input " + data + " --margins ranks --kind np --out " +
              (dir / "fit2").string())
              .code == 0);

    // the non-identifiable family exits with the rank-deficiency code
    const RunResult bad = run("fit --input " + data + " --family atomic4 --out " +
                              (dir / "fit3").string());
    CHECK(bad.code == 2);

    // nonsense margins
    CHECK(run("fit --input " + data + " --margins magic --out " +
              (dir / "fit4").string())
              .code == 3);
    // missing input file
    CHECK(run("fit --input " + (dir / "nope.csv").string() + " --out " +
              (dir / "fit5").string())
              .code == 1);
}

TEST_CASE("hist2d counts sum to n") {
    REQUIRE(bin() != nullptr);
    const fs::path dir = workdir();
    const std::string data = (dir / "h.csv").string();
    REQUIRE(run("sample -n 300 --seed 3 --out " + data).code == 0);
    const std::string out = (dir / "hist.csv").string();
    CHECK(run("hist2d --input " + data + " --bins 5 --out " + out).code == 0);
    const evc::CsvTable t = evc::read_csv(out);
    REQUIRE(t.values.rows() == 25);
    double total = 0;
    for (int i = 0; i < 25; ++i) total += t.values(i, 2);
    CHECK(total == 300.0);

    // out-of-range data is a parse error
    const std::string badcsv = (dir / "bad.csv").string();
    {
        std::ofstream f(badcsv);
        f << "x1,x2\n0.5,1.5\n";
    }
    CHECK(run("hist2d --input " + badcsv + " --out " + (dir / "hb.csv").string())
              .code == 1);
    CHECK(run("hist2d --input " + data + " --bins 1 --out " +
              (dir / "hb2.csv").string())
              .code == 3);
}

TEST_CASE("study schema, config errors, and cli errors") {
    REQUIRE(bin() != nullptr);
    const fs::path dir = workdir();

    const RunResult schema = run("study --print-schema");
    CHECK(schema.code == 0);
    CHECK(schema.out.find("master_seed") != std::string::npos);

    const std::string badcfg = (dir / "bad.cfg").string();
    {
        std::ofstream f(badcfg);
        f << "unknown_key = 1\n";
    }
    CHECK(run("study " + badcfg).code == 3);

    CHECK(run("frobnicate").code == 3);
    CHECK(run("--help").code == 0);
    CHECK(run("sample --help").code == 0);
}

TEST_CASE("tiny study via the cli") {
    REQUIRE(bin() != nullptr);
    const fs::path dir = workdir();
    const std::string cfg = (dir / "tiny.cfg").string();
    {
        std::ofstream f(cfg);
        f << "thetas = 0.1,0.1\n"
          << "sample_sizes = 25\n"
          << "replicates = 6\n"
          << "grid_points = 7\n"
          << "display_points = 9\n"
          << "master_seed = 31337\n"
          << "output_dir = " << (dir / "tiny_out").string() << "\n";
    }
    const RunResult r = run("study " + cfg + " --threads 2");
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "tiny_out" / "imse.csv"));
    CHECK(fs::exists(dir / "tiny_out" / "manifest.json"));
    std::ifstream imse(dir / "tiny_out" / "imse.csv");
    std::string line;
    int rows = 0;
    bool saw_par_ols = false;
    while (std::getline(imse, line)) {
        ++rows;
        if (line.find(",par_ols,") != std::string::npos) saw_par_ols = true;
    }
    CHECK(rows == 5);  // header + one row per estimator
    CHECK(saw_par_ols);
}
