#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace std::string_literals;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code = -1;
    std::string out, err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

CliResult cli(const std::string& args) {
    static int counter = 0;
    fs::path o = "cli_stdout_" + std::to_string(counter) + ".txt";
    fs::path e = "cli_stderr_" + std::to_string(counter) + ".txt";
    ++counter;
    std::string cmd = "\""s + UNREST_CLI_PATH + "\" " + args + " >" + o.string() + " 2>" + e.string();
    int rc = std::system(cmd.c_str());
    CliResult res;
    res.code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    res.out = slurp(o);
    res.err = slurp(e);
    fs::remove(o);
    fs::remove(e);
    return res;
}

std::string scn(const std::string& name) { return UNREST_SCENARIO_DIR "/"s + name; }

// First number following "<key> = " in the CLI output.
double parse_value(const std::string& text, const std::string& key) {
    auto pos = text.find(key + " = ");
    REQUIRE(pos != std::string::npos);
    return std::stod(text.substr(pos + key.size() + 3));
}

const std::string kRiotSets = " --set grid.half_width=160 --set params.t_end=100";

} // namespace

TEST_CASE("validate: healthy scenario prints flags and derived scalars") {
    CliResult r = cli("validate " + scn("inhibiting_riot.scn"));
    CHECK(r.code == 0);
    CHECK(r.out.find("tension_inhibiting: yes") != std::string::npos);
    CHECK(r.out.find("tension_enhancing: no") != std::string::npos);
    CHECK(r.out.find("v_star = 0.1") != std::string::npos);
    CHECK(r.out.find("c_b = ") != std::string::npos);
}

TEST_CASE("validate: the whole bundled corpus is healthy") {
    int seen = 0;
    for (const auto& entry : fs::directory_iterator(UNREST_SCENARIO_DIR)) {
        if (entry.path().extension() != ".scn") continue;
        ++seen;
        CliResult r = cli("validate " + entry.path().string());
        INFO("scenario ", entry.path().string(), " stderr: ", r.err);
        CHECK(r.code == 0);
    }
    CHECK(seen >= 16);
}

TEST_CASE("validate: exit codes by failure family") {
    CHECK(cli("validate " + scn("inhibiting_riot.scn") + " --set model.omega=6").code == 2);
    CHECK(cli("validate no_such_file.scn").code == 1);
    CHECK(cli("validate " + scn("inhibiting_riot.scn") + " --set nosuch.key=1").code == 1);
    CHECK(cli("validate " + scn("inhibiting_riot.scn") + " --set model.v_b").code == 1);

    CliResult r = cli("validate " + scn("inhibiting_riot.scn") + " --set model.omega=6");
    CHECK(r.err.find("r(0) < omega/f(0) < r(1)") != std::string::npos);
}

TEST_CASE("validate: repeated override warns and the last one wins") {
    CliResult r = cli("validate " + scn("inhibiting_riot.scn") +
                      " --set model.v_b=0.3 --set model.v_b=0.05");
    CHECK(r.code == 0);
    CHECK(r.err.find("more than once") != std::string::npos);
    CHECK(r.out.find("c_b = undefined") != std::string::npos); // only true for v_b = 0.05
}

TEST_CASE("run: verdict, artifacts, determinism across kernels") {
    fs::remove_all("cli_run_a");
    fs::remove_all("cli_run_b");
    fs::remove_all("cli_run_omp");

    CliResult a = cli("run " + scn("inhibiting_riot.scn") + kRiotSets + " --out cli_run_a");
    CHECK(a.code == 0);
    CHECK(a.out.find("verdict: Riot") != std::string::npos);
    CHECK(fs::exists("cli_run_a/snapshots.ndjson"));
    CHECK(fs::exists("cli_run_a/series.csv"));
    CHECK(fs::exists("cli_run_a/summary.csv"));

    CliResult b = cli("run " + scn("inhibiting_riot.scn") + kRiotSets + " --out cli_run_b");
    CHECK(b.code == 0);
    CHECK(slurp("cli_run_a/snapshots.ndjson") == slurp("cli_run_b/snapshots.ndjson"));

    CliResult c = cli("run " + scn("inhibiting_riot.scn") + kRiotSets +
                      " --kernel omp --out cli_run_omp");
    CHECK(c.code == 0);
    CHECK(slurp("cli_run_a/snapshots.ndjson") == slurp("cli_run_omp/snapshots.ndjson"));
}

TEST_CASE("run: failure exit codes") {
    CHECK(cli("run " + scn("inhibiting_riot.scn") + " --set params.dt=0.6").code == 1);
    CHECK(cli("run " + scn("gap.scn") + " --set params.dt=0.05").code == 3);
}

TEST_CASE("run: --t-end reaches the series") {
    fs::remove_all("cli_tend");
    CliResult r = cli("run " + scn("inhibiting_riot.scn") +
                      " --set grid.half_width=60 --t-end 12 --out cli_tend");
    CHECK(r.code == 0);
    std::ifstream in("cli_tend/series.csv");
    std::string line, last;
    std::getline(in, line); // header
    while (std::getline(in, line))
        if (!line.empty()) last = line;
    CHECK(last.substr(0, 3) == "12,");
}

TEST_CASE("speed: measured front against the theoretical bracket") {
    CliResult r = cli("speed cli_run_a --t1 24.75 --t2 99.75 --scenario " +
                      scn("inhibiting_riot.scn") + kRiotSets);
    CHECK(r.code == 0);
    double c = parse_value(r.out, "c");
    double c_b = parse_value(r.out, "c_b");
    CHECK(c_b == doctest::Approx(1.0).epsilon(1e-12)); // 2*sqrt(5*0.15 - 1/2)
    CHECK(std::abs(c - c_b) / c_b < 0.08);
}

TEST_CASE("speed: a calm run has no front to measure") {
    fs::remove_all("cli_calm");
    CliResult run = cli("run " + scn("inhibiting_riot.scn") +
                        " --set model.v_b=0.05 --set grid.half_width=60 --set params.t_end=80"
                        " --out cli_calm");
    CHECK(run.code == 0);
    CHECK(run.out.find("verdict: Calm") != std::string::npos);
    CHECK(cli("speed cli_calm --t1 19.8 --t2 79.8").code == 4);
}

TEST_CASE("classify: re-reads a run directory") {
    CliResult r = cli("classify " + scn("inhibiting_riot.scn") + kRiotSets + " cli_run_a");
    CHECK(r.code == 0);
    CHECK(r.out.find("verdict: Riot") != std::string::npos);
}

TEST_CASE("scan: sweep output is independent of --jobs") {
    fs::remove_all("cli_scan1");
    fs::remove_all("cli_scan2");
    const std::string sets = " --set grid.half_width=200 --set params.t_end=80";
    CliResult one = cli("scan " + scn("inhibiting_riot.scn") + sets + " --jobs 1 --out cli_scan1");
    CHECK(one.code == 0);
    CliResult two = cli("scan " + scn("inhibiting_riot.scn") + sets + " --jobs 2 --out cli_scan2");
    CHECK(two.code == 0);
    std::string csv1 = slurp("cli_scan1/sweep.csv");
    CHECK(!csv1.empty());
    CHECK(csv1 == slurp("cli_scan2/sweep.csv"));
    CHECK(cli("scan " + scn("si.scn")).code == 1); // no [sweep] section
}

TEST_CASE("ode: terminal tension matches the conserved-quantity root") {
    fs::remove_all("cli_ode");
    CliResult r = cli("ode " + scn("si.scn") + " --set initial.v0=0.9 --out cli_ode");
    CHECK(r.code == 0);
    CHECK(fs::exists("cli_ode/trajectory.csv"));
    double v_inf = parse_value(r.out, "v_inf");
    CHECK(std::abs(v_inf - 0.240813030026910) < 5e-4);
}

TEST_CASE("eig: principal eigenvalue of the tension landscape") {
    fs::remove_all("cli_eig");
    // Constant profile: Neumann ends make the flat vector an exact
    // eigenvector, so lambda_b = -(r(0.45) f(0) - omega) = -(0.45 - 1/3).
    CliResult rc = cli("eig " + scn("periodic.scn") + " --set initial.v0=0.45 --out cli_eig");
    CHECK(rc.code == 0);
    CHECK(fs::exists("cli_eig/eigenvector.csv"));
    double lam_const = parse_value(rc.out, "lambda_b");
    CHECK(std::abs(lam_const - (-(0.45 - 1.0 / 3.0))) < 1e-6);

    // The periodic landscape's plateau sits at 0.6; its low-tension windows
    // can only raise the eigenvalue above the constant-0.6 floor.
    CliResult r20 = cli("eig " + scn("periodic.scn") + " --out cli_eig");
    CHECK(r20.code == 0);
    double lam20 = parse_value(r20.out, "lambda_b");
    CHECK(lam20 > -(0.6 - 1.0 / 3.0));
    CHECK(lam20 < -(0.6 - 1.0 / 3.0) + 5e-3);
    CHECK(lam20 < lam_const);
}
