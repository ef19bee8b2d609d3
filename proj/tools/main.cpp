#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "unrest/analysis.hpp"
#include "unrest/errors.hpp"
#include "unrest/numerics.hpp"
#include "unrest/ode.hpp"
#include "unrest/run_io.hpp"
#include "unrest/scenario.hpp"

namespace {

using namespace unrest;

ScenarioDoc load_doc(const std::string& path, const std::vector<std::string>& sets) {
    ScenarioDoc doc = parse_scenario_file(path);
    std::map<std::string, int> seen;
    for (const std::string& s : sets) {
        std::size_t eq = s.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigSchema("--set expects section.key=value, got '" + s + "'");
        std::string key = s.substr(0, eq);
        if (seen[key]++ > 0)
            std::cerr << "warning: override '" << key << "' given more than once; last wins\n";
        apply_override(doc, key, s.substr(eq + 1));
    }
    return doc;
}

std::string opt_str(const std::optional<double>& v, const char* fallback) {
    return v ? num::fmt17(*v) : std::string(fallback);
}

int cmd_validate(const std::string& path, const std::vector<std::string>& sets) {
    Scenario sc = instantiate(load_doc(path, sets));
    std::cout << "scenario: " << sc.name << "\nassumptions:\n" << sc.report.to_text();
    std::cout << "derived:\n";
    double vs = v_star(sc.model);
    std::cout << "  v_star = " << num::fmt17(vs) << "\n";
    std::cout << "  K_b = " << num::fmt17(linear_growth(sc.model)) << "\n";
    std::string ustar_txt;
    try {
        ustar_txt = num::fmt17(u_star(sc.model, 1.0));
    } catch (const Error&) {
        ustar_txt = "undefined (f stays above omega/r(1))";
    }
    std::cout << "  u_star(1) = " << ustar_txt << "\n";
    SpeedBracket br = wave_speeds(sc.model);
    std::cout << "  c_b = " << opt_str(br.c_b, "undefined (v_b <= v_star)") << "\n";
    std::cout << "  c_1 = " << num::fmt17(br.c_1) << "\n";
    std::string cg_txt;
    try {
        cg_txt = num::fmt17(c_gamma(sc.model));
    } catch (const Error&) {
        cg_txt = "undefined (v_b <= v_star)";
    }
    std::cout << "  c_gamma = " << cg_txt << "\n";
    return 0;
}

void print_classification(const Classification& cls) {
    const Evidence& ev = cls.evidence;
    std::cout << "verdict: " << verdict_name(cls.verdict)
              << (cls.oscillatory ? " (oscillatory tail)" : "") << "\n";
    std::cout << "  sup_u_end = " << num::fmt17(ev.sup_u_end)
              << "\n  u_center_end = " << num::fmt17(ev.u_center_end)
              << "\n  v_center_end = " << num::fmt17(ev.v_center_end)
              << "\n  v_inf = " << opt_str(ev.v_inf_estimate, "-") << "\n";
    for (std::size_t i = 0; i < ev.front_speeds.size(); ++i)
        std::cout << "  front_speed_" << i + 1 << " = " << num::fmt17(ev.front_speeds[i]) << "\n";
    std::cout << "  oscillation_count = " << ev.oscillation_count << "\n";
}

int cmd_run(const std::string& path, std::vector<std::string> sets, const std::string& out,
            bool svg) {
    Scenario sc = instantiate(load_doc(path, sets));
    if (sc.params.snapshot_times.empty()) {
        auto [t1, t2] = speed_sample_times(sc.params.t_end);
        sc.params.snapshot_times = {t1, t2};
    }
    State s0 = initial_state(sc.grid, sc.u0, sc.v0);
    RunRecord run = simulate(sc.model, sc.grid, sc.params, std::move(s0));
    Classification cls = classify(run, sc.model, sc.thresholds);
    write_run(run, cls, out, svg);
    print_classification(cls);
    std::cout << "wrote " << out << "/{snapshots.ndjson,series.csv,summary.csv}"
              << (svg ? " + svg" : "") << "\n";
    return 0;
}

int cmd_ode(const std::string& path, const std::vector<std::string>& sets,
            const std::string& out) {
    Scenario sc = instantiate(load_doc(path, sets));
    double u0 = sc.u0.eval_uvxt(0.0, 0.0, 0.0, 0.0);
    double v0 = sc.v0.eval_uvxt(0.0, 0.0, 0.0, 0.0);
    Trajectory traj =
        run_to_stationarity(sc.model, u0, v0, sc.params.dt, sc.params.t_end, sc.params.series_stride);
    PhaseMetrics pm = phase_metrics(traj);
    std::filesystem::create_directories(out);
    write_trajectory(traj, out + "/trajectory.csv");
    std::cout << "u0 = " << num::fmt17(u0) << ", v0 = " << num::fmt17(v0)
              << "\nt_end = " << num::fmt17(traj.samples.back().t)
              << "\nv_inf = " << num::fmt17(pm.v_inf) << "\nmax_u = " << num::fmt17(pm.max_u)
              << " (at t = " << num::fmt17(traj.t_at_max_u) << ")\n";
    std::cout << "wrote " << out << "/trajectory.csv\n";
    return 0;
}

int cmd_speed(const std::string& run_dir, const std::string& scenario,
              const std::vector<std::string>& sets, double t1, double t2) {
    RunRecord run = read_run(run_dir);
    if (t1 < 0.0 || t2 < 0.0) {
        auto [a, b] = speed_sample_times(run.params.t_end);
        if (t1 < 0.0) t1 = a;
        if (t2 < 0.0) t2 = b;
    }
    SpeedEstimate e;
    if (!scenario.empty()) {
        Scenario sc = instantiate(load_doc(scenario, sets));
        e = estimate_speed(run, sc.model, t1, t2);
    } else {
        e = estimate_speed(run, t1, t2);
    }
    std::cout << "t1 = " << num::fmt17(e.t1) << ", x1 = " << num::fmt17(e.x1) << "\n";
    std::cout << "t2 = " << num::fmt17(e.t2) << ", x2 = " << num::fmt17(e.x2) << "\n";
    std::cout << "c = " << num::fmt17(std::abs(e.c)) << " (signed " << num::fmt17(e.c) << ")\n";
    if (e.c_b) std::cout << "c_b = " << num::fmt17(*e.c_b) << "\n";
    if (e.c_1) std::cout << "c_1 = " << num::fmt17(*e.c_1) << "\n";
    return 0;
}

int cmd_scan(const std::string& path, const std::vector<std::string>& sets, const std::string& out,
             int jobs) {
    ScenarioDoc base = load_doc(path, sets);
    Scenario probe = instantiate(base); // validates the base bundle
    if (!probe.sweep) throw ConfigSchema("scan requires a [sweep] section");
    const SweepSpec sweep = *probe.sweep;

    std::filesystem::create_directories(out);
    const int n = static_cast<int>(sweep.values.size());
    std::vector<SweepRow> rows(n);
    std::atomic<int> next{0};

    auto work = [&]() {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= n) return;
            SweepRow& row = rows[i];
            row.value = sweep.values[i];
            try {
                ScenarioDoc doc = base;
                apply_override(doc, sweep.parameter, num::fmt17(row.value));
                Scenario sc = instantiate(doc);
                auto [t1, t2] = speed_sample_times(sc.params.t_end);
                if (sc.params.snapshot_times.empty()) sc.params.snapshot_times = {t1, t2};
                State s0 = initial_state(sc.grid, sc.u0, sc.v0);
                RunRecord run = simulate(sc.model, sc.grid, sc.params, std::move(s0));
                Classification cls = classify(run, sc.model, sc.thresholds);
                row.cls = cls;
                row.v_inf = cls.evidence.v_inf_estimate;
                char sub[32];
                std::snprintf(sub, sizeof sub, "p%03d", i);
                write_run(run, cls, out + "/" + sub);
                try {
                    row.speed = estimate_speed(run, sc.model, t1, t2);
                } catch (const Error& e) {
                    row.note = e.what(); // no measurable front is a valid outcome
                }
            } catch (const Error& e) {
                row.note = e.what();
            }
        }
    };

    jobs = std::max(1, jobs);
    if (jobs == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < jobs; ++k) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }

    write_sweep(rows, out + "/sweep.csv");
    for (const SweepRow& r : rows) {
        std::cout << sweep.parameter << " = " << num::fmt17(r.value) << " -> "
                  << (r.cls ? verdict_name(r.cls->verdict) : "failed");
        if (r.speed) std::cout << ", |c| = " << num::fmt17(std::abs(r.speed->c));
        if (!r.note.empty()) std::cout << " [" << r.note << "]";
        std::cout << "\n";
    }
    std::cout << "wrote " << out << "/sweep.csv\n";
    return 0;
}

int cmd_classify(const std::string& path, const std::vector<std::string>& sets,
                 const std::string& run_dir) {
    Scenario sc = instantiate(load_doc(path, sets));
    RunRecord run = read_run(run_dir);
    Classification cls = classify(run, sc.model, sc.thresholds);
    print_classification(cls);
    return 0;
}

int cmd_eig(const std::string& path, const std::vector<std::string>& sets,
            const std::string& out) {
    Scenario sc = instantiate(load_doc(path, sets));
    std::vector<double> profile(sc.grid.nodes());
    for (int i = 0; i < sc.grid.nodes(); ++i)
        profile[i] = sc.v0.eval_uvxt(0.0, 0.0, sc.grid.x_at(i), 0.0);
    EigenResult res = principal_eigenvalue(sc.model, profile, sc.grid);
    std::filesystem::create_directories(out);
    write_eigenvector(res, sc.grid, out + "/eigenvector.csv");
    std::cout << "lambda_b = " << num::fmt17(res.lambda_b) << "\niterations = " << res.iterations
              << "\nresidual = " << num::fmt17(res.residual) << "\nwrote " << out
              << "/eigenvector.csv\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and analysis toolkit for two-component activity/tension"
                 " reaction-diffusion systems"};
    app.require_subcommand(1);

    std::string scenario, run_dir, out = "out";
    std::vector<std::string> sets;
    bool svg = false;
    int jobs = 1;
    double t1 = -1.0, t2 = -1.0;
    std::string t_end_s, snap_s, kernel_s;

    auto add_common = [&](CLI::App* sub, bool with_out) {
        sub->add_option("scenario", scenario, "scenario file")->required();
        sub->add_option("--set", sets, "override section.key=value (repeatable)");
        if (with_out) sub->add_option("--out", out, "output directory (default: out)");
    };

    CLI::App* validate = app.add_subcommand("validate", "check assumptions, print derived scalars");
    add_common(validate, false);

    CLI::App* run = app.add_subcommand("run", "simulate, classify and write a run directory");
    add_common(run, true);
    run->add_flag("--svg", svg, "also emit snapshot_<t>.svg plots");
    run->add_option("--t-end", t_end_s, "override params.t_end");
    run->add_option("--snapshot-times", snap_s, "override params.snapshot_times (comma list)");
    run->add_option("--kernel", kernel_s, "serial or omp")
        ->check(CLI::IsMember({"serial", "omp"}));

    CLI::App* ode = app.add_subcommand("ode", "integrate the space-homogeneous system");
    add_common(ode, true);

    CLI::App* speed = app.add_subcommand("speed", "front speed of an existing run directory");
    speed->add_option("run_dir", run_dir, "directory written by 'run'")->required();
    speed->add_option("--scenario", scenario, "scenario file (attaches the c_b/c_1 bracket)");
    speed->add_option("--set", sets, "override section.key=value (repeatable)");
    speed->add_option("--t1", t1, "first sampling time (default: proportional rule)");
    speed->add_option("--t2", t2, "second sampling time (default: proportional rule)");

    CLI::App* scan = app.add_subcommand("scan", "run the [sweep] of a scenario");
    add_common(scan, true);
    scan->add_option("--jobs", jobs, "parallel workers across sweep points")
        ->check(CLI::PositiveNumber);

    CLI::App* classify = app.add_subcommand("classify", "classify an existing run directory");
    classify->add_option("scenario", scenario, "scenario file")->required();
    classify->add_option("run_dir", run_dir, "directory written by 'run'")->required();
    classify->add_option("--set", sets, "override section.key=value (repeatable)");

    CLI::App* eig = app.add_subcommand("eig", "principal eigenvalue for the v0 tension profile");
    add_common(eig, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*run) {
            if (!t_end_s.empty()) sets.push_back("params.t_end=" + t_end_s);
            if (!snap_s.empty()) sets.push_back("params.snapshot_times=" + snap_s);
            if (!kernel_s.empty()) sets.push_back("params.kernel=" + kernel_s);
            return cmd_run(scenario, sets, out, svg);
        }
        if (*validate) return cmd_validate(scenario, sets);
        if (*ode) return cmd_ode(scenario, sets, out);
        if (*speed) return cmd_speed(run_dir, scenario, sets, t1, t2);
        if (*scan) return cmd_scan(scenario, sets, out, jobs);
        if (*classify) return cmd_classify(scenario, sets, run_dir);
        if (*eig) return cmd_eig(scenario, sets, out);
    } catch (const AssumptionViolation& e) {
        std::cerr << "error: " << e.what() << "\n" << e.report_text();
        return static_cast<int>(e.error_class());
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.error_class());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
