#include "unrest/run_io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "unrest/errors.hpp"
#include "unrest/numerics.hpp"

namespace unrest {

namespace {

namespace fs = std::filesystem;

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    return out;
}

void write_array(std::ostream& os, const char* key, const std::vector<double>& a) {
    os << '"' << key << "\":[";
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (i) os << ',';
        os << num::fmt17(a[i]);
    }
    os << ']';
}

std::string csv_cell(const std::optional<double>& v) { return v ? num::fmt17(*v) : std::string{}; }

// Minimal hand-emitted plot: u solid blue, v dashed brown, light axes.
void write_svg(const fs::path& path, const State& s, const GridSpec& grid) {
    const double W = 860, H = 440, L = 60, R = 20, T = 24, B = 40;
    const double pw = W - L - R, ph = H - T - B;
    double sup = *std::max_element(s.u.begin(), s.u.end());
    const double ymax = std::max(1.0, sup) * 1.05;
    auto px = [&](double x) { return L + (x + grid.half_width) / (2.0 * grid.half_width) * pw; };
    auto py = [&](double y) { return T + (1.0 - y / ymax) * ph; };

    auto polyline = [&](const std::vector<double>& a, const char* style) {
        std::ostringstream os;
        os << "<polyline fill=\"none\" " << style << " points=\"";
        for (int i = 0; i < grid.nodes(); ++i) {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(grid.x_at(i)), py(a[i]));
            os << buf;
        }
        os << "\"/>\n";
        return os.str();
    };

    std::ofstream out = open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    // axes
    out << "<line x1=\"" << L << "\" y1=\"" << py(0) << "\" x2=\"" << W - R << "\" y2=\"" << py(0)
        << "\" stroke=\"#888\"/>\n";
    out << "<line x1=\"" << px(0) << "\" y1=\"" << T << "\" x2=\"" << px(0) << "\" y2=\"" << H - B
        << "\" stroke=\"#ccc\"/>\n";
    for (double y : {0.5, 1.0})
        out << "<line x1=\"" << L << "\" y1=\"" << py(y) << "\" x2=\"" << W - R << "\" y2=\""
            << py(y) << "\" stroke=\"#eee\"/>\n"
            << "<text x=\"8\" y=\"" << py(y) + 4 << "\" font-size=\"12\" fill=\"#555\">" << y
            << "</text>\n";
    for (double x : {-grid.half_width, 0.0, grid.half_width})
        out << "<text x=\"" << px(x) - 10 << "\" y=\"" << H - 18
            << "\" font-size=\"12\" fill=\"#555\">" << x << "</text>\n";
    out << "<text x=\"" << L << "\" y=\"16\" font-size=\"13\" fill=\"#333\">t = " << s.t
        << "   (solid: activity u, dashed: tension v)</text>\n";
    out << polyline(s.v, "stroke=\"#8b5a2b\" stroke-width=\"1.5\" stroke-dasharray=\"8 5\"");
    out << polyline(s.u, "stroke=\"#1f4fd8\" stroke-width=\"1.5\"");
    out << "</svg>\n";
}

} // namespace

void write_run(const RunRecord& run, const Classification& cls, const std::string& out_dir,
               bool svg) {
    fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + out_dir + "': " + ec.message());

    {
        std::ofstream out = open_out(dir / "snapshots.ndjson");
        for (const State& s : run.snapshots) {
            std::vector<double> x(run.grid.nodes());
            for (int i = 0; i < run.grid.nodes(); ++i) x[i] = run.grid.x_at(i);
            out << "{\"t\":" << num::fmt17(s.t) << ',';
            write_array(out, "x", x);
            out << ',';
            write_array(out, "u", s.u);
            out << ',';
            write_array(out, "v", s.v);
            out << "}\n";
        }
    }
    {
        std::ofstream out = open_out(dir / "series.csv");
        out << "t,sup_u,u_center,v_center,front_x\n";
        for (const SeriesSample& s : run.series)
            out << num::fmt17(s.t) << ',' << num::fmt17(s.sup_u) << ',' << num::fmt17(s.u_center)
                << ',' << num::fmt17(s.v_center) << ',' << csv_cell(s.front_x) << '\n';
    }
    {
        const Evidence& ev = cls.evidence;
        std::ofstream out = open_out(dir / "summary.csv");
        out << "verdict,oscillatory,sup_u_end,u_center_end,v_center_end,v_inf,front_speed_1,"
               "front_speed_2,oscillation_count,model_fingerprint\n";
        out << verdict_name(cls.verdict) << ',' << (cls.oscillatory ? "true" : "false") << ','
            << num::fmt17(ev.sup_u_end) << ',' << num::fmt17(ev.u_center_end) << ','
            << num::fmt17(ev.v_center_end) << ',' << csv_cell(ev.v_inf_estimate) << ','
            << (ev.front_speeds.size() > 0 ? num::fmt17(ev.front_speeds[0]) : std::string{}) << ','
            << (ev.front_speeds.size() > 1 ? num::fmt17(ev.front_speeds[1]) : std::string{}) << ','
            << ev.oscillation_count << ',' << run.model_fingerprint << '\n';
    }
    if (svg)
        for (const State& s : run.snapshots) {
            char name[64];
            std::snprintf(name, sizeof name, "snapshot_%g.svg", s.t);
            write_svg(dir / name, s, run.grid);
        }
}

RunRecord read_run(const std::string& dir) {
    fs::path base(dir);
    std::ifstream in(base / "snapshots.ndjson");
    if (!in) throw IoError("cannot open '" + (base / "snapshots.ndjson").string() + "'");

    RunRecord run;
    std::string line;
    int lineno = 0;
    bool grid_set = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw IoError("snapshots.ndjson:" + std::to_string(lineno) + ": " + e.what());
        }
        if (!j.contains("t") || !j.contains("x") || !j.contains("u") || !j.contains("v"))
            throw IoError("snapshots.ndjson:" + std::to_string(lineno) +
                          ": record must have t, x, u, v");
        State s;
        s.t = j["t"].get<double>();
        std::vector<double> x = j["x"].get<std::vector<double>>();
        s.u = j["u"].get<std::vector<double>>();
        s.v = j["v"].get<std::vector<double>>();
        if (x.size() != s.u.size() || x.size() != s.v.size() || x.size() < 5)
            throw IoError("snapshots.ndjson:" + std::to_string(lineno) +
                          ": x, u, v must share a length of at least 5");
        if (!grid_set) {
            GridSpec g;
            g.dx = x[1] - x[0];
            g.half_width = -x[0];
            g.validate();
            if (static_cast<std::size_t>(g.nodes()) != x.size())
                throw IoError("snapshots.ndjson: x array is not a symmetric uniform grid");
            for (std::size_t i = 0; i < x.size(); ++i)
                if (std::abs(x[i] - g.x_at(static_cast<int>(i))) > 1e-9)
                    throw IoError("snapshots.ndjson: x array is not uniform");
            run.grid = g;
            grid_set = true;
        } else if (x.size() != static_cast<std::size_t>(run.grid.nodes())) {
            throw IoError("snapshots.ndjson:" + std::to_string(lineno) +
                          ": inconsistent record length");
        }
        run.snapshots.push_back(std::move(s));
    }
    if (run.snapshots.empty()) throw IoError("snapshots.ndjson holds no records");
    run.params.t_end = run.snapshots.back().t;

    std::ifstream ser(base / "series.csv");
    if (ser) {
        std::string row;
        std::getline(ser, row); // header
        int rowno = 1;
        while (std::getline(ser, row)) {
            ++rowno;
            if (row.empty()) continue;
            std::istringstream rs(row);
            std::string cell;
            std::vector<std::string> cells;
            while (std::getline(rs, cell, ',')) cells.push_back(cell);
            if (row.back() == ',') cells.push_back("");
            if (cells.size() != 5)
                throw IoError("series.csv:" + std::to_string(rowno) + ": expected 5 columns");
            SeriesSample s;
            try {
                s.t = std::stod(cells[0]);
                s.sup_u = std::stod(cells[1]);
                s.u_center = std::stod(cells[2]);
                s.v_center = std::stod(cells[3]);
                if (!cells[4].empty()) s.front_x = std::stod(cells[4]);
            } catch (const std::exception&) {
                throw IoError("series.csv:" + std::to_string(rowno) + ": malformed number");
            }
            run.series.push_back(s);
        }
    }
    return run;
}

void write_sweep(const std::vector<SweepRow>& rows, const std::string& csv_path) {
    if (rows.empty()) throw PreconditionViolated("write_sweep: empty table");
    std::ofstream out = open_out(csv_path);
    out << "value,verdict,oscillatory,c,c_b,c_1,v_inf,sup_u_end,u_center_end,v_center_end,note\n";
    for (const SweepRow& r : rows) {
        out << num::fmt17(r.value) << ',';
        if (r.cls) {
            const Evidence& ev = r.cls->evidence;
            out << verdict_name(r.cls->verdict) << ',' << (r.cls->oscillatory ? "true" : "false")
                << ',';
            out << (r.speed ? num::fmt17(std::abs(r.speed->c)) : std::string{}) << ','
                << csv_cell(r.speed ? r.speed->c_b : std::nullopt) << ','
                << csv_cell(r.speed ? r.speed->c_1 : std::nullopt) << ',';
            out << csv_cell(r.v_inf) << ',' << num::fmt17(ev.sup_u_end) << ','
                << num::fmt17(ev.u_center_end) << ',' << num::fmt17(ev.v_center_end) << ',';
        } else {
            out << ",,";
            out << (r.speed ? num::fmt17(std::abs(r.speed->c)) : std::string{}) << ','
                << csv_cell(r.speed ? r.speed->c_b : std::nullopt) << ','
                << csv_cell(r.speed ? r.speed->c_1 : std::nullopt) << ',';
            out << csv_cell(r.v_inf) << ",,,,";
        }
        out << r.note << '\n';
    }
}

void write_trajectory(const Trajectory& traj, const std::string& csv_path) {
    std::ofstream out = open_out(csv_path);
    out << "t,u,v\n";
    for (const OdeSample& s : traj.samples)
        out << num::fmt17(s.t) << ',' << num::fmt17(s.u) << ',' << num::fmt17(s.v) << '\n';
}

void write_eigenvector(const EigenResult& res, const GridSpec& grid, const std::string& csv_path) {
    std::ofstream out = open_out(csv_path);
    out << "x,phi\n";
    for (int i = 0; i < grid.nodes(); ++i)
        out << num::fmt17(grid.x_at(i)) << ',' << num::fmt17(res.eigenvector[i]) << '\n';
}

} // namespace unrest
