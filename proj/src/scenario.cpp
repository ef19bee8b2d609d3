#include "unrest/scenario.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "unrest/errors.hpp"
#include "unrest/numerics.hpp"

namespace unrest {

namespace {

const std::set<std::string> kSections = {"model",   "constants", "grid",  "params",
                                         "initial", "analysis",  "sweep"};

const std::map<std::string, std::set<std::string>> kKeys = {
    {"model", {"d1", "d2", "omega", "v_b", "r", "f", "psi", "mask"}},
    {"grid", {"half_width", "dx"}},
    {"params",
     {"dt", "t_end", "series_stride", "snapshot_times", "snapshot_every", "kernel"}},
    {"initial", {"u0", "v0"}},
    {"analysis", {"eps_calm", "eps_level", "osc_amp", "terrace_ratio", "window"}},
    {"sweep", {"parameter", "values"}},
};

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

std::vector<std::pair<std::string, std::string>>* ScenarioDoc::find_section(
    const std::string& name) {
    for (auto& [sec, entries] : sections)
        if (sec == name) return &entries;
    return nullptr;
}

const std::vector<std::pair<std::string, std::string>>* ScenarioDoc::find_section(
    const std::string& name) const {
    for (const auto& [sec, entries] : sections)
        if (sec == name) return &entries;
    return nullptr;
}

ScenarioDoc parse_scenario_text(const std::string& text, const std::string& origin) {
    ScenarioDoc doc;
    doc.origin = origin;
    std::istringstream in(text);
    std::string line;
    std::string current; // empty: preamble
    int lineno = 0;
    auto where = [&] { return origin + ":" + std::to_string(lineno); };
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t[0] == '[') {
            if (t.back() != ']')
                throw ConfigSyntax(where() + ": unterminated section header");
            current = trim(t.substr(1, t.size() - 2));
            if (!kSections.count(current))
                throw ConfigSchema(where() + ": unknown section [" + current + "]");
            if (doc.find_section(current))
                throw ConfigSchema(where() + ": duplicate section [" + current + "]");
            doc.sections.emplace_back(current,
                                      std::vector<std::pair<std::string, std::string>>{});
            continue;
        }
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigSyntax(where() + ": expected 'key = value' or a [section] header");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        if (key.empty()) throw ConfigSyntax(where() + ": empty key");
        if (value.empty()) throw ConfigSyntax(where() + ": empty value for '" + key + "'");
        if (current.empty()) {
            if (key != "name")
                throw ConfigSchema(where() + ": only 'name' may appear before the first section");
            if (!doc.name.empty()) throw ConfigSchema(where() + ": duplicate 'name'");
            doc.name = value;
            continue;
        }
        auto* entries = doc.find_section(current);
        for (const auto& [k, v] : *entries)
            if (k == key)
                throw ConfigSchema(where() + ": duplicate key '" + key + "' in [" + current + "]");
        if (current != "constants" && !kKeys.at(current).count(key))
            throw ConfigSchema(where() + ": unknown key '" + key + "' in [" + current + "]");
        entries->emplace_back(key, value);
    }
    return doc;
}

ScenarioDoc parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str(), path);
}

bool apply_override(ScenarioDoc& doc, const std::string& dotted_key, const std::string& value) {
    if (dotted_key == "name") {
        bool had = !doc.name.empty();
        doc.name = value;
        return had;
    }
    std::size_t dot = dotted_key.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == dotted_key.size())
        throw ConfigSchema("override key '" + dotted_key + "' is not of the form section.key");
    std::string section = dotted_key.substr(0, dot);
    std::string key = dotted_key.substr(dot + 1);
    if (!kSections.count(section))
        throw ConfigSchema("override targets unknown section [" + section + "]");
    if (section != "constants" && !kKeys.at(section).count(key))
        throw ConfigSchema("override targets unknown key '" + key + "' in [" + section + "]");
    auto* entries = doc.find_section(section);
    if (!entries) {
        doc.sections.emplace_back(section, std::vector<std::pair<std::string, std::string>>{});
        entries = &doc.sections.back().second;
    }
    for (auto& [k, v] : *entries)
        if (k == key) {
            v = value;
            return true;
        }
    entries->emplace_back(key, value);
    return false;
}

namespace {

// Field-level view over one section, tracking which keys were consumed.
class Fields {
public:
    Fields(const ScenarioDoc& doc, const std::string& section) {
        if (const auto* entries = doc.find_section(section))
            for (const auto& [k, v] : *entries) map_.emplace(k, v);
        section_ = section;
    }

    std::optional<std::string> get(const std::string& key) const {
        auto it = map_.find(key);
        if (it == map_.end()) return std::nullopt;
        return it->second;
    }

    std::string require(const std::string& key) const {
        auto v = get(key);
        if (!v) throw ConfigSchema("missing required key '" + key + "' in [" + section_ + "]");
        return *v;
    }

private:
    std::string section_;
    std::map<std::string, std::string> map_;
};

[[noreturn]] void field_error(const std::string& field, const Error& e) {
    throw ConfigSchema("in '" + field + "': " + e.what());
}

double eval_scalar(const std::string& src, const std::map<std::string, double>& constants,
                   const std::string& field) {
    try {
        return compile_expr(src, "", constants).eval_uvxt(0.0, 0.0, 0.0, 0.0);
    } catch (const Error& e) {
        field_error(field, e);
    }
}

CompiledExpr compile_field(const std::string& src, const std::string& allowed,
                           const std::map<std::string, double>& constants,
                           const std::string& field) {
    try {
        return compile_expr(src, allowed, constants);
    } catch (const Error& e) {
        field_error(field, e);
    }
}

std::vector<double> eval_list(const std::string& src,
                              const std::map<std::string, double>& constants,
                              const std::string& field) {
    std::vector<double> out;
    std::string item;
    std::istringstream in(src);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigSchema("in '" + field + "': empty list element");
        out.push_back(eval_scalar(item, constants, field));
    }
    if (out.empty()) throw ConfigSchema("in '" + field + "': empty list");
    return out;
}

int eval_int(const std::string& src, const std::map<std::string, double>& constants,
             const std::string& field) {
    double v = eval_scalar(src, constants, field);
    double r = std::round(v);
    if (std::abs(v - r) > 1e-9 || std::abs(r) > 1e9)
        throw ConfigSchema("in '" + field + "': expected an integer, got " + num::fmt17(v));
    return static_cast<int>(r);
}

} // namespace

Scenario instantiate(const ScenarioDoc& doc) {
    Scenario sc;
    sc.name = doc.name.empty() ? doc.origin : doc.name;

    // Constants first, in file order; each may reference the previous ones.
    if (const auto* entries = doc.find_section("constants")) {
        for (const auto& [key, value] : *entries) {
            for (const char* reserved : kVarNames)
                if (key == reserved)
                    throw ConfigSchema("constant '" + key + "' shadows a variable name");
            sc.constants[key] = eval_scalar(value, sc.constants, "constants." + key);
        }
    }

    Fields model(doc, "model");
    ModelSpec& m = sc.model;
    if (auto v = model.get("d1")) m.d1 = eval_scalar(*v, sc.constants, "model.d1");
    if (auto v = model.get("d2")) m.d2 = eval_scalar(*v, sc.constants, "model.d2");
    if (auto v = model.get("omega")) m.omega = eval_scalar(*v, sc.constants, "model.omega");
    if (auto v = model.get("v_b")) m.v_b = eval_scalar(*v, sc.constants, "model.v_b");
    m.r = compile_field(model.require("r"), "v", sc.constants, "model.r");
    m.f = compile_field(model.require("f"), "u", sc.constants, "model.f");
    m.psi = compile_field(model.require("psi"), "uvx", sc.constants, "model.psi");
    m.mask = compile_field(model.get("mask").value_or("1"), "x", sc.constants, "model.mask");

    Fields grid(doc, "grid");
    if (auto v = grid.get("half_width"))
        sc.grid.half_width = eval_scalar(*v, sc.constants, "grid.half_width");
    if (auto v = grid.get("dx")) sc.grid.dx = eval_scalar(*v, sc.constants, "grid.dx");

    Fields params(doc, "params");
    if (auto v = params.get("dt")) sc.params.dt = eval_scalar(*v, sc.constants, "params.dt");
    if (auto v = params.get("t_end"))
        sc.params.t_end = eval_scalar(*v, sc.constants, "params.t_end");
    if (auto v = params.get("series_stride"))
        sc.params.series_stride = eval_int(*v, sc.constants, "params.series_stride");
    if (auto v = params.get("snapshot_times"))
        sc.params.snapshot_times = eval_list(*v, sc.constants, "params.snapshot_times");
    if (auto v = params.get("snapshot_every"))
        sc.params.snapshot_every = eval_scalar(*v, sc.constants, "params.snapshot_every");
    if (auto v = params.get("kernel")) {
        if (*v == "serial")
            sc.params.kernel = Kernel::Serial;
        else if (*v == "omp")
            sc.params.kernel = Kernel::OpenMP;
        else
            throw ConfigSchema("in 'params.kernel': expected 'serial' or 'omp', got '" + *v + "'");
    }

    Fields initial(doc, "initial");
    sc.u0 = compile_field(initial.require("u0"), "x", sc.constants, "initial.u0");
    sc.v0 = compile_field(initial.get("v0").value_or(num::fmt17(m.v_b)), "x", sc.constants,
                          "initial.v0");

    Fields analysis(doc, "analysis");
    if (auto v = analysis.get("eps_calm"))
        sc.thresholds.eps_calm = eval_scalar(*v, sc.constants, "analysis.eps_calm");
    if (auto v = analysis.get("eps_level"))
        sc.thresholds.eps_level = eval_scalar(*v, sc.constants, "analysis.eps_level");
    if (auto v = analysis.get("osc_amp"))
        sc.thresholds.osc_amp = eval_scalar(*v, sc.constants, "analysis.osc_amp");
    if (auto v = analysis.get("terrace_ratio"))
        sc.thresholds.terrace_ratio = eval_scalar(*v, sc.constants, "analysis.terrace_ratio");
    if (auto v = analysis.get("window"))
        sc.thresholds.tension_window = eval_scalar(*v, sc.constants, "analysis.window");

    if (doc.find_section("sweep")) {
        Fields sweep(doc, "sweep");
        SweepSpec sw;
        sw.parameter = sweep.require("parameter");
        std::size_t dot = sw.parameter.find('.');
        if (dot == std::string::npos)
            throw ConfigSchema("in 'sweep.parameter': expected a dotted section.key path");
        sw.values = eval_list(sweep.require("values"), sc.constants, "sweep.values");
        for (double v : sw.values)
            if (!std::isfinite(v)) throw ConfigSchema("in 'sweep.values': non-finite value");
        sc.sweep = std::move(sw);
    }

    sc.report = validate_model(sc.model);
    if (!sc.report.all_pass())
        throw AssumptionViolation("scenario '" + sc.name + "' violates the standing assumptions",
                                  sc.report.to_text());

    sc.grid.validate();
    sc.params.validate(sc.grid, sc.model);
    initial_state(sc.grid, sc.u0, sc.v0); // eager initial-data check

    return sc;
}

Scenario load_scenario(const std::string& path) { return instantiate(parse_scenario_file(path)); }

} // namespace unrest
