#pragma once

#include <optional>
#include <string>
#include <vector>

#include "unrest/expr.hpp"

namespace unrest {

// The system
//   du/dt - d1 lap(u) = u * (r(v) * f(u) * mask(x) - omega)
//   dv/dt - d2 lap(v) = psi(u, v, x)
// with base tension v_b. The u reaction is assembled from r, f and mask by
// construction, so u = 0 is always a steady state of the first equation.
struct ModelSpec {
    double d1 = 1.0;
    double d2 = 1.0;
    double omega = 1.0;
    double v_b = 0.5;
    CompiledExpr r;    // over {v}
    CompiledExpr f;    // over {u}
    CompiledExpr psi;  // over {u, v, x}
    CompiledExpr mask; // over {x}; defaults to the constant 1

    double r_at(double v) const;
    double f_at(double u) const;
    double psi_at(double u, double v, double x) const;
    double mask_at(double x) const;

    // Stable digest of scalars + folded expression sources.
    std::string fingerprint() const;
};

ModelSpec make_model(double d1, double d2, double omega, double v_b, std::string_view r_src,
                     std::string_view f_src, std::string_view psi_src,
                     std::string_view mask_src = "1",
                     const std::map<std::string, double>& constants = {});

struct SamplingSpec {
    int resolution = 256; // >= 64 samples per axis
    double u_max = 2.0;   // u-range for f / psi sampling
};

enum class Flag { No, Yes, Unknown };

struct AssumptionCheck {
    std::string name;
    bool pass = false;
    std::string detail;     // witness point on failure
};

struct AssumptionReport {
    std::vector<AssumptionCheck> checks;
    Flag tension_inhibiting = Flag::No;
    Flag tension_enhancing = Flag::No;
    double enhancing_saturation = 0.0; // M with f(M) <= 0 when found

    bool all_pass() const;
    std::string to_text() const;
};

// Checks the standing assumptions on a sample lattice (monotonicity via
// adjacent differences, tolerance 1e-12) and sets the inhibiting/enhancing
// flags when the strict sign holds at every interior sample.
// psi is sampled at x = 0; spatial masks are checked elsewhere.
AssumptionReport validate_model(const ModelSpec& spec, const SamplingSpec& sampling = {});

// Unique v in (0,1) with r(v) = omega/f(0); bisection to 1e-10.
double v_star(const ModelSpec& spec);

// Unique u > 0 with f(u) = omega/r(v); requires r(v) f(0) > omega.
double u_star(const ModelSpec& spec, double v);

// K_b = r(v_b) f(0) - omega, the growth rate of u at the quiet state.
double linear_growth(const ModelSpec& spec);

struct SpeedBracket {
    std::optional<double> c_b; // absent when v_b <= v_star (subcritical tension)
    double c_1 = 0.0;
};

// c_b = 2 sqrt(d1 (r(v_b) f(0) - omega)), c_1 likewise at v = 1.
SpeedBracket wave_speeds(const ModelSpec& spec);

// gamma(c) = (sqrt(c^2-c_b^2) - sqrt(c^2-c_1^2)) / (2c), decreasing on
// [c_1, inf). Returns c_1 when d2 gamma(c_1) <= d1, else the unique c with
// d2 gamma(c) = d1. Throws SubcriticalTension when v_b <= v_star.
double c_gamma(const ModelSpec& spec);

// Final tension V_inf for the reducible case d2 = 0, f == 1, psi = u*G(v)
// with G < 0 on (0,1): the unique V in (0, v_star] with Q(V) = Q(v_b),
// where Q(v) = integral of (omega - r(s))/G(s) ds anchored at v_star.
// Sign analysis: on (0, v_star), omega - r > 0 and G < 0, so Q' < 0; on
// (v_star, 1), omega - r < 0 and G < 0, so Q' > 0. The search therefore
// runs on the decreasing branch left of v_star.
double q_final_tension(const CompiledExpr& g_expr, const ModelSpec& spec);

} // namespace unrest
