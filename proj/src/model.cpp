#include "unrest/model.hpp"

#include <cmath>
#include <sstream>

#include "unrest/errors.hpp"
#include "unrest/numerics.hpp"

namespace unrest {

double ModelSpec::r_at(double v) const { return r.eval_uvxt(0.0, v, 0.0, 0.0); }
double ModelSpec::f_at(double u) const { return f.eval_uvxt(u, 0.0, 0.0, 0.0); }
double ModelSpec::psi_at(double u, double v, double x) const {
    return psi.eval_uvxt(u, v, x, 0.0);
}
double ModelSpec::mask_at(double x) const { return mask.eval_uvxt(0.0, 0.0, x, 0.0); }

std::string ModelSpec::fingerprint() const {
    std::string blob = num::fmt17(d1) + "|" + num::fmt17(d2) + "|" + num::fmt17(omega) + "|" +
                       num::fmt17(v_b) + "|" + r.source() + "|" + f.source() + "|" +
                       psi.source() + "|" + mask.source();
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(num::fnv1a(blob)));
    return buf;
}

ModelSpec make_model(double d1, double d2, double omega, double v_b, std::string_view r_src,
                     std::string_view f_src, std::string_view psi_src, std::string_view mask_src,
                     const std::map<std::string, double>& constants) {
    ModelSpec m;
    m.d1 = d1;
    m.d2 = d2;
    m.omega = omega;
    m.v_b = v_b;
    m.r = compile_expr(r_src, "v", constants);
    m.f = compile_expr(f_src, "u", constants);
    m.psi = compile_expr(psi_src, "uvx", constants);
    m.mask = compile_expr(mask_src, "x", constants);
    return m;
}

bool AssumptionReport::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

std::string AssumptionReport::to_text() const {
    std::ostringstream os;
    for (const auto& c : checks) {
        os << (c.pass ? "  [ok]   " : "  [FAIL] ") << c.name;
        if (!c.detail.empty()) os << " -- " << c.detail;
        os << "\n";
    }
    auto flag = [](Flag f) {
        return f == Flag::Yes ? "yes" : (f == Flag::No ? "no" : "unknown");
    };
    os << "  tension_inhibiting: " << flag(tension_inhibiting) << "\n";
    os << "  tension_enhancing: " << flag(tension_enhancing);
    if (tension_enhancing == Flag::Yes)
        os << " (saturation at u = " << num::fmt17(enhancing_saturation) << ")";
    os << "\n";
    return os.str();
}

namespace {

constexpr double kMonoTol = 1e-12;

std::string point(double a, double b) {
    return "(" + num::fmt17(a) + ", " + num::fmt17(b) + ")";
}

} // namespace

AssumptionReport validate_model(const ModelSpec& spec, const SamplingSpec& sampling) {
    if (sampling.resolution < 64)
        throw PreconditionViolated("validate_model: sampling resolution must be >= 64");
    const int n = sampling.resolution;
    AssumptionReport rep;

    auto add = [&rep](const std::string& name, bool pass, const std::string& detail = {}) {
        rep.checks.push_back({name, pass, pass ? std::string{} : detail});
    };

    // Scalar constraints first; expression checks assume them.
    add("d1 > 0", spec.d1 > 0.0, "d1 = " + num::fmt17(spec.d1));
    add("d2 >= 0", spec.d2 >= 0.0, "d2 = " + num::fmt17(spec.d2));
    add("omega > 0", spec.omega > 0.0, "omega = " + num::fmt17(spec.omega));
    add("v_b in (0,1)", spec.v_b > 0.0 && spec.v_b < 1.0, "v_b = " + num::fmt17(spec.v_b));

    // f nonincreasing on [0, u_max], f(0) > 0.
    {
        double f0 = spec.f_at(0.0);
        bool mono = true;
        std::string witness;
        double prev = f0;
        for (int i = 1; i <= n; ++i) {
            double u = sampling.u_max * i / n;
            double fu = spec.f_at(u);
            if (fu - prev > kMonoTol) {
                mono = false;
                witness = "f increases at u = " + num::fmt17(u);
                break;
            }
            prev = fu;
        }
        add("f(0) > 0", f0 > 0.0, "f(0) = " + num::fmt17(f0));
        add("f nonincreasing on [0, u_max]", mono, witness);
    }

    // r nonnegative and increasing on [0, 1]; the paper states monotonicity on
    // (0,1) but evaluates r at the endpoints, so we require finite endpoint
    // values too.
    {
        bool nonneg = true, mono = true;
        std::string w_nonneg, w_mono;
        double prev = spec.r_at(0.0);
        if (prev < -kMonoTol) {
            nonneg = false;
            w_nonneg = "r(0) = " + num::fmt17(prev);
        }
        for (int i = 1; i <= n; ++i) {
            double v = static_cast<double>(i) / n;
            double rv = spec.r_at(v);
            if (rv < -kMonoTol && nonneg) {
                nonneg = false;
                w_nonneg = "r(" + num::fmt17(v) + ") = " + num::fmt17(rv);
            }
            if (prev - rv > kMonoTol && mono) {
                mono = false;
                w_mono = "r decreases at v = " + num::fmt17(v);
            }
            prev = rv;
        }
        add("r >= 0 on [0,1]", nonneg, w_nonneg);
        add("r increasing on (0,1)", mono, w_mono);
    }

    // r(0) < omega/f(0) < r(1).
    {
        double f0 = spec.f_at(0.0);
        bool ok = false;
        std::string detail;
        if (f0 > 0.0) {
            double thr = spec.omega / f0;
            ok = spec.r_at(0.0) < thr && thr < spec.r_at(1.0);
            detail = "r(0) = " + num::fmt17(spec.r_at(0.0)) + ", omega/f(0) = " + num::fmt17(thr) +
                     ", r(1) = " + num::fmt17(spec.r_at(1.0));
        } else {
            detail = "f(0) <= 0";
        }
        add("r(0) < omega/f(0) < r(1)", ok, detail);
    }

    // Weak stability of v_b for u = 0: psi(0, v) >= 0 below v_b, <= 0 above.
    {
        bool ok = true;
        std::string witness;
        for (int i = 1; i < n && ok; ++i) {
            double v = static_cast<double>(i) / n;
            double p = spec.psi_at(0.0, v, 0.0);
            if (v < spec.v_b && p < -kMonoTol) {
                ok = false;
                witness = "psi(0, " + num::fmt17(v) + ") = " + num::fmt17(p) + " < 0";
            }
            if (v > spec.v_b && p > kMonoTol) {
                ok = false;
                witness = "psi(0, " + num::fmt17(v) + ") = " + num::fmt17(p) + " > 0";
            }
        }
        add("psi(0,.) weakly stabilizes v_b", ok, witness);
    }

    // Saturation: psi(u, 0) >= 0 and psi(u, 1) <= 0 on the sampled u-range.
    {
        bool ok = true;
        std::string witness;
        for (int i = 0; i <= n && ok; ++i) {
            double u = sampling.u_max * i / n;
            double p0 = spec.psi_at(u, 0.0, 0.0);
            double p1 = spec.psi_at(u, 1.0, 0.0);
            if (p0 < -kMonoTol) {
                ok = false;
                witness = "psi" + point(u, 0.0) + " = " + num::fmt17(p0);
            } else if (p1 > kMonoTol) {
                ok = false;
                witness = "psi" + point(u, 1.0) + " = " + num::fmt17(p1);
            }
        }
        add("psi saturates at v = 0 and v = 1", ok, witness);
    }

    // Inhibiting flag: psi < 0 strictly at every interior sample.
    {
        bool neg = true;
        for (int i = 1; i <= n && neg; ++i) {
            double u = sampling.u_max * i / n;
            for (int j = 1; j < n && neg; ++j) {
                double v = static_cast<double>(j) / n;
                if (spec.psi_at(u, v, 0.0) >= 0.0) neg = false;
            }
        }
        rep.tension_inhibiting = neg ? Flag::Yes : Flag::No;
    }

    // Enhancing flag: needs a saturation level M with f(M) <= 0, then psi > 0
    // strictly on (0, M) x (0, 1).
    {
        double M = num::doubling_search([&](double m) { return spec.f_at(m) <= 0.0; }, 1.0, 1e6);
        if (std::isnan(M)) {
            rep.tension_enhancing = Flag::Unknown;
        } else {
            bool pos = true;
            for (int i = 1; i < n && pos; ++i) {
                double u = M * i / n;
                for (int j = 1; j < n && pos; ++j) {
                    double v = static_cast<double>(j) / n;
                    if (spec.psi_at(u, v, 0.0) <= 0.0) pos = false;
                }
            }
            rep.tension_enhancing = pos ? Flag::Yes : Flag::No;
            rep.enhancing_saturation = M;
        }
    }

    return rep;
}

double v_star(const ModelSpec& spec) {
    double f0 = spec.f_at(0.0);
    if (f0 <= 0.0) throw BracketError("v_star: f(0) <= 0");
    double thr = spec.omega / f0;
    if (spec.r_at(0.0) - thr >= 0.0 || spec.r_at(1.0) - thr <= 0.0)
        throw BracketError("v_star: r - omega/f(0) does not change sign on [0,1]");
    return num::bisect([&](double v) { return spec.r_at(v) - thr; }, 0.0, 1.0, 1e-10, "v_star");
}

double u_star(const ModelSpec& spec, double v) {
    double rv = spec.r_at(v);
    double f0 = spec.f_at(0.0);
    if (rv <= 0.0 || rv * f0 <= spec.omega)
        throw NoPositiveRoot("u_star: r(v) f(0) <= omega at v = " + num::fmt17(v));
    double target = spec.omega / rv; // f(u_star) = omega/r(v), with f(0) > target
    double hi = num::doubling_search([&](double m) { return spec.f_at(m) <= target; }, 1.0, 1e6);
    if (std::isnan(hi))
        throw NoPositiveRoot("u_star: f never reaches omega/r(v) below the doubling cap");
    return num::bisect([&](double u) { return spec.f_at(u) - target; }, 0.0, hi, 1e-10, "u_star");
}

double linear_growth(const ModelSpec& spec) {
    double kb = spec.r_at(spec.v_b) * spec.f_at(0.0) - spec.omega;
    // Cross-check: sign(K_b) must agree with sign(v_b - v_star) whenever both
    // are clearly away from zero.
    try {
        double vs = v_star(spec);
        if (std::abs(kb) > 1e-10 && (kb > 0.0) != (spec.v_b > vs))
            throw PreconditionViolated("linear_growth: sign(K_b) disagrees with sign(v_b - v_star)");
    } catch (const BracketError&) {
        // v_star not computable; skip the cross-check.
    }
    return kb;
}

SpeedBracket wave_speeds(const ModelSpec& spec) {
    SpeedBracket out;
    double f0 = spec.f_at(0.0);
    double k1 = spec.r_at(1.0) * f0 - spec.omega;
    if (k1 <= 0.0)
        throw PreconditionViolated("wave_speeds: r(1) f(0) <= omega; no spreading speed exists");
    out.c_1 = 2.0 * std::sqrt(spec.d1 * k1);
    double vs = v_star(spec);
    if (spec.v_b > vs) {
        double kb = spec.r_at(spec.v_b) * f0 - spec.omega;
        if (kb > 0.0) {
            out.c_b = 2.0 * std::sqrt(spec.d1 * kb);
            if (*out.c_b >= out.c_1)
                throw PreconditionViolated("wave_speeds: c_b >= c_1 (r not increasing up to 1?)");
        }
    }
    return out;
}

double c_gamma(const ModelSpec& spec) {
    SpeedBracket br = wave_speeds(spec);
    if (!br.c_b)
        throw SubcriticalTension("c_gamma: v_b <= v_star, no wave-speed bracket");
    const double cb2 = *br.c_b * *br.c_b;
    const double c12 = br.c_1 * br.c_1;
    auto gamma = [&](double c) {
        double a = std::sqrt(std::max(c * c - cb2, 0.0));
        double b = std::sqrt(std::max(c * c - c12, 0.0));
        return (a - b) / (2.0 * c);
    };
    if (spec.d2 * gamma(br.c_1) <= spec.d1) return br.c_1;
    // gamma decreases to 0, so d2 gamma(c) - d1 has a unique root right of c_1.
    double hi = num::doubling_search(
        [&](double c) { return spec.d2 * gamma(c) < spec.d1; }, 2.0 * br.c_1, 1e12);
    if (std::isnan(hi)) throw BracketError("c_gamma: no upper bracket below the doubling cap");
    return num::bisect([&](double c) { return spec.d2 * gamma(c) - spec.d1; }, br.c_1, hi, 1e-10,
                       "c_gamma");
}

double q_final_tension(const CompiledExpr& g_expr, const ModelSpec& spec) {
    if (spec.d2 != 0.0)
        throw PreconditionViolated("q_final_tension: requires d2 = 0");
    if (g_expr.free_vars() & ~kVarV)
        throw PreconditionViolated("q_final_tension: G must depend on v only");
    const int n = 256;
    for (int i = 0; i <= n; ++i) {
        double u = 2.0 * i / n;
        if (std::abs(spec.f_at(u) - 1.0) > 1e-12)
            throw PreconditionViolated("q_final_tension: requires f == 1 (failed at u = " +
                                       num::fmt17(u) + ")");
    }
    auto G = [&](double v) { return g_expr.eval_uvxt(0.0, v, 0.0, 0.0); };
    for (int i = 1; i < n; ++i) {
        double v = static_cast<double>(i) / n;
        if (G(v) >= 0.0)
            throw PreconditionViolated("q_final_tension: requires G < 0 on (0,1) (failed at v = " +
                                       num::fmt17(v) + ")");
    }
    double vs = v_star(spec);
    if (spec.v_b <= vs)
        throw PreconditionViolated("q_final_tension: requires v_b > v_star");

    // Q anchored at v_star; only Q-differences matter and the anchor keeps the
    // quadrature away from the singularity of G at 0.
    auto integrand = [&](double s) { return (spec.omega - spec.r_at(s)) / G(s); };
    auto Q = [&](double w) { return num::adaptive_simpson(integrand, vs, w, 1e-10); };

    const double target = Q(spec.v_b); // > 0: increasing branch right of v_star
    // Decreasing branch: find lo with Q(lo) > target by halving from v_star.
    double lo = 0.5 * vs;
    int guard = 0;
    while (Q(lo) <= target) {
        lo *= 0.5;
        if (++guard > 200)
            throw BracketError("q_final_tension: no root in (0, v_star]");
    }
    return num::bisect([&](double w) { return Q(w) - target; }, lo, vs, 1e-8, "q_final_tension");
}

} // namespace unrest
