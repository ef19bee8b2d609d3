#pragma once

// Randomized property suites shared by the unit tests and the acceptance
// harness. Every suite draws its cases from a fixed-seed generator, so runs
// are reproducible; a failure message carries the case index and enough of
// the draw to replay it by hand.

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "unrest/analysis.hpp"
#include "unrest/errors.hpp"
#include "unrest/expr.hpp"
#include "unrest/model.hpp"
#include "unrest/pde.hpp"

namespace props {

struct SuiteReport {
    std::string name;
    int cases = 0;
    std::vector<std::string> failures;
    bool ok() const { return failures.empty(); }
};

namespace detail {

inline std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

struct ModelDraw {
    unrest::ModelSpec model;
    double omega = 0.0, a = 0.0, v_b = 0.0;
    int psi_kind = 0; // 0 inhibiting, 1 enhancing, 2 mixed
    std::string describe() const {
        std::ostringstream os;
        os << "d1=" << model.d1 << " d2=" << model.d2 << " omega=" << omega << " a=" << a
           << " v_b=" << v_b << " psi_kind=" << psi_kind;
        return os.str();
    }
};

inline ModelDraw draw_model(std::mt19937& rng, int psi_kind) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    ModelDraw d;
    d.psi_kind = psi_kind;
    d.omega = 0.1 + 0.7 * U(rng);
    d.a = d.omega + 0.1 + (2.5 - d.omega - 0.1) * U(rng);
    d.v_b = 0.08 + 0.84 * U(rng);
    double d1 = 0.3 + 1.7 * U(rng);
    double d2 = 2.0 * U(rng);
    double b = 0.2 + 1.8 * U(rng);
    double c = 0.2 + 0.6 * U(rng);
    const char* psi = psi_kind == 0   ? "-b*u*v"
                      : psi_kind == 1 ? "b*u*v*(1-v)"
                                      : "b*u*v*(1-v)*(v-c)";
    d.model = unrest::make_model(d1, d2, d.omega, d.v_b, "a*v", "1-u", psi, "1",
                                 {{"a", d.a}, {"b", b}, {"c", c}});
    return d;
}

struct BumpDraw {
    double amp = 0.0, width2 = 0.0;
    unrest::CompiledExpr u0;
};

inline BumpDraw draw_bump(std::mt19937& rng) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    BumpDraw b;
    b.amp = 0.1 + 1.7 * U(rng);
    b.width2 = 4.0 + 96.0 * U(rng);
    b.u0 = unrest::compile_expr("A*pos(1-x^2/W)", "x", {{"A", b.amp}, {"W", b.width2}});
    return b;
}

// t_end that keeps the fastest admissible front clear of the 20*dx margin.
inline double safe_t_end(const unrest::ModelSpec& m, double half_width, double start_extent,
                         double cap) {
    double c1 = unrest::wave_speeds(m).c_1;
    double room = half_width - 20.0 - start_extent - 4.0;
    return std::min(cap, room / std::max(c1, 0.5));
}

inline unrest::RunRecord run_case(const unrest::ModelSpec& m, const unrest::CompiledExpr& u0,
                                  double v0, double half_width, double dt, double t_end,
                                  int stride, const unrest::Observer& obs) {
    unrest::GridSpec g{half_width, 1.0};
    unrest::SimParams p;
    p.dt = dt;
    p.t_end = t_end;
    p.series_stride = stride;
    unrest::State s0 = unrest::initial_state(g, u0, unrest::compile_expr(fmt(v0), "x"));
    return unrest::simulate(m, g, p, std::move(s0), obs);
}

} // namespace detail

// Solutions stay finite, u stays nonnegative and v stays inside [0,1], for
// random models drawn across all three feedback shapes; the standing
// assumptions hold for every draw by construction.
inline SuiteReport bounds_suite(int cases = 200) {
    SuiteReport rep{"bounds", cases, {}};
    std::mt19937 rng(0xB0117D5u);
    std::uniform_int_distribution<int> kind(0, 2);
    for (int i = 0; i < cases; ++i) {
        auto d = detail::draw_model(rng, kind(rng));
        auto bump = detail::draw_bump(rng);
        if (i % 25 == 0) {
            auto report = unrest::validate_model(d.model, {64, 2.0});
            if (!report.all_pass())
                rep.failures.push_back("case " + std::to_string(i) + ": draw violates assumptions (" +
                                       d.describe() + ")");
        }
        double bad = -1.0;
        auto obs = [&](const unrest::State& s, const unrest::SeriesSample&) {
            for (std::size_t k = 0; k < s.u.size(); ++k) {
                if (!std::isfinite(s.u[k]) || !std::isfinite(s.v[k]) || s.u[k] < 0.0 ||
                    s.v[k] < 0.0 || s.v[k] > 1.0) {
                    bad = s.t;
                    return false;
                }
            }
            return true;
        };
        try {
            double t_end = detail::safe_t_end(d.model, 60.0, std::sqrt(bump.width2), 15.0);
            detail::run_case(d.model, bump.u0, d.v_b, 60.0, 0.1, t_end, 5, obs);
        } catch (const unrest::Error& e) {
            rep.failures.push_back("case " + std::to_string(i) + ": " + e.what() + " (" +
                                   d.describe() + ")");
            continue;
        }
        if (bad >= 0.0)
            rep.failures.push_back("case " + std::to_string(i) + ": bounds violated at t = " +
                                   detail::fmt(bad) + " (" + d.describe() + ")");
    }
    return rep;
}

// With a tension-consuming psi and v0 == v_b, the tension never rises above
// the base level anywhere.
inline SuiteReport inhibiting_bound_suite(int cases = 200) {
    SuiteReport rep{"inhibiting_bound", cases, {}};
    std::mt19937 rng(0x1A2B3C4Du);
    for (int i = 0; i < cases; ++i) {
        auto d = detail::draw_model(rng, 0);
        auto bump = detail::draw_bump(rng);
        double worst = 0.0;
        auto obs = [&](const unrest::State& s, const unrest::SeriesSample&) {
            for (double v : s.v) worst = std::max(worst, v - d.v_b);
            return true;
        };
        try {
            double t_end = detail::safe_t_end(d.model, 60.0, std::sqrt(bump.width2), 15.0);
            detail::run_case(d.model, bump.u0, d.v_b, 60.0, 0.1, t_end, 5, obs);
        } catch (const unrest::Error& e) {
            rep.failures.push_back("case " + std::to_string(i) + ": " + e.what() + " (" +
                                   d.describe() + ")");
            continue;
        }
        if (worst > 1e-9)
            rep.failures.push_back("case " + std::to_string(i) + ": v exceeded v_b by " +
                                   detail::fmt(worst) + " (" + d.describe() + ")");
    }
    return rep;
}

// Mirror image: with a tension-feeding psi the tension never drops below v_b.
inline SuiteReport enhancing_bound_suite(int cases = 200) {
    SuiteReport rep{"enhancing_bound", cases, {}};
    std::mt19937 rng(0x5E6F7081u);
    for (int i = 0; i < cases; ++i) {
        auto d = detail::draw_model(rng, 1);
        auto bump = detail::draw_bump(rng);
        double worst = 0.0;
        auto obs = [&](const unrest::State& s, const unrest::SeriesSample&) {
            for (double v : s.v) worst = std::max(worst, d.v_b - v);
            return true;
        };
        try {
            double t_end = detail::safe_t_end(d.model, 60.0, std::sqrt(bump.width2), 15.0);
            detail::run_case(d.model, bump.u0, d.v_b, 60.0, 0.1, t_end, 5, obs);
        } catch (const unrest::Error& e) {
            rep.failures.push_back("case " + std::to_string(i) + ": " + e.what() + " (" +
                                   d.describe() + ")");
            continue;
        }
        if (worst > 1e-9)
            rep.failures.push_back("case " + std::to_string(i) + ": v dropped below v_b by " +
                                   detail::fmt(worst) + " (" + d.describe() + ")");
    }
    return rep;
}

// Even initial data on a symmetric grid stays even: the stepper treats the
// two halves identically (same is demanded of the OpenMP kernel).
inline SuiteReport symmetry_suite(int cases = 200) {
    SuiteReport rep{"symmetry", cases, {}};
    std::mt19937 rng(0x9192A3B4u);
    std::uniform_int_distribution<int> kind(0, 2);
    for (int i = 0; i < cases; ++i) {
        auto d = detail::draw_model(rng, kind(rng));
        auto bump = detail::draw_bump(rng);
        unrest::RunRecord run;
        try {
            double t_end = detail::safe_t_end(d.model, 60.0, std::sqrt(bump.width2), 10.0);
            run = detail::run_case(d.model, bump.u0, d.v_b, 60.0, 0.05, t_end, 50, {});
        } catch (const unrest::Error& e) {
            rep.failures.push_back("case " + std::to_string(i) + ": " + e.what() + " (" +
                                   d.describe() + ")");
            continue;
        }
        const unrest::State& fin = run.snapshots.back();
        const std::size_t n = fin.u.size();
        double worst = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            worst = std::max(worst, std::abs(fin.u[k] - fin.u[n - 1 - k]));
            worst = std::max(worst, std::abs(fin.v[k] - fin.v[n - 1 - k]));
        }
        if (worst > 1e-12)
            rep.failures.push_back("case " + std::to_string(i) + ": asymmetry " +
                                   detail::fmt(worst) + " (" + d.describe() + ")");
    }
    return rep;
}

// Halving dt halves the global error: the observed order of the explicit
// stepper against Richardson differences stays near one.
inline SuiteReport refinement_suite(int cases = 200) {
    SuiteReport rep{"dt_refinement", cases, {}};
    std::mt19937 rng(0xC5D6E7F8u);
    for (int i = 0; i < cases; ++i) {
        auto d = detail::draw_model(rng, 0);
        auto bump = detail::draw_bump(rng);
        double t_end = detail::safe_t_end(d.model, 40.0, std::sqrt(bump.width2), 10.0);
        // Snap to a multiple of the coarsest dt so all three runs end at the
        // same instant; otherwise the end-time mismatch dominates the error.
        t_end = std::max(0.1, std::floor(t_end * 10.0) / 10.0);
        auto final_u = [&](double dt) {
            return detail::run_case(d.model, bump.u0, d.v_b, 40.0, dt, t_end, 1000000, {})
                .snapshots.back()
                .u;
        };
        try {
            auto u1 = final_u(0.025), u2 = final_u(0.0125), u3 = final_u(0.00625);
            double e1 = 0.0, e2 = 0.0;
            for (std::size_t k = 0; k < u1.size(); ++k) {
                e1 = std::max(e1, std::abs(u1[k] - u2[k]));
                e2 = std::max(e2, std::abs(u2[k] - u3[k]));
            }
            if (e2 < 1e-12) continue; // already at the noise floor: nothing to measure
            double order = std::log2(e1 / e2);
            if (!(order >= 0.9))
                rep.failures.push_back("case " + std::to_string(i) + ": observed order " +
                                       detail::fmt(order) + " (" + d.describe() + ")");
        } catch (const unrest::Error& e) {
            rep.failures.push_back("case " + std::to_string(i) + ": " + e.what() + " (" +
                                   d.describe() + ")");
        }
    }
    return rep;
}

namespace detail {

inline unrest::ExprPtr mk(unrest::ExprNode n) {
    return std::make_shared<const unrest::ExprNode>(std::move(n));
}

inline unrest::ExprPtr gen_ast(std::mt19937& rng, int depth) {
    using unrest::BinOp;
    using unrest::ExprNode;
    using unrest::Fn;
    std::uniform_real_distribution<double> U(0.0, 1.0);
    static const double numbers[] = {0.0, 1.0, 2.0, 3.0, 10.0, 0.5, 0.25, 1.5, 0.1, 1e-3, 7.0};
    if (depth == 0 || U(rng) < 0.3) {
        ExprNode n;
        if (U(rng) < 0.5) {
            n.kind = ExprNode::Kind::Number;
            n.number = numbers[std::uniform_int_distribution<int>(0, 10)(rng)];
        } else {
            n.kind = ExprNode::Kind::Var;
            n.var_slot = std::uniform_int_distribution<int>(0, 3)(rng);
        }
        return mk(std::move(n));
    }
    double pick = U(rng);
    ExprNode n;
    if (pick < 0.15) {
        n.kind = ExprNode::Kind::Neg;
        n.a = gen_ast(rng, depth - 1);
    } else if (pick < 0.70) {
        n.kind = ExprNode::Kind::Bin;
        n.op = static_cast<BinOp>(std::uniform_int_distribution<int>(0, 4)(rng));
        n.a = gen_ast(rng, depth - 1);
        n.b = gen_ast(rng, depth - 1);
    } else {
        n.kind = ExprNode::Kind::Call;
        n.fn = static_cast<Fn>(std::uniform_int_distribution<int>(0, 9)(rng));
        n.a = gen_ast(rng, depth - 1);
        if (unrest::fn_arity(n.fn) == 2) n.b = gen_ast(rng, depth - 1);
    }
    return mk(std::move(n));
}

} // namespace detail

// print_expr emits a minimal-parenthesis form that parses back to the same
// tree, and the compiled programs of both trees agree pointwise.
inline SuiteReport roundtrip_suite(int cases = 200) {
    SuiteReport rep{"parser_roundtrip", cases, {}};
    std::mt19937 rng(0xF00DFACEu);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::uniform_int_distribution<int> depth(1, 5);
    for (int i = 0; i < cases; ++i) {
        unrest::ExprPtr ast = detail::gen_ast(rng, depth(rng));
        std::string printed = unrest::print_expr(ast);
        unrest::ExprPtr back;
        try {
            back = unrest::parse_expr(printed);
        } catch (const unrest::Error& e) {
            rep.failures.push_back("case " + std::to_string(i) + ": reparse failed on '" + printed +
                                   "': " + e.what());
            continue;
        }
        if (!unrest::expr_equal(back, ast)) {
            rep.failures.push_back("case " + std::to_string(i) + ": tree changed through '" +
                                   printed + "'");
            continue;
        }
        // Pointwise agreement of the two compiled programs, domain errors and all.
        unrest::CompiledExpr ca, cb;
        try {
            ca = unrest::CompiledExpr::compile(ast, 0xF, {});
            cb = unrest::CompiledExpr::compile(back, 0xF, {});
        } catch (const unrest::EvalDomainError&) {
            continue; // constant folding hit a domain edge; structural check already done
        }
        for (int p = 0; p < 5; ++p) {
            double u = 0.1 + 0.8 * U(rng), v = 0.1 + 0.8 * U(rng);
            double x = -3.0 + 6.0 * U(rng), t = 5.0 * U(rng);
            bool ta = false, tb = false;
            double ra = 0.0, rb = 0.0;
            try {
                ra = ca.eval_uvxt(u, v, x, t);
            } catch (const unrest::EvalDomainError&) {
                ta = true;
            }
            try {
                rb = cb.eval_uvxt(u, v, x, t);
            } catch (const unrest::EvalDomainError&) {
                tb = true;
            }
            bool same = ta == tb && (ta || ra == rb || (std::isnan(ra) && std::isnan(rb)));
            if (!same) {
                rep.failures.push_back("case " + std::to_string(i) + ": eval mismatch on '" +
                                       printed + "'");
                break;
            }
        }
    }
    return rep;
}

inline std::vector<SuiteReport> all_suites(int cases = 200) {
    return {bounds_suite(cases),     inhibiting_bound_suite(cases), enhancing_bound_suite(cases),
            symmetry_suite(cases),   refinement_suite(cases),       roundtrip_suite(cases)};
}

} // namespace props
