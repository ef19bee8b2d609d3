#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>

#include "unrest/errors.hpp"
#include "unrest/expr.hpp"

using namespace unrest;

namespace {

double ev(std::string_view src, double u = 0, double v = 0, double x = 0, double t = 0) {
    return compile_expr(src, "uvxt").eval_uvxt(u, v, x, t);
}

} // namespace

TEST_CASE("precedence and associativity") {
    CHECK(ev("2+3*4") == 14.0);
    CHECK(ev("2^3^2") == 512.0);  // right-associative
    CHECK(ev("-2^2") == -4.0);    // ^ binds above unary minus
    CHECK(ev("1-2-3") == -4.0);   // left-associative
    CHECK(ev("(1-2)-3") == -4.0);
    CHECK(ev("1-(2-3)") == 2.0);
    CHECK(ev("2^-1") == 0.5);     // unary allowed in the exponent
    CHECK(ev("(-2)^2") == 4.0);
    CHECK(ev("6/3/2") == 1.0);
    CHECK(ev("2*3^2") == 18.0);

    CHECK(expr_equal(parse_expr("1-2-3"), parse_expr("(1-2)-3")));
    CHECK_FALSE(expr_equal(parse_expr("1-2-3"), parse_expr("1-(2-3)")));
    CHECK_FALSE(expr_equal(parse_expr("2^3^2"), parse_expr("(2^3)^2")));
}

TEST_CASE("ast shape of the reaction expression") {
    // u*(v*(1-u)-1/3): mul(u, sub(mul(v, sub(1,u)), div(1,3)))
    ExprPtr ast = parse_expr("u*(v*(1-u)-1/3)");
    REQUIRE(ast->kind == ExprNode::Kind::Bin);
    CHECK(ast->op == BinOp::Mul);
    CHECK(ast->a->kind == ExprNode::Kind::Var);
    const ExprNode& rhs = *ast->b;
    REQUIRE(rhs.kind == ExprNode::Kind::Bin);
    CHECK(rhs.op == BinOp::Sub);
    CHECK(rhs.a->op == BinOp::Mul);
    CHECK(rhs.b->op == BinOp::Div);

    ExprPtr zero = parse_expr("0");
    REQUIRE(zero->kind == ExprNode::Kind::Number);
    CHECK(zero->number == 0.0);
}

TEST_CASE("step and pos conventions") {
    CHECK(ev("step(0)") == 0.0); // one-sided: the indicator of (a, b) is open at a
    CHECK(ev("step(1e-300)") == 1.0);
    CHECK(ev("step(0-1e-300)") == 0.0);
    CHECK(ev("pos(3)") == 3.0);
    CHECK(ev("pos(0)") == 0.0);
    CHECK(ev("pos(0-2)") == 0.0);

    CompiledExpr bump = compile_expr("pos(1-x^2/100)", "x");
    CHECK(bump.eval_uvxt(0, 0, 0.0, 0) == 1.0);
    CHECK(bump.eval_uvxt(0, 0, 20.0, 0) == 0.0);

    // Gap indicator with the length folded in at compile time: open interval.
    CompiledExpr gap =
        compile_expr("step(x-60)*step(60+L-x)", "x", {{"L", 100.0}});
    CHECK(gap.free_vars() == kVarX);
    CHECK(gap.eval_uvxt(0, 0, 60.0, 0) == 0.0);
    CHECK(gap.eval_uvxt(0, 0, 61.0, 0) == 1.0);
    CHECK(gap.eval_uvxt(0, 0, 159.0, 0) == 1.0);
    CHECK(gap.eval_uvxt(0, 0, 160.0, 0) == 0.0);
}

TEST_CASE("evaluation basics") {
    CHECK(ev("u*(5*v*(1-u)-1/2)", 0.0, 0.5) == 0.0); // u = 0 kills the product
    CHECK(ev("-u*v", 0.2, 0.15) == doctest::Approx(-0.03).epsilon(1e-14));
    CHECK(ev("min(u,max(v,x))", 3, 1, 2) == 2.0);
    CHECK(ev("abs(0-3)+sqrt(16)") == 7.0);
    CHECK(ev("exp(0)+ln(1)") == 1.0);
    CHECK(ev("cos(0)-sin(0)") == 1.0);
    CHECK(ev("1e-3*2E2") == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("compile rejects stray variables and unknown constants") {
    CHECK(compile_expr("v", "v").free_vars() == kVarV);
    CHECK_THROWS_AS(compile_expr("u*v", "v"), UnboundVariable);
    CHECK_THROWS_AS(compile_expr("k*u", "u"), UnboundConstant);
    CHECK_THROWS_AS(var_mask("q"), UnboundVariable);
    CHECK(var_mask("uv") == (kVarU | kVarV));
    CHECK(var_mask("") == 0);

    // Unused permissions do not leak into free_vars.
    CHECK(compile_expr("v+1", "uvxt").free_vars() == kVarV);
}

TEST_CASE("constant folding") {
    CompiledExpr six = compile_expr("2*3", "");
    CHECK(six.is_constant());
    CHECK(six.eval(Bindings{}) == 6.0);
    CHECK(six.source() == "6");

    CompiledExpr def;
    CHECK(def.is_constant());
    CHECK(def.eval(Bindings{}) == 0.0);

    // A constant subtree whose folding would raise a domain error is kept
    // unfolded; the error surfaces at evaluation.
    CompiledExpr bad = compile_expr("sqrt(0-1)", "");
    CHECK(bad.is_constant());
    CHECK_THROWS_AS(bad.eval(Bindings{}), EvalDomainError);
    CHECK_THROWS_AS(compile_expr("1/0", "").eval(Bindings{}), EvalDomainError);
}

TEST_CASE("syntax errors carry 1-based columns") {
    try {
        parse_expr("2*)");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(e.column() == 3);
    }
    try {
        parse_expr("1+");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(e.column() == 3);
    }
    CHECK_THROWS_AS(parse_expr(""), SyntaxError);
    CHECK_THROWS_AS(parse_expr("(1+2"), SyntaxError);
    CHECK_THROWS_AS(parse_expr("1 2"), SyntaxError);
    try {
        parse_expr("foo(1)");
        FAIL("expected UnknownFunction");
    } catch (const UnknownFunction& e) {
        CHECK(e.column() == 1);
    }
    // min is binary: wrong arity is a syntax-level failure.
    CHECK_THROWS_AS(parse_expr("min(1)"), SyntaxError);
}

TEST_CASE("eval domain errors") {
    CompiledExpr inv = compile_expr("1/v", "v");
    CHECK_THROWS_AS(inv.eval_uvxt(0, 0.0, 0, 0), EvalDomainError);
    CHECK(inv.eval_uvxt(0, 2.0, 0, 0) == 0.5);

    CompiledExpr lg = compile_expr("ln(v-2)", "v");
    CHECK_THROWS_AS(lg.eval_uvxt(0, 1.0, 0, 0), EvalDomainError);

    CompiledExpr rt = compile_expr("sqrt(v-2)", "v");
    CHECK_THROWS_AS(rt.eval_uvxt(0, 1.0, 0, 0), EvalDomainError);

    // pow follows IEEE semantics (0^-0.5 is +inf, not an error); only a NaN
    // result (negative base, fractional exponent) is a domain error.
    CompiledExpr pw = compile_expr("(0-v)^0.5", "v");
    CHECK_THROWS_AS(pw.eval_uvxt(0, 2.0, 0, 0), EvalDomainError);
    CHECK(compile_expr("v^(0-1)", "v").eval_uvxt(0, 2.0, 0, 0) == 0.5);
}

TEST_CASE("purity and locality") {
    CompiledExpr e = compile_expr("exp(sin(u)+cos(v))*sqrt(x+4)+t^2", "uvxt");
    Bindings b;
    b.set(0, 0.3).set(1, 0.7).set(2, 1.5).set(3, 2.0);
    double first = e.eval(b);
    for (int i = 0; i < 10; ++i) {
        double again = e.eval(b);
        CHECK(std::memcmp(&first, &again, sizeof first) == 0); // bit-identical
    }
    CHECK(e.eval_uvxt(0.3, 0.7, 1.5, 2.0) == first);

    // An x-free expression ignores the x binding entirely.
    CompiledExpr uv = compile_expr("u*v", "uvxt");
    CHECK(uv.eval_uvxt(0.3, 0.7, 1.0, 0) == uv.eval_uvxt(0.3, 0.7, -57.0, 9));
}

TEST_CASE("print round-trip on the expression corpus") {
    const char* corpus[] = {
        "u*(v*(1-u)-1/3)",
        "-2^2",
        "2^3^2",
        "(2^3)^2",
        "(-2)^2",
        "1-2-3",
        "1-(2-3)",
        "u-v-x",
        "u/(v/x)",
        "-(u+v)*x",
        "2^-1",
        "min(u,max(v,x))",
        "step(x-60)*step(160-x)",
        "pos(1-x^2/100)",
        "exp(-abs(x))*cos(t)",
        "sqrt(u+1)+ln(v+2)",
        "-u*v",
        "6*u*v*(1-v)*(v+10*u-2/3)",
        "u*(u-1/4)*v*(1-v)",
    };
    for (const char* s : corpus) {
        CAPTURE(s);
        ExprPtr once = parse_expr(s);
        ExprPtr twice = parse_expr(print_expr(once));
        CHECK(expr_equal(once, twice));
    }
}
