#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace unrest {

// Variable slots, fixed across the whole toolkit: u=0, v=1, x=2, t=3.
inline constexpr int kVarCount = 4;
inline constexpr const char* kVarNames[kVarCount] = {"u", "v", "x", "t"};

using VarMask = std::uint8_t;
inline constexpr VarMask kVarU = 1u << 0;
inline constexpr VarMask kVarV = 1u << 1;
inline constexpr VarMask kVarX = 1u << 2;
inline constexpr VarMask kVarT = 1u << 3;

// Parses "uv", "x", ... into a mask. Throws UnboundVariable on anything else.
VarMask var_mask(std::string_view names);

enum class BinOp : std::uint8_t { Add, Sub, Mul, Div, Pow };
enum class Fn : std::uint8_t { Pos, Step, Exp, Ln, Sqrt, Abs, Sin, Cos, Min, Max };

int fn_arity(Fn f);
const char* fn_name(Fn f);

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

// Immutable AST node. Grammar (EBNF, also in the README):
//   expr   = term, { ("+" | "-"), term } ;
//   term   = unary, { ("*" | "/"), unary } ;
//   unary  = "-", unary | power ;
//   power  = atom, [ "^", unary ] ;               (right-associative)
//   atom   = number | name | name, "(", expr, { ",", expr }, ")" | "(", expr, ")" ;
// Precedence: ^ above unary minus above * / above + -, so -2^2 = -(2^2).
struct ExprNode {
    enum class Kind : std::uint8_t { Number, Var, ConstRef, Neg, Bin, Call } kind;
    double number = 0.0;   // Kind::Number
    int var_slot = -1;     // Kind::Var
    std::string name;      // Kind::ConstRef
    BinOp op = BinOp::Add; // Kind::Bin
    Fn fn = Fn::Pos;       // Kind::Call
    ExprPtr a, b;          // operands (b unused for Neg and unary calls)
};

ExprPtr parse_expr(std::string_view source);

// Minimal-parenthesis form; parse(print_expr(ast)) is structurally equal to ast.
std::string print_expr(const ExprPtr& ast);

bool expr_equal(const ExprPtr& a, const ExprPtr& b);

// Bindings for evaluation: values[slot] is read only when the slot bit is set
// in the mask handed to eval.
struct Bindings {
    double values[kVarCount] = {0, 0, 0, 0};
    VarMask bound = 0;
    Bindings& set(int slot, double value) {
        values[slot] = value;
        bound = VarMask(bound | (1u << slot));
        return *this;
    }
};

// A validated expression compiled to a flat postfix program. Constants are
// substituted (and constant subtrees folded) at compile time, so evaluation
// is allocation-free, pure, and safe to run from many threads at once.
class CompiledExpr {
public:
    CompiledExpr(); // the constant 0

    static CompiledExpr compile(const ExprPtr& ast, VarMask allowed_vars,
                                const std::map<std::string, double>& constants);

    double eval(const Bindings& b) const;

    // Unchecked fast path for the solver loops: every slot must be supplied.
    double eval_uvxt(double u, double v, double x, double t) const;

    VarMask free_vars() const noexcept { return free_; }
    bool is_constant() const noexcept { return free_ == 0; }
    const ExprPtr& ast() const noexcept { return folded_; }
    const std::string& source() const noexcept { return source_; } // printed folded form

private:
    struct Instr {
        enum class Op : std::uint8_t {
            PushNum, PushVar, Neg, Add, Sub, Mul, Div, Pow,
            Pos, Step, Exp, Ln, Sqrt, Abs, Sin, Cos, Min, Max,
        } op;
        double k = 0.0;
        int slot = 0;
    };

    std::vector<Instr> prog_;
    ExprPtr folded_;
    std::string source_;
    VarMask free_ = 0;

    double run(const double* vals) const;
};

// Convenience: parse + compile in one call.
CompiledExpr compile_expr(std::string_view source, std::string_view allowed_vars,
                          const std::map<std::string, double>& constants = {});

} // namespace unrest
