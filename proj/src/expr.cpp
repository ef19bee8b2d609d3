#include "unrest/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "unrest/errors.hpp"
#include "unrest/numerics.hpp"

namespace unrest {

VarMask var_mask(std::string_view names) {
    VarMask m = 0;
    for (char c : names) {
        switch (c) {
        case 'u': m |= kVarU; break;
        case 'v': m |= kVarV; break;
        case 'x': m |= kVarX; break;
        case 't': m |= kVarT; break;
        default: throw UnboundVariable(std::string(1, c));
        }
    }
    return m;
}

int fn_arity(Fn f) { return (f == Fn::Min || f == Fn::Max) ? 2 : 1; }

const char* fn_name(Fn f) {
    switch (f) {
    case Fn::Pos: return "pos";
    case Fn::Step: return "step";
    case Fn::Exp: return "exp";
    case Fn::Ln: return "ln";
    case Fn::Sqrt: return "sqrt";
    case Fn::Abs: return "abs";
    case Fn::Sin: return "sin";
    case Fn::Cos: return "cos";
    case Fn::Min: return "min";
    case Fn::Max: return "max";
    }
    return "?";
}

namespace {

int var_slot_of(std::string_view name) {
    if (name.size() != 1) return -1;
    switch (name[0]) {
    case 'u': return 0;
    case 'v': return 1;
    case 'x': return 2;
    case 't': return 3;
    default: return -1;
    }
}

bool lookup_fn(std::string_view name, Fn& out) {
    static constexpr std::pair<const char*, Fn> table[] = {
        {"pos", Fn::Pos}, {"step", Fn::Step}, {"exp", Fn::Exp}, {"ln", Fn::Ln},
        {"sqrt", Fn::Sqrt}, {"abs", Fn::Abs}, {"sin", Fn::Sin}, {"cos", Fn::Cos},
        {"min", Fn::Min}, {"max", Fn::Max},
    };
    for (auto& [n, f] : table)
        if (name == n) {
            out = f;
            return true;
        }
    return false;
}

// --- lexer -----------------------------------------------------------------

enum class Tok : std::uint8_t { Num, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };

const char* tok_name(Tok t) {
    switch (t) {
    case Tok::Num: return "number";
    case Tok::Ident: return "name";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Caret: return "'^'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Comma: return "','";
    case Tok::End: return "end of input";
    }
    return "?";
}

struct Token {
    Tok kind;
    int column; // 1-based
    double number = 0.0;
    std::string text;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) { advance(); }

    const Token& peek() const { return cur_; }

    Token take() {
        Token t = cur_;
        advance();
        return t;
    }

private:
    std::string_view src_;
    std::size_t pos_ = 0;
    Token cur_{};

    void advance() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        cur_.column = static_cast<int>(pos_) + 1;
        cur_.text.clear();
        if (pos_ >= src_.size()) {
            cur_.kind = Tok::End;
            return;
        }
        char c = src_[pos_];
        switch (c) {
        case '+': cur_.kind = Tok::Plus; ++pos_; return;
        case '-': cur_.kind = Tok::Minus; ++pos_; return;
        case '*': cur_.kind = Tok::Star; ++pos_; return;
        case '/': cur_.kind = Tok::Slash; ++pos_; return;
        case '^': cur_.kind = Tok::Caret; ++pos_; return;
        case '(': cur_.kind = Tok::LParen; ++pos_; return;
        case ')': cur_.kind = Tok::RParen; ++pos_; return;
        case ',': cur_.kind = Tok::Comma; ++pos_; return;
        default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            lex_number();
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            cur_.kind = Tok::Ident;
            cur_.text.assign(src_.substr(start, pos_ - start));
            return;
        }
        throw SyntaxError(std::string("unexpected character '") + c + "'", cur_.column);
    }

    // Decimal with optional fraction and exponent; no hex.
    void lex_number() {
        std::size_t start = pos_;
        bool digits = false;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
            ++pos_;
            digits = true;
        }
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                ++pos_;
                digits = true;
            }
        }
        if (!digits) throw SyntaxError("malformed number", cur_.column, "number");
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t mark = pos_;
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    ++pos_;
            } else {
                pos_ = mark; // "2e" etc: the 'e' is not part of the number
            }
        }
        std::string text(src_.substr(start, pos_ - start));
        cur_.kind = Tok::Num;
        cur_.number = std::strtod(text.c_str(), nullptr);
    }
};

// --- parser ------------------------------------------------------------------

ExprPtr make_num(double k) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Number;
    n->number = k;
    return n;
}

ExprPtr make_bin(BinOp op, ExprPtr a, ExprPtr b) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Bin;
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

ExprPtr make_neg(ExprPtr a) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Neg;
    n->a = std::move(a);
    return n;
}

ExprPtr make_call(Fn f, ExprPtr a, ExprPtr b) {
    auto n = std::make_shared<ExprNode>();
    n->kind = ExprNode::Kind::Call;
    n->fn = f;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

class Parser {
public:
    explicit Parser(std::string_view src) : lex_(src) {}

    ExprPtr parse() {
        ExprPtr e = expr();
        const Token& t = lex_.peek();
        if (t.kind != Tok::End)
            throw SyntaxError(std::string("unexpected ") + tok_name(t.kind), t.column,
                              "end of input");
        return e;
    }

private:
    Lexer lex_;

    ExprPtr expr() {
        ExprPtr lhs = term();
        for (;;) {
            Tok k = lex_.peek().kind;
            if (k != Tok::Plus && k != Tok::Minus) return lhs;
            lex_.take();
            lhs = make_bin(k == Tok::Plus ? BinOp::Add : BinOp::Sub, lhs, term());
        }
    }

    ExprPtr term() {
        ExprPtr lhs = unary();
        for (;;) {
            Tok k = lex_.peek().kind;
            if (k != Tok::Star && k != Tok::Slash) return lhs;
            lex_.take();
            lhs = make_bin(k == Tok::Star ? BinOp::Mul : BinOp::Div, lhs, unary());
        }
    }

    ExprPtr unary() {
        if (lex_.peek().kind == Tok::Minus) {
            lex_.take();
            return make_neg(unary());
        }
        return power();
    }

    ExprPtr power() {
        ExprPtr base = atom();
        if (lex_.peek().kind == Tok::Caret) {
            lex_.take();
            return make_bin(BinOp::Pow, base, unary()); // right-assoc; exponent may be signed
        }
        return base;
    }

    ExprPtr atom() {
        Token t = lex_.take();
        switch (t.kind) {
        case Tok::Num:
            return make_num(t.number);
        case Tok::LParen: {
            ExprPtr e = expr();
            expect(Tok::RParen);
            return e;
        }
        case Tok::Ident: {
            if (lex_.peek().kind == Tok::LParen) return call(t);
            int slot = var_slot_of(t.text);
            auto n = std::make_shared<ExprNode>();
            if (slot >= 0) {
                n->kind = ExprNode::Kind::Var;
                n->var_slot = slot;
            } else {
                n->kind = ExprNode::Kind::ConstRef;
                n->name = t.text;
            }
            return n;
        }
        default:
            throw SyntaxError(std::string("unexpected ") + tok_name(t.kind), t.column,
                              "number, name or '('");
        }
    }

    ExprPtr call(const Token& name) {
        Fn f;
        if (!lookup_fn(name.text, f)) throw UnknownFunction(name.text, name.column);
        expect(Tok::LParen);
        ExprPtr a = expr();
        ExprPtr b;
        if (fn_arity(f) == 2) {
            expect(Tok::Comma);
            b = expr();
        }
        expect(Tok::RParen);
        return make_call(f, std::move(a), std::move(b));
    }

    void expect(Tok k) {
        const Token& t = lex_.peek();
        if (t.kind != k)
            throw SyntaxError(std::string("unexpected ") + tok_name(t.kind), t.column, tok_name(k));
        lex_.take();
    }
};

// --- printer -----------------------------------------------------------------

// Precedence levels for parenthesization; mirrors the grammar.
int prec_of(const ExprNode& n) {
    switch (n.kind) {
    case ExprNode::Kind::Bin:
        switch (n.op) {
        case BinOp::Add:
        case BinOp::Sub: return 1;
        case BinOp::Mul:
        case BinOp::Div: return 2;
        case BinOp::Pow: return 4;
        }
        return 1;
    case ExprNode::Kind::Neg: return 3;
    case ExprNode::Kind::Number:
        // A negative literal re-parses as a unary minus; print it at that level.
        return n.number < 0.0 ? 3 : 5;
    default: return 5;
    }
}

void print_rec(const ExprPtr& n, std::string& out, int parent_prec, bool right_side) {
    int p = prec_of(*n);
    bool parens = p < parent_prec ||
                  (p == parent_prec && right_side && n->kind == ExprNode::Kind::Bin &&
                   n->op != BinOp::Pow);
    if (parens) out += '(';
    switch (n->kind) {
    case ExprNode::Kind::Number:
        out += num::fmt17(n->number);
        break;
    case ExprNode::Kind::Var:
        out += kVarNames[n->var_slot];
        break;
    case ExprNode::Kind::ConstRef:
        out += n->name;
        break;
    case ExprNode::Kind::Neg:
        out += '-';
        print_rec(n->a, out, 3, true);
        break;
    case ExprNode::Kind::Bin: {
        const char* sym = "";
        switch (n->op) {
        case BinOp::Add: sym = " + "; break;
        case BinOp::Sub: sym = " - "; break;
        case BinOp::Mul: sym = "*"; break;
        case BinOp::Div: sym = "/"; break;
        case BinOp::Pow: sym = "^"; break;
        }
        if (n->op == BinOp::Pow) {
            // Left operand of ^ must bind tighter than ^ itself.
            print_rec(n->a, out, 5, false);
            out += sym;
            print_rec(n->b, out, 3, true); // exponent admits unary minus
        } else {
            print_rec(n->a, out, p, false);
            out += sym;
            print_rec(n->b, out, p, true);
        }
        break;
    }
    case ExprNode::Kind::Call:
        out += fn_name(n->fn);
        out += '(';
        print_rec(n->a, out, 0, false);
        if (n->b) {
            out += ", ";
            print_rec(n->b, out, 0, false);
        }
        out += ')';
        break;
    }
    if (parens) out += ')';
}

// --- evaluation helpers ---------------------------------------------------------

double apply_fn(Fn f, double a, double b) {
    switch (f) {
    case Fn::Pos: return a > 0.0 ? a : 0.0;
    case Fn::Step: return a > 0.0 ? 1.0 : 0.0; // step(0) = 0: gap intervals open at the left edge
    case Fn::Exp: return std::exp(a);
    case Fn::Ln:
        if (a <= 0.0) throw EvalDomainError("ln of non-positive value " + num::fmt17(a));
        return std::log(a);
    case Fn::Sqrt:
        if (a < 0.0) throw EvalDomainError("sqrt of negative value " + num::fmt17(a));
        return std::sqrt(a);
    case Fn::Abs: return std::abs(a);
    case Fn::Sin: return std::sin(a);
    case Fn::Cos: return std::cos(a);
    case Fn::Min: return std::fmin(a, b);
    case Fn::Max: return std::fmax(a, b);
    }
    return 0.0;
}

double apply_bin(BinOp op, double a, double b) {
    switch (op) {
    case BinOp::Add: return a + b;
    case BinOp::Sub: return a - b;
    case BinOp::Mul: return a * b;
    case BinOp::Div:
        if (b == 0.0) throw EvalDomainError("division by zero");
        return a / b;
    case BinOp::Pow: {
        double r = std::pow(a, b);
        if (std::isnan(r) && !std::isnan(a) && !std::isnan(b))
            throw EvalDomainError("pow domain error: " + num::fmt17(a) + "^" + num::fmt17(b));
        return r;
    }
    }
    return 0.0;
}

} // namespace

ExprPtr parse_expr(std::string_view source) {
    if (source.empty()) throw SyntaxError("empty expression", 1, "expression");
    return Parser(source).parse();
}

std::string print_expr(const ExprPtr& ast) {
    std::string out;
    print_rec(ast, out, 0, false);
    return out;
}

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
    if (a == b) return true;
    if (!a || !b || a->kind != b->kind) return false;
    switch (a->kind) {
    case ExprNode::Kind::Number: return a->number == b->number;
    case ExprNode::Kind::Var: return a->var_slot == b->var_slot;
    case ExprNode::Kind::ConstRef: return a->name == b->name;
    case ExprNode::Kind::Neg: return expr_equal(a->a, b->a);
    case ExprNode::Kind::Bin:
        return a->op == b->op && expr_equal(a->a, b->a) && expr_equal(a->b, b->b);
    case ExprNode::Kind::Call:
        if (a->fn != b->fn || !expr_equal(a->a, b->a)) return false;
        return (a->b == nullptr) == (b->b == nullptr) && (!a->b || expr_equal(a->b, b->b));
    }
    return false;
}

// --- compilation ------------------------------------------------------------------

namespace {

// Substitute constants, reject disallowed variables, fold constant subtrees.
// A constant subtree whose evaluation raises a domain error is left unfolded
// so the error surfaces at eval time with run context.
ExprPtr fold(const ExprPtr& n, VarMask allowed, const std::map<std::string, double>& constants) {
    switch (n->kind) {
    case ExprNode::Kind::Number:
        return n;
    case ExprNode::Kind::Var: {
        VarMask bit = VarMask(1u << n->var_slot);
        if (!(allowed & bit)) throw UnboundVariable(kVarNames[n->var_slot]);
        return n;
    }
    case ExprNode::Kind::ConstRef: {
        auto it = constants.find(n->name);
        if (it == constants.end()) throw UnboundConstant(n->name);
        return make_num(it->second);
    }
    case ExprNode::Kind::Neg: {
        ExprPtr a = fold(n->a, allowed, constants);
        if (a->kind == ExprNode::Kind::Number) return make_num(-a->number);
        return a == n->a ? n : make_neg(a);
    }
    case ExprNode::Kind::Bin: {
        ExprPtr a = fold(n->a, allowed, constants);
        ExprPtr b = fold(n->b, allowed, constants);
        if (a->kind == ExprNode::Kind::Number && b->kind == ExprNode::Kind::Number) {
            try {
                return make_num(apply_bin(n->op, a->number, b->number));
            } catch (const EvalDomainError&) {
            }
        }
        return (a == n->a && b == n->b) ? n : make_bin(n->op, a, b);
    }
    case ExprNode::Kind::Call: {
        ExprPtr a = fold(n->a, allowed, constants);
        ExprPtr b = n->b ? fold(n->b, allowed, constants) : nullptr;
        if (a->kind == ExprNode::Kind::Number &&
            (!b || b->kind == ExprNode::Kind::Number)) {
            try {
                return make_num(apply_fn(n->fn, a->number, b ? b->number : 0.0));
            } catch (const EvalDomainError&) {
            }
        }
        return (a == n->a && b == n->b) ? n : make_call(n->fn, a, b);
    }
    }
    return n;
}

VarMask collect_vars(const ExprPtr& n) {
    switch (n->kind) {
    case ExprNode::Kind::Var: return VarMask(1u << n->var_slot);
    case ExprNode::Kind::Neg: return collect_vars(n->a);
    case ExprNode::Kind::Bin: return VarMask(collect_vars(n->a) | collect_vars(n->b));
    case ExprNode::Kind::Call:
        return VarMask(collect_vars(n->a) | (n->b ? collect_vars(n->b) : 0));
    default: return 0;
    }
}

} // namespace

CompiledExpr::CompiledExpr() {
    prog_.push_back({Instr::Op::PushNum, 0.0, 0});
    folded_ = make_num(0.0);
    source_ = "0";
}

CompiledExpr CompiledExpr::compile(const ExprPtr& ast, VarMask allowed,
                                   const std::map<std::string, double>& constants) {
    CompiledExpr c;
    c.prog_.clear();
    c.folded_ = fold(ast, allowed, constants);
    c.free_ = collect_vars(c.folded_);
    c.source_ = print_expr(c.folded_);

    // Postfix emission; stack depth is bounded at eval time by kEvalStack.
    struct Emitter {
        std::vector<Instr>& prog;
        void walk(const ExprPtr& n) {
            switch (n->kind) {
            case ExprNode::Kind::Number:
                prog.push_back({Instr::Op::PushNum, n->number, 0});
                break;
            case ExprNode::Kind::Var:
                prog.push_back({Instr::Op::PushVar, 0.0, n->var_slot});
                break;
            case ExprNode::Kind::ConstRef:
                throw UnboundConstant(n->name); // unreachable after fold
            case ExprNode::Kind::Neg:
                walk(n->a);
                prog.push_back({Instr::Op::Neg, 0.0, 0});
                break;
            case ExprNode::Kind::Bin: {
                walk(n->a);
                walk(n->b);
                Instr::Op op;
                switch (n->op) {
                case BinOp::Add: op = Instr::Op::Add; break;
                case BinOp::Sub: op = Instr::Op::Sub; break;
                case BinOp::Mul: op = Instr::Op::Mul; break;
                case BinOp::Div: op = Instr::Op::Div; break;
                case BinOp::Pow: op = Instr::Op::Pow; break;
                default: op = Instr::Op::Add; break;
                }
                prog.push_back({op, 0.0, 0});
                break;
            }
            case ExprNode::Kind::Call: {
                walk(n->a);
                if (n->b) walk(n->b);
                Instr::Op op;
                switch (n->fn) {
                case Fn::Pos: op = Instr::Op::Pos; break;
                case Fn::Step: op = Instr::Op::Step; break;
                case Fn::Exp: op = Instr::Op::Exp; break;
                case Fn::Ln: op = Instr::Op::Ln; break;
                case Fn::Sqrt: op = Instr::Op::Sqrt; break;
                case Fn::Abs: op = Instr::Op::Abs; break;
                case Fn::Sin: op = Instr::Op::Sin; break;
                case Fn::Cos: op = Instr::Op::Cos; break;
                case Fn::Min: op = Instr::Op::Min; break;
                case Fn::Max: op = Instr::Op::Max; break;
                default: op = Instr::Op::Pos; break;
                }
                prog.push_back({op, 0.0, 0});
                break;
            }
            }
        }
    } em{c.prog_};
    em.walk(c.folded_);

    // Reject pathologically deep trees up front rather than at eval time.
    int depth = 0, max_depth = 0;
    for (const Instr& in : c.prog_) {
        switch (in.op) {
        case Instr::Op::PushNum:
        case Instr::Op::PushVar: ++depth; break;
        case Instr::Op::Add: case Instr::Op::Sub: case Instr::Op::Mul:
        case Instr::Op::Div: case Instr::Op::Pow: case Instr::Op::Min:
        case Instr::Op::Max: --depth; break;
        default: break; // unary: depth unchanged
        }
        if (depth > max_depth) max_depth = depth;
    }
    if (max_depth > 256) throw SyntaxError("expression nests too deeply", 1);
    return c;
}

double CompiledExpr::run(const double* vals) const {
    double st[256];
    int sp = 0;
    for (const Instr& in : prog_) {
        switch (in.op) {
        case Instr::Op::PushNum: st[sp++] = in.k; break;
        case Instr::Op::PushVar: st[sp++] = vals[in.slot]; break;
        case Instr::Op::Neg: st[sp - 1] = -st[sp - 1]; break;
        case Instr::Op::Add: --sp; st[sp - 1] += st[sp]; break;
        case Instr::Op::Sub: --sp; st[sp - 1] -= st[sp]; break;
        case Instr::Op::Mul: --sp; st[sp - 1] *= st[sp]; break;
        case Instr::Op::Div:
            --sp;
            st[sp - 1] = apply_bin(BinOp::Div, st[sp - 1], st[sp]);
            break;
        case Instr::Op::Pow:
            --sp;
            st[sp - 1] = apply_bin(BinOp::Pow, st[sp - 1], st[sp]);
            break;
        case Instr::Op::Pos: st[sp - 1] = st[sp - 1] > 0.0 ? st[sp - 1] : 0.0; break;
        case Instr::Op::Step: st[sp - 1] = st[sp - 1] > 0.0 ? 1.0 : 0.0; break;
        case Instr::Op::Exp: st[sp - 1] = std::exp(st[sp - 1]); break;
        case Instr::Op::Ln: st[sp - 1] = apply_fn(Fn::Ln, st[sp - 1], 0.0); break;
        case Instr::Op::Sqrt: st[sp - 1] = apply_fn(Fn::Sqrt, st[sp - 1], 0.0); break;
        case Instr::Op::Abs: st[sp - 1] = std::abs(st[sp - 1]); break;
        case Instr::Op::Sin: st[sp - 1] = std::sin(st[sp - 1]); break;
        case Instr::Op::Cos: st[sp - 1] = std::cos(st[sp - 1]); break;
        case Instr::Op::Min: --sp; st[sp - 1] = std::fmin(st[sp - 1], st[sp]); break;
        case Instr::Op::Max: --sp; st[sp - 1] = std::fmax(st[sp - 1], st[sp]); break;
        }
    }
    return st[0];
}

double CompiledExpr::eval(const Bindings& b) const {
    if ((b.bound & free_) != free_)
        throw PreconditionViolated("eval: bindings do not cover the expression's free variables");
    return run(b.values);
}

double CompiledExpr::eval_uvxt(double u, double v, double x, double t) const {
    const double vals[kVarCount] = {u, v, x, t};
    return run(vals);
}

CompiledExpr compile_expr(std::string_view source, std::string_view allowed_vars,
                          const std::map<std::string, double>& constants) {
    return CompiledExpr::compile(parse_expr(source), var_mask(allowed_vars), constants);
}

} // namespace unrest
