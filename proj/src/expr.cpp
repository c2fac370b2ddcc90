#include "fissure/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace fissure {

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

NodePtr make(Op op, NodePtr a = {}, NodePtr b = {}, double v = 0.0, Func f = Func::sin) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    n->value = v;
    n->func = f;
    return n;
}

class Parser {
public:
    explicit Parser(std::string_view s) : s_(s) {}

    NodePtr parse() {
        auto e = sum();
        skip();
        if (pos_ != s_.size()) fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
        return e;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("syntax error at byte " + std::to_string(pos_) + ": " + msg, pos_);
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr sum() {
        auto lhs = product();
        for (;;) {
            if (accept('+')) lhs = make(Op::add, lhs, product());
            else if (accept('-')) lhs = make(Op::sub, lhs, product());
            else return lhs;
        }
    }

    NodePtr product() {
        auto lhs = unary();
        for (;;) {
            if (accept('*')) lhs = make(Op::mul, lhs, unary());
            else if (accept('/')) lhs = make(Op::div, lhs, unary());
            else return lhs;
        }
    }

    NodePtr unary() {
        if (accept('-')) return make(Op::neg, unary());
        return power();
    }

    NodePtr power() {
        auto base = primary();
        if (accept('^')) return make(Op::pow, base, unary());
        return base;
    }

    NodePtr primary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            auto e = sum();
            if (!accept(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        fail("unexpected character '" + std::string(1, c) + "'");
    }

    NodePtr number() {
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (pos_ < s_.size() && s_[pos_] == '.') {
            ++pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        }
        if (pos_ - start == 1 && s_[start] == '.') {
            pos_ = start;
            fail("malformed number");
        }
        if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
            std::size_t save = pos_;
            ++pos_;
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
            if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                pos_ = save;
                fail("malformed exponent");
            }
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        }
        std::string tok(s_.substr(start, pos_ - start));
        double v = std::strtod(tok.c_str(), nullptr);
        if (!std::isfinite(v)) {
            pos_ = start;
            fail("number out of range");
        }
        return make(Op::number, {}, {}, v);
    }

    NodePtr identifier() {
        std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        std::string name(s_.substr(start, pos_ - start));
        if (name == "x") return make(Op::var_x);
        if (name == "z") return make(Op::var_z);
        static const struct {
            const char* name;
            Func f;
        } funcs[] = {{"sin", Func::sin}, {"cos", Func::cos}, {"exp", Func::exp}, {"sqrt", Func::sqrt}, {"abs", Func::abs}};
        for (const auto& fn : funcs) {
            if (name == fn.name) {
                if (!accept('(')) fail("expected '(' after " + name);
                auto arg = sum();
                if (!accept(')')) fail("expected ')'");
                return make(Op::call, arg, {}, 0.0, fn.f);
            }
        }
        throw UnknownIdentifier("unknown identifier '" + name + "' at byte " + std::to_string(start), start);
    }
};

int precedence(const ExprNode& n) {
    switch (n.op) {
        case Op::add:
        case Op::sub: return 1;
        case Op::mul:
        case Op::div: return 2;
        case Op::neg: return 3;
        case Op::pow: return 4;
        default: return 5;
    }
}

std::string fmt_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void print_node(const ExprNode& n, std::string& out);

void print_child(const ExprNode& c, bool parens, std::string& out) {
    if (parens) out += '(';
    print_node(c, out);
    if (parens) out += ')';
}

void print_node(const ExprNode& n, std::string& out) {
    int p = precedence(n);
    switch (n.op) {
        case Op::number: out += fmt_number(n.value); return;
        case Op::var_x: out += 'x'; return;
        case Op::var_z: out += 'z'; return;
        case Op::call:
            out += func_name(n.func);
            out += '(';
            print_node(*n.lhs, out);
            out += ')';
            return;
        case Op::neg:
            out += '-';
            print_child(*n.lhs, precedence(*n.lhs) < 3, out);
            return;
        case Op::pow:
            print_child(*n.lhs, precedence(*n.lhs) <= p, out);
            out += '^';
            print_child(*n.rhs, precedence(*n.rhs) < 3, out);
            return;
        default: {
            const char* sym = n.op == Op::add ? " + " : n.op == Op::sub ? " - " : n.op == Op::mul ? "*" : "/";
            print_child(*n.lhs, precedence(*n.lhs) < p, out);
            out += sym;
            print_child(*n.rhs, precedence(*n.rhs) <= p, out);
            return;
        }
    }
}

std::size_t emit(const ExprNode& n, auto& program) {
    using I = std::remove_reference_t<decltype(program[0])>;
    switch (n.op) {
        case Op::number:
        case Op::var_x:
        case Op::var_z:
            program.push_back(I{n.op, n.func, n.value});
            return 1;
        case Op::neg:
        case Op::call: {
            std::size_t d = emit(*n.lhs, program);
            program.push_back(I{n.op, n.func, 0.0});
            return d;
        }
        default: {
            std::size_t a = emit(*n.lhs, program);
            std::size_t b = emit(*n.rhs, program);
            program.push_back(I{n.op, n.func, 0.0});
            return std::max(a, b + 1);
        }
    }
}

bool tree_uses_z(const ExprNode& n) {
    if (n.op == Op::var_z) return true;
    if (n.lhs && tree_uses_z(*n.lhs)) return true;
    return n.rhs && tree_uses_z(*n.rhs);
}

[[noreturn]] void eval_fail(const char* what, double x, double z) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s at (x=%.17g, z=%.17g)", what, x, z);
    throw Error(ErrorCode::evaluation, buf);
}

}  // namespace

const char* func_name(Func f) {
    switch (f) {
        case Func::sin: return "sin";
        case Func::cos: return "cos";
        case Func::exp: return "exp";
        case Func::sqrt: return "sqrt";
        case Func::abs: return "abs";
    }
    return "?";
}

Expr::Expr() : Expr(make(Op::number)) {}

Expr::Expr(std::shared_ptr<const ExprNode> root) : root_(std::move(root)) { compile(); }

Expr Expr::constant(double v) { return Expr(make(Op::number, {}, {}, v)); }

void Expr::compile() {
    program_.clear();
    max_stack_ = emit(*root_, program_);
}

Expr parse_expr(std::string_view text) { return Expr(Parser(text).parse()); }

std::string Expr::print() const {
    std::string out;
    print_node(*root_, out);
    return out;
}

bool Expr::uses_z() const { return tree_uses_z(*root_); }

bool Expr::is_zero_constant() const { return root_->op == Op::number && root_->value == 0.0; }

double Expr::operator()(double x, double z) const {
    double small[32] = {};
    std::vector<double> big;
    double* st = small;
    if (max_stack_ > 32) {
        big.resize(max_stack_);
        st = big.data();
    }
    std::size_t top = 0;
    for (const auto& in : program_) {
        switch (in.op) {
            case Op::number: st[top++] = in.value; break;
            case Op::var_x: st[top++] = x; break;
            case Op::var_z: st[top++] = z; break;
            case Op::neg: st[top - 1] = -st[top - 1]; break;
            case Op::call: {
                double& a = st[top - 1];
                switch (in.func) {
                    case Func::sin: a = std::sin(a); break;
                    case Func::cos: a = std::cos(a); break;
                    case Func::exp: a = std::exp(a); break;
                    case Func::sqrt:
                        if (a < 0.0) eval_fail("sqrt of negative value", x, z);
                        a = std::sqrt(a);
                        break;
                    case Func::abs: a = std::fabs(a); break;
                }
                break;
            }
            default: {
                double b = st[--top];
                double& a = st[top - 1];
                switch (in.op) {
                    case Op::add: a = a + b; break;
                    case Op::sub: a = a - b; break;
                    case Op::mul: a = a * b; break;
                    case Op::div:
                        if (b == 0.0) eval_fail("division by zero", x, z);
                        a = a / b;
                        break;
                    case Op::pow:
                        if (a == 0.0 && b < 0.0) eval_fail("division by zero in power", x, z);
                        a = std::pow(a, b);
                        break;
                    default: break;
                }
            }
        }
        if (!std::isfinite(st[top - 1])) eval_fail("non-finite intermediate result", x, z);
    }
    return st[0];
}

}  // namespace fissure
