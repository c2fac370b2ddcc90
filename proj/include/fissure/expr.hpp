#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "fissure/error.hpp"

namespace fissure {

class UnknownIdentifier : public ParseError {
public:
    using ParseError::ParseError;
};

enum class Op { number, var_x, var_z, neg, add, sub, mul, div, pow, call };
enum class Func { sin, cos, exp, sqrt, abs };

struct ExprNode {
    Op op = Op::number;
    Func func = Func::sin;
    double value = 0.0;
    std::shared_ptr<const ExprNode> lhs;  // operand for neg and call
    std::shared_ptr<const ExprNode> rhs;
};

// Parsed coefficient expression over x and z. Evaluation runs a flat postfix program.
class Expr {
public:
    Expr();  // constant 0
    static Expr constant(double v);

    double operator()(double x, double z) const;
    std::string print() const;
    const ExprNode& root() const { return *root_; }
    bool uses_z() const;
    bool is_zero_constant() const;

private:
    friend Expr parse_expr(std::string_view text);
    explicit Expr(std::shared_ptr<const ExprNode> root);
    void compile();

    struct Instr {
        Op op;
        Func func;
        double value;
    };
    std::shared_ptr<const ExprNode> root_;
    std::vector<Instr> program_;
    std::size_t max_stack_ = 1;
};

Expr parse_expr(std::string_view text);

const char* func_name(Func f);

}  // namespace fissure
