#include <doctest.h>

#include <cmath>

#include "expr_gen.hpp"
#include "fissure/expr.hpp"

using namespace fissure;

TEST_CASE("constant and simple expressions") {
    CHECK(parse_expr("1")(0.3, -2.0) == 1.0);
    CHECK(parse_expr("2*x + sin(z)")(0.0, 0.0) == 0.0);
    CHECK(parse_expr("2*x + sin(z)")(1.5, 0.0) == doctest::Approx(3.0));
    CHECK(Expr()(1.0, 1.0) == 0.0);
    CHECK(Expr::constant(2.5)(0.0, 0.0) == 2.5);
}

TEST_CASE("precedence and associativity") {
    CHECK(parse_expr("1 + 2*3")(0, 0) == 7.0);
    CHECK(parse_expr("2^3^2")(0, 0) == 512.0);
    CHECK(parse_expr("-2^2")(0, 0) == -4.0);
    CHECK(parse_expr("2^-1")(0, 0) == 0.5);
    CHECK(parse_expr("8/4/2")(0, 0) == 1.0);
    CHECK(parse_expr("8-4-2")(0, 0) == 2.0);
    CHECK(parse_expr("-x*z")(2, 3) == -6.0);
    CHECK(parse_expr("(1+2)*3")(0, 0) == 9.0);
    CHECK(parse_expr("2*-x")(1, 0) == -2.0);
    CHECK(parse_expr("1.5e2 + .5")(0, 0) == 150.5);
}

TEST_CASE("functions") {
    CHECK(parse_expr("sqrt(4)")(0, 0) == 2.0);
    CHECK(parse_expr("abs(-3)")(0, 0) == 3.0);
    CHECK(parse_expr("exp(0)")(0, 0) == 1.0);
    CHECK(parse_expr("cos(0) + sin(0)")(0, 0) == 1.0);
}

TEST_CASE("evaluation errors are reported instead of NaN") {
    for (const char* s : {"1/(x-x)", "sqrt(-1)", "0^-1", "exp(1000)", "sqrt(z - 5)"}) {
        Expr e = parse_expr(s);
        bool thrown = false;
        try {
            (void)e(0.5, 0.5);
        } catch (const Error& err) {
            thrown = err.code() == ErrorCode::evaluation;
        }
        CHECK_MESSAGE(thrown, s);
    }
}

TEST_CASE("syntax errors carry byte offsets") {
    try {
        parse_expr("1 + * 2");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 4);
    }
    try {
        parse_expr("2*y");
        FAIL("expected an unknown identifier");
    } catch (const UnknownIdentifier& e) {
        CHECK(e.offset() == 2);
    }
    CHECK_THROWS_AS(parse_expr("foo(x)"), UnknownIdentifier);
    for (const auto& s : exprgen::malformed_corpus()) {
        bool located = false;
        try {
            parse_expr(s);
        } catch (const ParseError& e) {
            located = e.offset() <= s.size() && std::string(e.what()).find("byte") != std::string::npos;
        }
        CHECK_MESSAGE(located, "input: '", s, "'");
    }
}

TEST_CASE("print is a parse fixpoint") {
    for (const char* s : {"1 - (2 - 3)", "2^(3^2)", "(2^3)^2", "-(x + z)", "-x^2", "(-x)^2", "x / (z * 2)",
                          "x - -z", "sin(x)^2 + cos(z)^2", "1e-300 * x", "0.1 + 0.2"}) {
        Expr e = parse_expr(s);
        std::string p = e.print();
        Expr e2 = parse_expr(p);
        CHECK(e2.print() == p);
        CHECK(e2(0.7, -0.3) == e(0.7, -0.3));
    }
}

TEST_CASE("random round trips agree with an independent evaluator") {
    exprgen::Gen gen(12345);
    std::uniform_real_distribution<double> U(-2.0, 2.0);
    for (int k = 0; k < 200; ++k) {
        auto n = gen.make(4);
        std::string src = exprgen::text(*n);
        Expr e = parse_expr(src);
        Expr e2 = parse_expr(e.print());
        REQUIRE(e2.print() == e.print());
        for (int s = 0; s < 3; ++s) {
            double x = U(gen.rng()), z = U(gen.rng());
            double ref = exprgen::eval(*n, x, z);
            double tol = 1e-14 * std::max(1.0, std::fabs(ref));
            CHECK(std::fabs(e(x, z) - ref) <= tol);
            CHECK(std::fabs(e2(x, z) - ref) <= tol);
        }
    }
}

TEST_CASE("uses_z and zero detection") {
    CHECK(parse_expr("x + 1").uses_z() == false);
    CHECK(parse_expr("x + z").uses_z());
    CHECK(parse_expr("0").is_zero_constant());
    CHECK_FALSE(parse_expr("0*x").is_zero_constant());
}
