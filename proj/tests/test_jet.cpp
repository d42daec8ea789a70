#include "musym/parser.hpp"

#include "helpers.hpp"

#include <doctest.h>

using namespace musym;
using musym::testing::Rng;
using musym::testing::random_expr;

TEST_CASE("total derivatives expand over the jets present") {
    JetContext ctx({"x", "y"}, {"u", "v"});
    CHECK(ctx.total_derivative(ctx.var("u"), 0) == parse_expr("u_x", ctx));

    // chain rule on gamma(x, u)
    Expr g = ctx.var("x") * ctx.var("u") + ctx.var("u").pow(Rational(2));
    Expr d = ctx.total_derivative(g, 0);
    CHECK(d == parse_expr("u + x*u_x + 2*u*u_x", ctx));

    JetContext mech({"t"}, {"q1", "q2"});
    Expr e = parse_expr("q1^2*(q2d - q2)", mech);
    CHECK(mech.total_derivative(e, 0) ==
          parse_expr("2*q1*q1d*(q2d - q2) + q1^2*(q2dd - q2d)", mech));
}

TEST_CASE("multi-index total derivatives") {
    JetContext ctx({"x", "y"}, {"u", "v"});
    Expr e = parse_expr("x*u + u_x^2", ctx);
    CHECK(ctx.total_derivative(e, MultiIndex({0, 0})) == e);
    CHECK(ctx.total_derivative(ctx.var("u"), MultiIndex({1, 1})) == parse_expr("u_xy", ctx));
    // D_(2,0)(x u) = 2 u_x + x u_xx, cross-checked by two single steps
    Expr lhs = ctx.total_derivative(ctx.var("x") * ctx.var("u"), MultiIndex({2, 0}));
    CHECK(lhs == parse_expr("2*u_x + x*u_xx", ctx));
    Expr twice = ctx.total_derivative(ctx.total_derivative(ctx.var("x") * ctx.var("u"), 0), 0);
    CHECK(lhs == twice);
    CHECK(prob_equal(lhs, twice).zero());
}

TEST_CASE("commute_check examples") {
    JetContext ctx({"x", "y"}, {"u", "v"});
    CHECK(commute_check(ctx, ctx.var("u"), 0, 1).kind == Verdict::ZeroSymbolic);
    CHECK(commute_check(ctx, parse_expr("u*v_x", ctx), 0, 1).zero());
    CHECK(commute_check(ctx, exp(parse_expr("u_x", ctx)), 0, 1).zero());
}

TEST_CASE("[D_i, D_j] vanishes on random expressions") {
    JetContext ctx({"x", "y"}, {"u", "v"});
    auto syms = musym::testing::first_order_symbols(ctx);
    Rng rng(42);
    for (int k = 0; k < 200; ++k) {
        Expr e = random_expr(rng, syms, 2);
        Expr d = ctx.total_derivative(ctx.total_derivative(e, 0), 1) -
                 ctx.total_derivative(ctx.total_derivative(e, 1), 0);
        CAPTURE(k);
        CHECK(d.is_zero()); // exact, not just numeric
    }
}

TEST_CASE("D_i satisfies the product rule") {
    JetContext ctx({"x", "y"}, {"u", "v"});
    auto syms = musym::testing::first_order_symbols(ctx);
    Rng rng(43);
    for (int k = 0; k < 50; ++k) {
        Expr a = random_expr(rng, syms, 2);
        Expr b = random_expr(rng, syms, 2);
        int i = rng.range(2);
        Expr resid = ctx.total_derivative(a * b, i) - a * ctx.total_derivative(b, i) -
                     b * ctx.total_derivative(a, i);
        CHECK(is_zero(resid).zero());
    }
}

TEST_CASE("D_J is independent of the application order up to |J| = 3") {
    JetContext ctx({"x", "y"}, {"u", "v"});
    Expr e = parse_expr("u*v_x + exp(u)", ctx);
    // all orderings of D_x D_x D_y
    Expr a = ctx.total_derivative(ctx.total_derivative(ctx.total_derivative(e, 0), 0), 1);
    Expr b = ctx.total_derivative(ctx.total_derivative(ctx.total_derivative(e, 0), 1), 0);
    Expr c = ctx.total_derivative(ctx.total_derivative(ctx.total_derivative(e, 1), 0), 0);
    CHECK(a == b);
    CHECK(b == c);
    CHECK(a == ctx.total_derivative(e, MultiIndex({2, 1})));
}

TEST_CASE("context validation") {
    CHECK_THROWS_AS(JetContext({}, {"u"}), math_error);
    CHECK_THROWS_AS(JetContext({"x"}, {}), math_error);
    CHECK_THROWS_AS(JetContext({"x", "x"}, {"u"}), math_error);
    CHECK_THROWS_AS(JetContext({"x"}, {"u", "x"}), math_error);
    JetContext ctx({"x"}, {"u"});
    CHECK_THROWS_AS(ctx.total_derivative(ctx.var("u"), 3), math_error);
}

TEST_CASE("mechanical notation is an alias over p = 1 jets") {
    JetContext mech({"t"}, {"q1"});
    CHECK(parse_expr("q1d", mech) == Expr::symbol(mech.jet(0, MultiIndex({1}))));
    CHECK(parse_expr("q1dd", mech) == Expr::symbol(mech.jet(0, MultiIndex({2}))));
    CHECK(parse_expr("q1_t", mech) == parse_expr("q1d", mech));
    CHECK(mech.jet(0, MultiIndex({1})).name == "q1d");
}
