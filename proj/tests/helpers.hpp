#pragma once

#include "musym/context.hpp"
#include "musym/muform.hpp"

#include <cstdint>
#include <vector>

namespace musym::testing {

// deterministic generator for property tests
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        state += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    int range(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }
    long long small_int() { return static_cast<long long>(range(5)) - 2; } // -2..2
};

// random expression over the given symbols: polynomial skeleton with an
// occasional exp/sin of a linear argument, singularities kept away
inline Expr random_expr(Rng& rng, const std::vector<SymbolId>& syms, int depth) {
    if (depth <= 0 || rng.range(4) == 0) {
        int pick = rng.range(static_cast<int>(syms.size()) + 2);
        if (pick < static_cast<int>(syms.size()))
            return Expr::symbol(syms[static_cast<size_t>(pick)]);
        return Expr(rng.small_int() == 0 ? 1 : rng.small_int());
    }
    switch (rng.range(5)) {
        case 0: return random_expr(rng, syms, depth - 1) + random_expr(rng, syms, depth - 1);
        case 1: return random_expr(rng, syms, depth - 1) * random_expr(rng, syms, depth - 1);
        case 2: return random_expr(rng, syms, depth - 1).pow(Rational(1 + rng.range(2) + 1));
        case 3: {
            Expr lin = Expr::symbol(syms[static_cast<size_t>(rng.range(
                           static_cast<int>(syms.size())))]) *
                       Expr(1 + rng.range(2));
            return rng.range(2) ? exp(lin) : sin(lin);
        }
        default: return random_expr(rng, syms, depth - 1) - random_expr(rng, syms, depth - 1);
    }
}

// variables of order 0 (x^i and u^a) for a context
inline std::vector<SymbolId> base_symbols(const JetContext& ctx) {
    std::vector<SymbolId> s;
    for (int i = 0; i < ctx.p(); ++i) s.push_back(ctx.independent(i));
    for (int a = 0; a < ctx.q(); ++a) s.push_back(ctx.dependent(a));
    return s;
}

inline std::vector<SymbolId> first_order_symbols(const JetContext& ctx) {
    std::vector<SymbolId> s = base_symbols(ctx);
    for (int a = 0; a < ctx.q(); ++a)
        for (int i = 0; i < ctx.p(); ++i)
            s.push_back(ctx.jet(a, MultiIndex::zeros(ctx.p()).bumped(i)));
    return s;
}

// valid mu-form from a nilpotent gauge frame: Lambda_i = A^{-1} D_i A with
// A = I + g E_{q-1,0}; compatible by construction
inline MuForm nilpotent_mu(const JetContext& ctx, const Expr& g) {
    std::vector<ExprMatrix> lam;
    for (int i = 0; i < ctx.p(); ++i) {
        ExprMatrix m(ctx.q(), ctx.q());
        m.at(ctx.q() - 1, 0) = ctx.total_derivative(g, i);
        lam.push_back(std::move(m));
    }
    return MuForm(ctx, std::move(lam));
}

} // namespace musym::testing
