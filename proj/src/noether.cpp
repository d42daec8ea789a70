#include "musym/noether.hpp"

#include <algorithm>

namespace musym {

const char* conservation_class_name(ConservationClass c) {
    switch (c) {
        case ConservationClass::StandardConserved: return "standard-conserved";
        case ConservationClass::MuConserved: return "mu-conserved";
        case ConservationClass::Conditional: return "conditional";
        case ConservationClass::None: return "none";
    }
    return "?";
}

Lagrangian make_lagrangian(const JetContext& ctx, const Expr& density) {
    (void)ctx;
    int order = density.max_jet_order();
    if (order > 2) throw math_error("Lagrangians of order > 2 are not supported");
    return Lagrangian{density, std::max(order, 1)};
}

std::vector<std::vector<Expr>> momenta(const JetContext& ctx, const Lagrangian& L) {
    std::vector<std::vector<Expr>> pi(static_cast<size_t>(ctx.p()),
                                      std::vector<Expr>(static_cast<size_t>(ctx.q())));
    for (int i = 0; i < ctx.p(); ++i)
        for (int a = 0; a < ctx.q(); ++a)
            pi[size_t(i)][size_t(a)] =
                L.density.diff(ctx.jet(a, MultiIndex::zeros(ctx.p()).bumped(i)));
    return pi;
}

namespace {

// dL/du^a_{ij} with the symmetric convention: u_xy and u_yx are one
// coordinate, so the ordered-pair derivative carries a 1/2 for i != j.
Expr second_momentum(const JetContext& ctx, const Lagrangian& L, int i, int j, int a) {
    MultiIndex J = MultiIndex::zeros(ctx.p()).bumped(i).bumped(j);
    Expr d = L.density.diff(ctx.jet(a, J));
    if (i != j) d = d * Expr(Rational(1, 2));
    return d;
}

std::vector<Expr> lxi_terms(const JetContext& ctx, const Lagrangian& L, const VectorField& X) {
    std::vector<Expr> t;
    for (int i = 0; i < ctx.p(); ++i)
        t.push_back(X.xi.empty() ? Expr() : L.density * X.xi[size_t(i)]);
    return t;
}

} // namespace

std::vector<Expr> euler_lagrange(const JetContext& ctx, const Lagrangian& L) {
    std::vector<Expr> E(static_cast<size_t>(ctx.q()));
    for (int a = 0; a < ctx.q(); ++a) {
        Expr acc;
        for (const auto& J : multi_indices_up_to(ctx.p(), L.order)) {
            Expr d = L.density.diff(ctx.jet(a, J));
            if (d.is_zero()) continue;
            Expr term = ctx.total_derivative(d, J);
            acc += (J.order() % 2 == 0) ? term : -term;
        }
        E[size_t(a)] = acc;
    }
    return E;
}

std::vector<Expr> mu_euler_lagrange(const Lagrangian& L, const MuForm& mu) {
    mu.require_compatible();
    if (L.order > 1)
        throw math_error("mu-Euler-Lagrange equations are defined for first-order Lagrangians");
    const JetContext& ctx = mu.ctx();
    auto pi = momenta(ctx, L);
    std::vector<Expr> E(static_cast<size_t>(ctx.q()));
    for (int a = 0; a < ctx.q(); ++a) {
        Expr e = L.density.diff(ctx.dependent(a));
        for (int i = 0; i < ctx.p(); ++i) {
            e -= ctx.total_derivative(pi[size_t(i)][size_t(a)], i);
            for (int b = 0; b < ctx.q(); ++b)
                e += pi[size_t(i)][size_t(b)] * mu.matrix(i).at(b, a);
        }
        E[size_t(a)] = e;
    }
    return E;
}

Expr mu_symmetry_residual(const VectorField& X, const MuForm& mu, const Lagrangian& L,
                          ProlongMode mode) {
    const JetContext& ctx = mu.ctx();
    if (X.vertical()) {
        ProlongedField Y = mode == ProlongMode::Mu ? mu_prolong(X, mu, L.order)
                                                   : standard_prolong(ctx, X, L.order);
        return apply(Y, L.density);
    }
    if (L.order > 1)
        throw math_error("mu-symmetries with xi != 0 are handled for first-order Lagrangians");
    VectorField Q = evolutionary_form(X, ctx);
    ProlongedField Y =
        mode == ProlongMode::Mu ? mu_prolong(Q, mu, 1) : standard_prolong(ctx, Q, 1);
    Expr res = apply(Y, L.density);
    auto lxi = lxi_terms(ctx, L, X);
    for (int i = 0; i < ctx.p(); ++i) {
        res += ctx.total_derivative(lxi[size_t(i)], i);
        if (mode == ProlongMode::Mu) res += lxi[size_t(i)] * mu.matrix(i).trace();
    }
    return res;
}

Expr invariance_residual(const VectorField& X, const MuForm& mu, const Expr& F,
                         ProlongMode mode) {
    const JetContext& ctx = mu.ctx();
    int r = std::max(F.max_jet_order(), 1);
    ProlongedField Y =
        mode == ProlongMode::Mu ? mu_prolong(X, mu, r) : standard_prolong(ctx, X, r);
    return apply(Y, F);
}

MVector conserved_mvector(const VectorField& X, const MuForm& mu, const Lagrangian& L) {
    mu.require_compatible();
    const JetContext& ctx = mu.ctx();
    if (L.order > 2) throw math_error("conserved vectors are constructed through order 2 only");
    auto pi = momenta(ctx, L);

    if (!X.vertical()) {
        if (L.order > 1)
            throw math_error("the xi != 0 conserved vector requires a first-order Lagrangian");
        VectorField Q = evolutionary_form(X, ctx);
        MVector P;
        for (int i = 0; i < ctx.p(); ++i) {
            ExprMatrix m(ctx.q(), ctx.q());
            for (int b = 0; b < ctx.q(); ++b)
                for (int a = 0; a < ctx.q(); ++a) {
                    m.at(b, a) = Q.phi[size_t(b)] * pi[size_t(i)][size_t(a)];
                    if (a == b) m.at(b, a) += L.density * X.xi[size_t(i)];
                }
            P.push_back(std::move(m));
        }
        return P;
    }

    MVector P;
    for (int i = 0; i < ctx.p(); ++i) {
        ExprMatrix m(ctx.q(), ctx.q());
        for (int b = 0; b < ctx.q(); ++b)
            for (int a = 0; a < ctx.q(); ++a)
                m.at(b, a) = X.phi[size_t(b)] * pi[size_t(i)][size_t(a)];
        P.push_back(std::move(m));
    }
    if (L.order == 2) {
        std::vector<std::vector<Expr>> nphi; // (nabla_j phi)^b
        for (int j = 0; j < ctx.p(); ++j) nphi.push_back(nabla(mu, j, X.phi));
        for (int i = 0; i < ctx.p(); ++i)
            for (int b = 0; b < ctx.q(); ++b)
                for (int a = 0; a < ctx.q(); ++a) {
                    Expr add;
                    for (int j = 0; j < ctx.p(); ++j) {
                        Expr s = second_momentum(ctx, L, i, j, a);
                        if (s.is_zero()) continue;
                        add += nphi[size_t(j)][size_t(b)] * s;
                        add -= X.phi[size_t(b)] * ctx.total_derivative(s, j);
                    }
                    P[size_t(i)].at(b, a) += add;
                }
    }
    return P;
}

std::vector<Expr> trace_current(const MVector& P) {
    std::vector<Expr> t;
    for (const auto& m : P) t.push_back(m.trace());
    return t;
}

ZeroVerdict verify_noether_identity(const VectorField& X, const MuForm& mu, const Lagrangian& L,
                                    const OracleConfig& cfg) {
    const JetContext& ctx = mu.ctx();
    VectorField Q = X.vertical() ? X : evolutionary_form(X, ctx);
    MVector P = conserved_mvector(Q, mu, L);
    Expr lhs;
    for (int i = 0; i < ctx.p(); ++i) lhs += nabla(mu, i, P[size_t(i)]).trace();
    ProlongedField Y = mu_prolong(Q, mu, L.order);
    Expr rhs = apply(Y, L.density);
    auto E = euler_lagrange(ctx, L);
    for (int a = 0; a < ctx.q(); ++a) rhs -= Q.phi[size_t(a)] * E[size_t(a)];
    return is_zero(lhs - rhs, cfg);
}

std::optional<Expr> eliminate_on_shell(const Expr& residual, const std::vector<Expr>& generators,
                                       const JetContext& ctx, int elim_order) {
    (void)ctx;
    std::vector<Expr> gens;
    for (const auto& g : generators)
        if (!g.is_zero()) gens.push_back(g);

    std::set<SymbolId> Z;
    auto collect = [&](const Expr& e) {
        for (const auto& s : e.symbols())
            if (s.is_jet() && s.jet.order() >= elim_order) Z.insert(s);
    };
    collect(residual);
    for (const auto& g : gens) collect(g);
    if (Z.empty()) return residual;

    auto linear_in_Z = [&](const Expr& e) {
        for (const auto& z : Z) {
            Expr d = e.diff(z);
            if (d.is_zero()) continue;
            for (const auto& s : d.symbols())
                if (Z.count(s)) return false;
        }
        return true;
    };
    if (!linear_in_Z(residual)) return std::nullopt;
    std::vector<Expr> lin;
    for (const auto& g : gens)
        if (linear_in_Z(g)) lin.push_back(g);
    if (lin.empty()) return std::nullopt;

    const size_t m = lin.size();
    std::vector<std::vector<Expr>> rows;
    for (const auto& z : Z) {
        std::vector<Expr> row;
        bool all_zero = true;
        for (const auto& g : lin) {
            Expr d = g.diff(z);
            if (!d.is_zero()) all_zero = false;
            row.push_back(d);
        }
        Expr rhs = residual.diff(z);
        if (all_zero) {
            if (!rhs.is_zero()) return std::nullopt;
            continue;
        }
        row.push_back(rhs);
        rows.push_back(std::move(row));
    }

    std::vector<int> pivot_of_col(m, -1);
    size_t rused = 0;
    for (size_t col = 0; col < m && rused < rows.size(); ++col) {
        size_t pr = rows.size();
        for (size_t r = rused; r < rows.size(); ++r)
            if (!rows[r][col].is_zero()) {
                pr = r;
                break;
            }
        if (pr == rows.size()) continue;
        std::swap(rows[rused], rows[pr]);
        Expr piv = rows[rused][col];
        for (size_t c = col; c <= m; ++c) rows[rused][c] = rows[rused][c] / piv;
        for (size_t r = 0; r < rows.size(); ++r) {
            if (r == rused) continue;
            Expr f = rows[r][col];
            if (f.is_zero()) continue;
            for (size_t c = col; c <= m; ++c) rows[r][c] -= f * rows[rused][c];
        }
        pivot_of_col[col] = static_cast<int>(rused);
        ++rused;
    }
    for (size_t r = rused; r < rows.size(); ++r) {
        bool coef_zero = true;
        for (size_t c = 0; c < m; ++c)
            if (!rows[r][c].is_zero()) {
                coef_zero = false;
                break;
            }
        if (coef_zero && !rows[r][m].is_zero()) return std::nullopt;
    }

    Expr rem = residual;
    for (size_t col = 0; col < m; ++col) {
        if (pivot_of_col[col] < 0) continue;
        const Expr& c = rows[static_cast<size_t>(pivot_of_col[col])][m];
        if (!c.is_zero()) rem -= c * lin[col];
    }
    for (const auto& s : rem.symbols())
        if (Z.count(s)) return std::nullopt;
    return rem;
}

std::optional<Expr> reduce_on_shell(const Expr& residual, const std::vector<Expr>& equations,
                                    const JetContext& ctx) {
    if (equations.empty()) return std::nullopt;
    int eq_order = 0;
    for (const auto& e : equations) eq_order = std::max(eq_order, e.max_jet_order());
    std::vector<Expr> gens = equations;
    if (residual.max_jet_order() > eq_order)
        for (const auto& e : equations)
            for (int i = 0; i < ctx.p(); ++i) gens.push_back(ctx.total_derivative(e, i));
    return eliminate_on_shell(residual, gens, ctx, eq_order);
}

ConservationReport mu_divergence(const MVector& P, const MuForm& mu,
                                 const std::vector<Expr>& equations, const OracleConfig& cfg) {
    mu.require_compatible();
    const JetContext& ctx = mu.ctx();
    ConservationReport rep;
    auto tr = trace_current(P);
    Expr div, mures;
    for (int i = 0; i < ctx.p(); ++i) {
        div += ctx.total_derivative(tr[size_t(i)], i);
        mures += nabla(mu, i, P[size_t(i)]).trace();
    }
    rep.divergence_residual = div;
    rep.mu_residual = mures;

    ZeroVerdict v_div = is_zero(div, cfg);
    ZeroVerdict v_mu = is_zero(mures, cfg);
    if (v_div.zero()) {
        rep.classification = ConservationClass::StandardConserved;
    } else if (v_mu.zero()) {
        rep.classification = ConservationClass::MuConserved;
    }

    if (!equations.empty()) {
        auto div_on = reduce_on_shell(div, equations, ctx);
        auto mu_on = reduce_on_shell(mures, equations, ctx);
        rep.on_shell_divergence = div_on;
        rep.on_shell_mu_residual = mu_on;
        if (rep.classification == ConservationClass::None) {
            if (div_on && is_zero(*div_on, cfg).zero()) {
                rep.classification = ConservationClass::StandardConserved;
                rep.on_shell = true;
            } else if (mu_on && is_zero(*mu_on, cfg).zero()) {
                rep.classification = ConservationClass::MuConserved;
                rep.on_shell = true;
            }
        }
        if (ctx.p() == 1 && div_on && !tr[0].is_zero()) {
            Expr f = *div_on / tr[0];
            if (f.max_jet_order() <= 1) {
                rep.decay_factor = f;
                if (rep.classification == ConservationClass::None && !f.is_zero()) {
                    rep.classification = ConservationClass::Conditional;
                    rep.on_shell = true;
                }
            }
        }
    }
    return rep;
}

DivergenceSymmetryReport divergence_symmetry_check(const VectorField& X, const MuForm& mu,
                                                   const Lagrangian& L,
                                                   const std::optional<MVector>& B,
                                                   const OracleConfig& cfg) {
    const JetContext& ctx = mu.ctx();
    if (L.order > 1) throw math_error("divergence mu-symmetries require a first-order Lagrangian");
    auto E = euler_lagrange(ctx, L);
    DivergenceSymmetryReport rep;

    if (B) {
        if (!X.vertical())
            throw math_error("an explicit B-vector requires a vertical field; xi != 0 uses the "
                             "built-in B = -L xi delta");
        MVector P = conserved_mvector(X, mu, L);
        ProlongedField Y = mu_prolong(X, mu, 1);
        Expr inv = apply(Y, L.density);
        Expr div, mures, lam;
        for (int i = 0; i < ctx.p(); ++i) {
            inv -= nabla(mu, i, (*B)[size_t(i)]).trace();
            ExprMatrix PB = P[size_t(i)] - (*B)[size_t(i)];
            rep.current.push_back(PB.trace());
            div += ctx.total_derivative(PB.trace(), i);
            lam += (mu.matrix(i) * PB).trace();
        }
        rep.invariance = is_zero(inv, cfg);
        auto div_on = reduce_on_shell(div, E, ctx);
        rep.on_shell_divergence = div_on ? *div_on : div;
        rep.expected_rhs = -lam;
        rep.conservation = div_on ? is_zero(*div_on + lam, cfg)
                                  : ZeroVerdict{Verdict::Indeterminate, div + lam, {}};
        return rep;
    }

    VectorField Q = evolutionary_form(X, ctx);
    auto pi = momenta(ctx, L);
    auto lxi = lxi_terms(ctx, L, X);
    rep.invariance = is_zero(mu_symmetry_residual(X, mu, L), cfg);

    Expr div, rhs;
    for (int i = 0; i < ctx.p(); ++i) {
        Expr ci = lxi[size_t(i)];
        for (int a = 0; a < ctx.q(); ++a) ci += Q.phi[size_t(a)] * pi[size_t(i)][size_t(a)];
        rep.current.push_back(ci);
        div += ctx.total_derivative(ci, i);
        auto lq = mu.matrix(i).apply(Q.phi);
        for (int a = 0; a < ctx.q(); ++a) rhs -= lq[size_t(a)] * pi[size_t(i)][size_t(a)];
        rhs -= lxi[size_t(i)] * mu.matrix(i).trace();
    }
    auto div_on = reduce_on_shell(div, E, ctx);
    rep.on_shell_divergence = div_on ? *div_on : div;
    rep.expected_rhs = rhs;
    rep.conservation = div_on ? is_zero(*div_on - rhs, cfg)
                              : ZeroVerdict{Verdict::Indeterminate, div - rhs, {}};
    return rep;
}

ConditionalReport conditional_invariant_check(const VectorField& X, const MuForm& mu,
                                              const Lagrangian& L, const Expr& alpha,
                                              const OracleConfig& cfg) {
    const JetContext& ctx = mu.ctx();
    if (ctx.p() != 1)
        throw math_error("the scalar conditional-invariant check needs p = 1; supply the A_i "
                         "matrices for p > 1");
    if (!X.vertical()) throw math_error("conditional invariants are stated for vertical fields");
    ConditionalReport rep;
    auto eig = common_eigenvector_check(mu, X.phi, cfg);
    if (!eig.found) {
        rep.eigen_ok = false;
        return rep;
    }
    rep.eigen_ok = true;
    rep.lambda = eig.lambdas;

    auto pi = momenta(ctx, L);
    Expr P;
    for (int a = 0; a < ctx.q(); ++a) P += X.phi[size_t(a)] * pi[0][size_t(a)];
    Expr yl = mu_symmetry_residual(X, mu, L);
    rep.symmetry = is_zero(yl - alpha * P, cfg);
    rep.decay_factor = alpha - eig.lambdas[0];

    auto E = euler_lagrange(ctx, L);
    Expr R = ctx.total_derivative(P, 0) - rep.decay_factor * P;
    auto R_on = reduce_on_shell(R, E, ctx);
    rep.decay = R_on ? is_zero(*R_on, cfg) : ZeroVerdict{Verdict::Indeterminate, R, {}};
    return rep;
}

ConditionalReport conditional_invariant_check(const VectorField& X, const MuForm& mu,
                                              const Lagrangian& L,
                                              const std::vector<ExprMatrix>& A,
                                              const OracleConfig& cfg) {
    const JetContext& ctx = mu.ctx();
    if (static_cast<int>(A.size()) != ctx.p())
        throw shape_error("one A matrix per independent variable is required");
    if (!X.vertical()) throw math_error("conditional invariants are stated for vertical fields");
    ConditionalReport rep;
    rep.eigen_ok = true;

    MVector P = conserved_mvector(X, mu, L);
    Expr yl = mu_symmetry_residual(X, mu, L);
    Expr rhs_sym, decay_rhs, div;
    for (int i = 0; i < ctx.p(); ++i) {
        rhs_sym += (A[size_t(i)] * P[size_t(i)]).trace();
        decay_rhs += ((A[size_t(i)] - mu.matrix(i)) * P[size_t(i)]).trace();
        div += ctx.total_derivative(P[size_t(i)].trace(), i);
    }
    rep.symmetry = is_zero(yl - rhs_sym, cfg);

    auto E = euler_lagrange(ctx, L);
    Expr R = div - decay_rhs;
    auto R_on = reduce_on_shell(R, E, ctx);
    rep.decay = R_on ? is_zero(*R_on, cfg) : ZeroVerdict{Verdict::Indeterminate, R, {}};
    return rep;
}

ReductionResult standard_reduction(const VectorField& X, const MuForm& mu, const Lagrangian& L,
                                   const std::optional<Expr>& gamma_supplied,
                                   const OracleConfig& cfg) {
    const JetContext& ctx = mu.ctx();
    ReductionResult res;
    if (L.order > 1) {
        res.message = "standard reduction handles first-order Lagrangians";
        return res;
    }

    std::vector<Expr> lambda_scalars;
    if (ctx.q() == 1) {
        lambda_scalars = *mu.scalar_form();
    } else {
        if (!X.vertical()) {
            res.message = "eigenvector reduction with xi != 0 is not available";
            return res;
        }
        auto eig = common_eigenvector_check(mu, X.phi, cfg);
        if (!eig.found) {
            res.message = "phi is not a common eigenvector of the Lambda_i";
            return res;
        }
        lambda_scalars = eig.lambdas;
    }

    if (gamma_supplied) {
        res.gamma = *gamma_supplied;
    } else {
        MuForm scalar_mu = MuForm::scalar(ctx, lambda_scalars);
        auto g = gamma_from_lambda(scalar_mu, cfg);
        if (g.status != GammaStatus::Found) {
            res.message = g.message.empty() ? "gauge function not found" : g.message;
            return res;
        }
        res.gamma = g.gamma;
    }

    auto pi = momenta(ctx, L);
    if (X.vertical()) {
        for (int i = 0; i < ctx.p(); ++i) {
            Expr ci;
            for (int a = 0; a < ctx.q(); ++a) ci += X.phi[size_t(a)] * pi[size_t(i)][size_t(a)];
            res.current.push_back(res.gamma * ci);
        }
    } else {
        if (ctx.q() != 1) {
            res.message = "xi != 0 reduction is the scalar-field case";
            return res;
        }
        VectorField Q = evolutionary_form(X, ctx);
        auto lxi = lxi_terms(ctx, L, X);
        for (int i = 0; i < ctx.p(); ++i) {
            Expr ci = lxi[size_t(i)];
            for (int a = 0; a < ctx.q(); ++a) ci += Q.phi[size_t(a)] * pi[size_t(i)][size_t(a)];
            res.current.push_back(res.gamma * ci);
        }
    }

    Expr div;
    for (int i = 0; i < ctx.p(); ++i) div += ctx.total_derivative(res.current[size_t(i)], i);
    auto E = euler_lagrange(ctx, L);
    auto div_on = reduce_on_shell(div, E, ctx);
    res.on_shell_divergence = div_on ? *div_on : div;
    res.divergence = div_on ? is_zero(*div_on, cfg) : ZeroVerdict{Verdict::Indeterminate, div, {}};
    res.ok = true;
    return res;
}

Theorem9Report theorem9_conservation(const VectorField& X, const MuForm& mu, const Lagrangian& L,
                                     const OracleConfig& cfg) {
    const JetContext& ctx = mu.ctx();
    if (!X.vertical())
        throw math_error("conservation under the modified variational principle is "
                         "stated for vertical fields");
    if (L.order > 1) throw math_error("a first-order Lagrangian is required here");
    Theorem9Report rep;
    auto pi = momenta(ctx, L);
    auto muEL = mu_euler_lagrange(L, mu);

    Expr yl = mu_symmetry_residual(X, mu, L);
    rep.symmetry = is_zero(yl, cfg);

    Expr div;
    for (int i = 0; i < ctx.p(); ++i) {
        Expr ci;
        for (int a = 0; a < ctx.q(); ++a) ci += X.phi[size_t(a)] * pi[size_t(i)][size_t(a)];
        rep.current.push_back(ci);
        div += ctx.total_derivative(ci, i);
    }
    Expr ident = yl - div;
    for (int a = 0; a < ctx.q(); ++a) ident -= X.phi[size_t(a)] * muEL[size_t(a)];
    rep.identity = is_zero(ident, cfg);

    auto div_on = reduce_on_shell(div, muEL, ctx);
    rep.conservation =
        div_on ? is_zero(*div_on, cfg) : ZeroVerdict{Verdict::Indeterminate, div, {}};
    return rep;
}

DualReport dual_mu_conservation(const VectorField& X, const MuForm& mu, const Lagrangian& L,
                                const OracleConfig& cfg) {
    const JetContext& ctx = mu.ctx();
    if (!X.vertical()) throw math_error("the dual construction is stated for vertical fields");
    if (L.order > 1) throw math_error("the dual construction requires a first-order Lagrangian");
    DualReport rep;
    auto pi = momenta(ctx, L);
    rep.standard_symmetry = is_zero(mu_symmetry_residual(X, mu, L, ProlongMode::Standard), cfg);

    Expr div, rhs;
    for (int i = 0; i < ctx.p(); ++i) {
        Expr ci;
        for (int a = 0; a < ctx.q(); ++a) ci += X.phi[size_t(a)] * pi[size_t(i)][size_t(a)];
        rep.current.push_back(ci);
        div += ctx.total_derivative(ci, i);
        for (int b = 0; b < ctx.q(); ++b)
            for (int a = 0; a < ctx.q(); ++a)
                rhs += pi[size_t(i)][size_t(b)] * mu.matrix(i).at(b, a) * X.phi[size_t(a)];
    }
    auto muEL = mu_euler_lagrange(L, mu);
    Expr R = div - rhs;
    auto R_on = reduce_on_shell(R, muEL, ctx);
    rep.dual_conservation =
        R_on ? is_zero(*R_on, cfg) : ZeroVerdict{Verdict::Indeterminate, R, {}};
    return rep;
}

std::map<SymbolId, Expr> solution_bindings(const std::vector<Expr>& targets,
                                           const std::map<int, Expr>& solution,
                                           const JetContext& ctx) {
    std::set<SymbolId> jets;
    for (const auto& e : targets)
        for (const auto& s : e.symbols())
            if (s.is_jet()) jets.insert(s);
    std::map<SymbolId, Expr> b;
    for (const auto& s : jets) {
        auto it = solution.find(s.index);
        if (it == solution.end())
            throw math_error("solution does not bind dependent variable: " +
                             ctx.dependents().at(static_cast<size_t>(s.index)));
        b.emplace(s, ctx.total_derivative(it->second, s.jet));
    }
    return b;
}

SolutionCheck verify_solution(const std::vector<Expr>& equations,
                              const std::map<int, Expr>& solution, const JetContext& ctx,
                              const OracleConfig& cfg) {
    auto b = solution_bindings(equations, solution, ctx);
    SolutionCheck out;
    for (const auto& e : equations) out.equations.push_back(is_zero(e.substitute(b), cfg));
    return out;
}

} // namespace musym
