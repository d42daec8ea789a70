#include "musym/prolong.hpp"

namespace musym {

std::vector<MultiIndex> multi_indices_of_order(int p, int m) {
    std::vector<MultiIndex> out;
    MultiIndex j = MultiIndex::zeros(p);
    // lexicographic enumeration of compositions of m into p parts
    std::function<void(int, int)> rec = [&](int slot, int left) {
        if (slot == p - 1) {
            j.counts[static_cast<size_t>(slot)] = left;
            out.push_back(j);
            return;
        }
        for (int k = left; k >= 0; --k) {
            j.counts[static_cast<size_t>(slot)] = k;
            rec(slot + 1, left - k);
        }
        j.counts[static_cast<size_t>(slot)] = 0;
    };
    rec(0, m);
    return out;
}

std::vector<MultiIndex> multi_indices_up_to(int p, int r) {
    std::vector<MultiIndex> out;
    for (int m = 0; m <= r; ++m) {
        auto v = multi_indices_of_order(p, m);
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

namespace {

int field_jet_order(const VectorField& X) {
    int r = 0;
    for (const auto& e : X.xi) r = std::max(r, e.max_jet_order());
    for (const auto& e : X.phi) r = std::max(r, e.max_jet_order());
    return r;
}

} // namespace

VectorField make_vector_field(const JetContext& ctx, std::vector<Expr> xi, std::vector<Expr> phi) {
    if (xi.empty()) xi.assign(static_cast<size_t>(ctx.p()), Expr());
    if (static_cast<int>(xi.size()) != ctx.p() || static_cast<int>(phi.size()) != ctx.q())
        throw shape_error("vector field needs p xi components and q phi components");
    VectorField X{std::move(xi), std::move(phi), false};
    int ord = field_jet_order(X);
    if (ord > 1) throw math_error("vector field components may depend on first derivatives at most");
    if (ord == 1) {
        if (!X.vertical())
            throw math_error("generalized vector fields are accepted in evolutionary form only");
        X.generalized = true;
    }
    return X;
}

VectorField evolutionary_form(const VectorField& X, const JetContext& ctx) {
    if (X.vertical()) return X;
    VectorField Q;
    Q.xi.assign(static_cast<size_t>(ctx.p()), Expr());
    for (int a = 0; a < ctx.q(); ++a) {
        Expr qa = X.phi[static_cast<size_t>(a)];
        for (int i = 0; i < ctx.p(); ++i) {
            SymbolId ui = ctx.jet(a, MultiIndex::zeros(ctx.p()).bumped(i));
            qa -= X.xi[static_cast<size_t>(i)] * Expr::symbol(ui);
        }
        Q.phi.push_back(qa);
    }
    Q.generalized = field_jet_order(Q) >= 1;
    return Q;
}

namespace {

void check_prolongable(const VectorField& X, int r) {
    if (r < 0) throw math_error("prolongation order must be non-negative");
    if (X.generalized && r > 1)
        throw math_error("generalized vector fields support first-order operations only");
}

// psi^a_{J,k} = D_k psi^a_J - u^a_{J,i} D_k xi^i  (+ mu correction)
ProlongedField build(const JetContext& ctx, const VectorField& X0, int r, ProlongMode mode,
                     const MuForm* mu) {
    check_prolongable(X0, r);
    if (mode == ProlongMode::Mu) mu->require_compatible();
    VectorField Xn = X0;
    if (Xn.xi.empty()) Xn.xi.assign(static_cast<size_t>(ctx.p()), Expr());
    std::map<MultiIndex, std::vector<Expr>> coeffs;
    coeffs[MultiIndex::zeros(ctx.p())] = Xn.phi;
    for (int m = 1; m <= r; ++m) {
        for (const auto& J : multi_indices_of_order(ctx.p(), m)) {
            int k = J.first_nonzero();
            MultiIndex Jp = J.lowered(k);
            const auto& prev = coeffs.at(Jp);
            std::vector<Expr> cur(static_cast<size_t>(ctx.q()));
            for (int a = 0; a < ctx.q(); ++a) {
                Expr psi = ctx.total_derivative(prev[static_cast<size_t>(a)], k);
                for (int i = 0; i < ctx.p(); ++i) {
                    const Expr& xi_i = Xn.xi[static_cast<size_t>(i)];
                    if (xi_i.is_zero()) continue;
                    SymbolId uJi = ctx.jet(a, Jp.bumped(i));
                    psi -= Expr::symbol(uJi) * ctx.total_derivative(xi_i, k);
                }
                if (mode == ProlongMode::Mu) {
                    for (int b = 0; b < ctx.q(); ++b) {
                        const Expr& lkab = mu->matrix(k).at(a, b);
                        if (lkab.is_zero()) continue;
                        Expr qb = prev[static_cast<size_t>(b)];
                        for (int i = 0; i < ctx.p(); ++i) {
                            const Expr& xi_i = Xn.xi[static_cast<size_t>(i)];
                            if (xi_i.is_zero()) continue;
                            qb -= Expr::symbol(ctx.jet(b, Jp.bumped(i))) * xi_i;
                        }
                        psi += lkab * qb;
                    }
                }
                cur[static_cast<size_t>(a)] = psi;
            }
            coeffs[J] = std::move(cur);
        }
    }
    return ProlongedField(ctx, std::move(Xn), r, mode, std::move(coeffs));
}

} // namespace

const Expr& ProlongedField::coeff(int a, const MultiIndex& J) const {
    auto it = coeffs_.find(J);
    if (it == coeffs_.end()) throw math_error("prolongation order exceeded");
    return it->second.at(static_cast<size_t>(a));
}

ProlongedField standard_prolong(const JetContext& ctx, const VectorField& X, int r) {
    return build(ctx, X, r, ProlongMode::Standard, nullptr);
}

ProlongedField mu_prolong(const VectorField& X, const MuForm& mu, int r) {
    return build(mu.ctx(), X, r, ProlongMode::Mu, &mu);
}

Expr apply(const ProlongedField& Y, const Expr& e) {
    const JetContext& ctx = Y.ctx();
    if (e.max_jet_order() > Y.order())
        throw math_error("expression order exceeds the prolongation order");
    Expr r;
    for (int i = 0; i < ctx.p() && !Y.base().xi.empty(); ++i) {
        const Expr& xi_i = Y.base().xi[static_cast<size_t>(i)];
        if (!xi_i.is_zero()) r += xi_i * e.diff(ctx.independent(i));
    }
    for (const auto& [J, psis] : Y.coefficients()) {
        for (int a = 0; a < ctx.q(); ++a) {
            Expr de = e.diff(ctx.jet(a, J));
            if (!de.is_zero()) r += psis[static_cast<size_t>(a)] * de;
        }
    }
    return r;
}

std::map<MultiIndex, std::vector<Expr>> mu_difference(const VectorField& X, const MuForm& mu,
                                                      int r) {
    const JetContext& ctx = mu.ctx();
    ProlongedField ymu = mu_prolong(X, mu, r);
    ProlongedField ystd = standard_prolong(ctx, X, r);
    std::map<MultiIndex, std::vector<Expr>> F;
    for (const auto& [J, psis] : ymu.coefficients()) {
        std::vector<Expr> f(psis.size());
        for (size_t a = 0; a < psis.size(); ++a)
            f[a] = psis[a] - ystd.coeff(static_cast<int>(a), J);
        F[J] = std::move(f);
    }
    return F;
}

} // namespace musym
