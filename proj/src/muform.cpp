#include "musym/muform.hpp"

#include <algorithm>

namespace musym {

namespace {

ZeroVerdict combine(const std::vector<ZeroVerdict>& vs) {
    ZeroVerdict out{Verdict::ZeroSymbolic, Expr(), {}};
    for (const auto& v : vs) {
        if (v.kind == Verdict::NonZero) return v;
        if (v.kind == Verdict::Indeterminate) out = v;
        else if (v.kind == Verdict::ZeroNumeric && out.kind == Verdict::ZeroSymbolic) out = v;
    }
    return out;
}

ExprMatrix compatibility_residual(const MuForm& mu, int i, int j) {
    const JetContext& ctx = mu.ctx();
    ExprMatrix d(mu.q(), mu.q());
    for (int r = 0; r < mu.q(); ++r)
        for (int c = 0; c < mu.q(); ++c)
            d.at(r, c) = ctx.total_derivative(mu.matrix(j).at(r, c), i) -
                         ctx.total_derivative(mu.matrix(i).at(r, c), j);
    return d + commutator(mu.matrix(i), mu.matrix(j));
}

} // namespace

MuForm::MuForm(JetContext ctx, std::vector<ExprMatrix> lambdas)
    : ctx_(std::move(ctx)), lambdas_(std::move(lambdas)) {
    if (static_cast<int>(lambdas_.size()) != ctx_.p())
        throw shape_error("a mu-form needs one Lambda matrix per independent variable");
    for (const auto& m : lambdas_) {
        if (m.rows() != ctx_.q() || m.cols() != ctx_.q())
            throw shape_error("Lambda matrices must be q x q");
        for (int r = 0; r < m.rows(); ++r)
            for (int c = 0; c < m.cols(); ++c)
                if (m.at(r, c).max_jet_order() > 1)
                    throw math_error("Lambda entries may depend on first derivatives at most");
    }
    compatible_ = true;
    for (int i = 0; i < p() && compatible_; ++i)
        for (int j = i + 1; j < p() && compatible_; ++j) {
            ExprMatrix res = compatibility_residual(*this, i, j);
            for (int r = 0; r < q() && compatible_; ++r)
                for (int c = 0; c < q() && compatible_; ++c)
                    if (!res.at(r, c).is_zero() && !musym::is_zero(res.at(r, c)).zero())
                        compatible_ = false;
        }
}

MuForm MuForm::zero(const JetContext& ctx) {
    std::vector<ExprMatrix> ms(static_cast<size_t>(ctx.p()), ExprMatrix(ctx.q(), ctx.q()));
    return MuForm(ctx, std::move(ms));
}

MuForm MuForm::scalar(const JetContext& ctx, const std::vector<Expr>& lambdas) {
    if (static_cast<int>(lambdas.size()) != ctx.p())
        throw shape_error("scalar mu-form needs one lambda per independent variable");
    std::vector<ExprMatrix> ms;
    for (const auto& l : lambdas) ms.push_back(l * ExprMatrix::identity(ctx.q()));
    return MuForm(ctx, std::move(ms));
}

bool MuForm::is_zero() const {
    for (const auto& m : lambdas_)
        if (!m.is_zero()) return false;
    return true;
}

std::optional<std::vector<Expr>> MuForm::scalar_form() const {
    std::vector<Expr> ls;
    for (const auto& m : lambdas_) {
        Expr diag = m.at(0, 0);
        for (int r = 0; r < q(); ++r)
            for (int c = 0; c < q(); ++c) {
                if (r == c && m.at(r, c) != diag) return std::nullopt;
                if (r != c && !m.at(r, c).is_zero()) return std::nullopt;
            }
        ls.push_back(diag);
    }
    return ls;
}

void MuForm::require_compatible() const {
    if (!compatible_)
        throw math_error("mu-form fails the compatibility (horizontal Maurer-Cartan) condition");
}

CompatibilityReport check_compatibility(const MuForm& mu, const OracleConfig& cfg) {
    CompatibilityReport rep;
    for (int i = 0; i < mu.p(); ++i)
        for (int j = i + 1; j < mu.p(); ++j) {
            CompatibilityPair pair;
            pair.i = i;
            pair.j = j;
            pair.residual = compatibility_residual(mu, i, j);
            std::vector<ZeroVerdict> vs;
            for (int r = 0; r < mu.q(); ++r)
                for (int c = 0; c < mu.q(); ++c) vs.push_back(is_zero(pair.residual.at(r, c), cfg));
            pair.verdict = combine(vs);
            rep.pairs.push_back(std::move(pair));
        }
    return rep; // p = 1 leaves no pairs: the condition is vacuous
}

std::vector<Expr> nabla(const MuForm& mu, int i, const std::vector<Expr>& v) {
    if (static_cast<int>(v.size()) != mu.q()) throw shape_error("nabla: vector must have q rows");
    std::vector<Expr> dv(v.size());
    for (size_t a = 0; a < v.size(); ++a) dv[a] = mu.ctx().total_derivative(v[a], i);
    auto lv = mu.matrix(i).apply(v);
    for (size_t a = 0; a < v.size(); ++a) dv[a] += lv[a];
    return dv;
}

ExprMatrix nabla(const MuForm& mu, int i, const ExprMatrix& m) {
    if (m.rows() != mu.q()) throw shape_error("nabla: matrix must have q rows");
    ExprMatrix d(m.rows(), m.cols());
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) d.at(r, c) = mu.ctx().total_derivative(m.at(r, c), i);
    return d + mu.matrix(i) * m;
}

std::vector<Expr> nabla_multi(const MuForm& mu, const MultiIndex& J, const std::vector<Expr>& v) {
    mu.require_compatible();
    std::vector<Expr> r = v;
    for (int i = mu.p() - 1; i >= 0; --i)
        for (int k = 0; k < J[i]; ++k) r = nabla(mu, i, r);
    return r;
}

ZeroVerdict zero_curvature_check(const MuForm& mu, const std::vector<Expr>& v,
                                 const OracleConfig& cfg) {
    std::vector<ZeroVerdict> vs;
    for (int i = 0; i < mu.p(); ++i)
        for (int j = i + 1; j < mu.p(); ++j) {
            auto a = nabla(mu, i, nabla(mu, j, v));
            auto b = nabla(mu, j, nabla(mu, i, v));
            for (size_t k = 0; k < a.size(); ++k) vs.push_back(is_zero(a[k] - b[k], cfg));
        }
    if (vs.empty()) vs.push_back({Verdict::ZeroSymbolic, Expr(), {}});
    return combine(vs);
}

MuForm lambda_from_gamma(const GaugeFunction& gf, const JetContext& ctx) {
    if (gf.matrix) {
        const ExprMatrix& g = *gf.matrix;
        if (g.rows() != ctx.q() || g.cols() != ctx.q())
            throw shape_error("matrix gauge function must be q x q");
        if (is_zero(g.determinant()).zero())
            throw math_error("gauge function is identically singular");
        ExprMatrix ginv = g.inverse();
        std::vector<ExprMatrix> lam;
        for (int i = 0; i < ctx.p(); ++i) {
            ExprMatrix d(ctx.q(), ctx.q());
            for (int r = 0; r < ctx.q(); ++r)
                for (int c = 0; c < ctx.q(); ++c) d.at(r, c) = ctx.total_derivative(g.at(r, c), i);
            lam.push_back(ginv * d);
        }
        return MuForm(ctx, std::move(lam));
    }
    if (is_zero(gf.gamma).zero()) throw math_error("gauge function is identically singular");
    std::vector<Expr> ls;
    for (int i = 0; i < ctx.p(); ++i)
        ls.push_back(ctx.total_derivative(gf.gamma, i) / gf.gamma);
    return MuForm::scalar(ctx, ls);
}

namespace {

// Antiderivative of f with respect to z for fractions whose terms are
// monomial in z; k = -1 integrates to log. Returns nullopt otherwise.
std::optional<Expr> antiderivative_simple(const Expr& f, const SymbolId& z, const JetContext&) {
    if (f.is_zero()) return Expr();
    Expr zvar = Expr::symbol(z);
    Expr acc;
    // denominator may carry z only as a monomial power; split term-wise
    const Poly& den = f.den();
    int den_z = 0;
    Expr den_rest(1);
    if (!f.den_is_one()) {
        if (den.size() != 1) {
            // multi-term denominator: only allowed when z-free
            Expr dexpr = Expr::from_fraction(den, Poly{{Monomial{}, Rational(1)}});
            if (dexpr.depends_on(z)) return std::nullopt;
            den_rest = dexpr;
        } else {
            Monomial m = den.begin()->first;
            Rational c = den.begin()->second;
            Monomial rest;
            for (const auto& fac : m) {
                if (fac.atom->kind == AtomKind::Symbol && fac.atom->sym == z) den_z = fac.exp;
                else {
                    if (atom_expr(fac.atom).depends_on(z)) return std::nullopt;
                    rest.push_back(fac);
                }
            }
            Poly dr;
            dr.emplace(rest, c);
            den_rest = Expr::from_fraction(dr, Poly{{Monomial{}, Rational(1)}});
        }
    }
    for (const auto& [m, c] : f.num()) {
        int kz = 0;
        Monomial rest;
        for (const auto& fac : m) {
            if (fac.atom->kind == AtomKind::Symbol && fac.atom->sym == z) kz = fac.exp;
            else {
                if (atom_expr(fac.atom).depends_on(z)) return std::nullopt;
                rest.push_back(fac);
            }
        }
        Poly pr;
        pr.emplace(rest, c);
        Expr base = Expr::from_fraction(pr, Poly{{Monomial{}, Rational(1)}}) / den_rest;
        int net = kz - den_z;
        if (net == -1) acc += base * log(zvar);
        else acc += base * zvar.pow(Rational(net + 1)) / Expr(net + 1);
    }
    return acc;
}

} // namespace

GammaResult gamma_from_lambda(const MuForm& mu, const OracleConfig& cfg) {
    auto scal = mu.scalar_form();
    if (!scal)
        return {GammaStatus::NotFound, Expr(),
                "mu-form is not scalar (Lambda_i are not multiples of the identity)"};
    const JetContext& ctx = mu.ctx();
    std::vector<Expr> lam = *scal;

    // consistency: D_i lambda_j = D_j lambda_i
    for (int i = 0; i < ctx.p(); ++i)
        for (int j = i + 1; j < ctx.p(); ++j) {
            Expr r = ctx.total_derivative(lam[size_t(j)], i) -
                     ctx.total_derivative(lam[size_t(i)], j);
            if (!is_zero(r, cfg).zero())
                return {GammaStatus::Inconsistent, Expr(),
                        "cross-derivative consistency fails: the system has no potential"};
        }

    // rational part: candidate G = lcm of the lambda denominators
    Expr G(1);
    for (const auto& l : lam) {
        Expr d = Expr::from_fraction(l.den(), Poly{{Monomial{}, Rational(1)}});
        Expr g = expr_gcd(G, d);
        G = G * d / g;
    }
    std::vector<Expr> residue;
    for (int i = 0; i < ctx.p(); ++i)
        residue.push_back(lam[size_t(i)] - ctx.total_derivative(G, i) / G);

    // potential for the affine residue: partials wrt x^i and u^a
    std::map<SymbolId, Expr> kill_jets;
    std::set<SymbolId> all;
    for (const auto& r : residue) r.collect_symbols(all);
    for (const auto& s : all)
        if (s.is_jet() && s.order() > 0) kill_jets.emplace(s, Expr());

    std::vector<std::pair<SymbolId, Expr>> partials;
    for (int i = 0; i < ctx.p(); ++i)
        partials.push_back({ctx.independent(i), residue[size_t(i)].substitute(kill_jets)});
    for (int a = 0; a < ctx.q(); ++a) {
        Expr d;
        for (int i = 0; i < ctx.p(); ++i) {
            SymbolId ua_i = ctx.jet(a, MultiIndex::zeros(ctx.p()).bumped(i));
            Expr cand = residue[size_t(i)].diff(ua_i);
            if (!cand.is_zero()) {
                d = cand;
                break;
            }
        }
        partials.push_back({ctx.dependent(a), d});
    }

    Expr phi;
    for (const auto& [z, h] : partials) {
        Expr g = h - phi.diff(z);
        if (g.is_zero()) continue;
        auto part = antiderivative_simple(g, z, ctx);
        if (!part)
            return {GammaStatus::NotFound, Expr(),
                    "residue is not integrable by term-wise antidifferentiation"};
        phi += *part;
    }

    Expr gamma = G * exp(phi);
    for (int i = 0; i < ctx.p(); ++i) {
        Expr check = lam[size_t(i)] - ctx.total_derivative(gamma, i) / gamma;
        if (!check.is_zero())
            return {GammaStatus::NotFound, Expr(), "candidate gauge function failed verification"};
    }
    return {GammaStatus::Found, gamma, ""};
}

EigenResult common_eigenvector_check(const MuForm& mu, const std::vector<Expr>& phi,
                                     const OracleConfig& cfg) {
    if (static_cast<int>(phi.size()) != mu.q()) throw shape_error("phi must have q components");
    int pivot = -1;
    for (int a = 0; a < mu.q(); ++a)
        if (!phi[size_t(a)].is_zero() && !is_zero(phi[size_t(a)], cfg).zero()) {
            pivot = a;
            break;
        }
    if (pivot < 0) throw math_error("phi is identically zero");
    EigenResult res;
    for (int i = 0; i < mu.p(); ++i) {
        auto lv = mu.matrix(i).apply(phi);
        Expr lam = lv[size_t(pivot)] / phi[size_t(pivot)];
        for (int a = 0; a < mu.q(); ++a) {
            Expr diff = lv[size_t(a)] - lam * phi[size_t(a)];
            if (!is_zero(diff, cfg).zero()) return {false, {}};
        }
        res.lambdas.push_back(lam);
    }
    res.found = true;
    return res;
}

} // namespace musym
