#include "musym/expr.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <optional>
#include <sstream>

namespace musym {

namespace {

long long fdiv(long long a, long long b) { // floor division, b > 0
    long long q = a / b, r = a % b;
    return (r != 0 && r < 0) ? q - 1 : q;
}

int kind_rank(AtomKind k) { return static_cast<int>(k); }

Poly poly_one() {
    Poly p;
    p.emplace(Monomial{}, Rational(1));
    return p;
}

bool poly_is_one(const Poly& p) {
    return p.size() == 1 && p.begin()->first.empty() && p.begin()->second.is_one();
}

bool poly_is_const(const Poly& p) {
    return p.empty() || (p.size() == 1 && p.begin()->first.empty());
}

void poly_add_term(Poly& p, const Monomial& m, const Rational& c) {
    if (c.is_zero()) return;
    auto it = p.find(m);
    if (it == p.end()) {
        p.emplace(m, c);
    } else {
        it->second += c;
        if (it->second.is_zero()) p.erase(it);
    }
}

Poly poly_neg(const Poly& p) {
    Poly r;
    for (const auto& [m, c] : p) r.emplace(m, -c);
    return r;
}

Poly poly_add(const Poly& a, const Poly& b) {
    Poly r = a;
    for (const auto& [m, c] : b) poly_add_term(r, m, c);
    return r;
}

Poly poly_scale(const Poly& p, const Rational& s) {
    Poly r;
    if (s.is_zero()) return r;
    for (const auto& [m, c] : p) r.emplace(m, c * s);
    return r;
}

// gcd of rational magnitudes: gcd of numerators over lcm of denominators.
Rational rat_gcd(const Rational& a, const Rational& b) {
    long long n = std::gcd(a.num() < 0 ? -a.num() : a.num(), b.num() < 0 ? -b.num() : b.num());
    __int128 l = static_cast<__int128>(a.den() / std::gcd(a.den(), b.den())) * b.den();
    if (l > INT64_MAX) throw math_error("rational overflow");
    return Rational(n, static_cast<long long>(l));
}

// Content with the sign of the leading (largest) term.
Rational poly_content_signed(const Poly& p) {
    Rational g(0);
    for (const auto& [m, c] : p) g = g.is_zero() ? c.abs() : rat_gcd(g, c);
    if (!p.empty() && p.rbegin()->second.is_negative()) g = -g;
    return g;
}

Monomial common_monomial(const Poly& p) {
    Monomial g;
    bool first = true;
    for (const auto& [m, c] : p) {
        if (first) {
            g = m;
            first = false;
            continue;
        }
        Monomial next;
        size_t i = 0, j = 0;
        while (i < g.size() && j < m.size()) {
            int cmp = compare_atoms(g[i].atom, m[j].atom);
            if (cmp < 0) ++i;
            else if (cmp > 0) ++j;
            else {
                next.push_back({g[i].atom, std::min(g[i].exp, m[j].exp)});
                ++i, ++j;
            }
        }
        g = std::move(next);
        if (g.empty()) break;
    }
    return g;
}

Monomial mono_gcd(const Monomial& a, const Monomial& b) {
    Monomial g;
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        int cmp = compare_atoms(a[i].atom, b[j].atom);
        if (cmp < 0) ++i;
        else if (cmp > 0) ++j;
        else {
            g.push_back({a[i].atom, std::min(a[i].exp, b[j].exp)});
            ++i, ++j;
        }
    }
    return g;
}

std::optional<Monomial> mono_div(const Monomial& m, const Monomial& d) {
    Monomial r;
    size_t i = 0, j = 0;
    while (i < m.size()) {
        if (j < d.size()) {
            int cmp = compare_atoms(m[i].atom, d[j].atom);
            if (cmp == 0) {
                int e = m[i].exp - d[j].exp;
                if (e < 0) return std::nullopt;
                if (e > 0) r.push_back({m[i].atom, e});
                ++i, ++j;
                continue;
            }
            if (cmp > 0) return std::nullopt; // d has an atom m lacks
        }
        r.push_back(m[i]);
        ++i;
    }
    if (j < d.size()) return std::nullopt;
    return r;
}

// --- monomial multiplication with atom normalization ------------------------
//
// Invariants kept inside canonical monomials: exponents >= 1; at most one Exp
// atom per kernel direction; at most one Root atom per base, with exponent in
// [1, root-1]. Merging can break these, so products renormalize. The result
// stops being a monomial only when an integer power of a multi-term Root base
// appears; that case returns nullopt and callers rebuild through the Expr
// constructors.

struct MulOut {
    Rational coeff{1};
    Monomial mono;
};

bool exp_same_direction(const AtomData& a, const AtomData& b) {
    // Kernel numerators are single terms; direction ignores the 1/r coefficient.
    const Poly& na = a.arg.num();
    const Poly& nb = b.arg.num();
    if (compare_monomials(na.begin()->first, nb.begin()->first) != 0) return false;
    return compare_polys(a.arg.den(), b.arg.den()) == 0;
}

AtomPtr make_exp_atom_from_direction(const AtomData& sample, long long r) {
    Poly kn;
    kn.emplace(sample.arg.num().begin()->first, Rational(1, r));
    Expr kernel = Expr::from_fraction(std::move(kn), sample.arg.den());
    auto a = std::make_shared<AtomData>();
    a->kind = AtomKind::Exp;
    a->arg = kernel;
    return a;
}

Expr rational_pow_expr(const Rational& c, const Rational& e);

std::optional<MulOut> normalize_factors(std::vector<Factor> fs) {
    MulOut out;
    std::vector<Factor> plain;
    struct ExpGroup {
        size_t rep;
        Rational total;
    };
    struct RootGroup {
        size_t rep;
        Rational total;
    };
    std::vector<ExpGroup> exps;
    std::vector<RootGroup> roots;

    for (size_t i = 0; i < fs.size(); ++i) {
        const auto& f = fs[i];
        if (f.exp == 0) continue;
        if (f.atom->kind == AtomKind::Exp) {
            Rational contrib = f.atom->arg.num().begin()->second * Rational(f.exp);
            bool merged = false;
            for (auto& g : exps)
                if (exp_same_direction(*fs[g.rep].atom, *f.atom)) {
                    g.total += contrib;
                    merged = true;
                    break;
                }
            if (!merged) exps.push_back({i, contrib});
        } else if (f.atom->kind == AtomKind::Root) {
            Rational contrib = Rational(f.exp, f.atom->root);
            bool merged = false;
            for (auto& g : roots)
                if (fs[g.rep].atom->arg == f.atom->arg) {
                    g.total += contrib;
                    merged = true;
                    break;
                }
            if (!merged) roots.push_back({i, contrib});
        } else {
            bool merged = false;
            for (auto& q : plain)
                if (compare_atoms(q.atom, f.atom) == 0) {
                    q.exp += f.exp;
                    merged = true;
                    break;
                }
            if (!merged) plain.push_back(f);
        }
    }

    for (const auto& g : exps) {
        if (g.total.is_zero()) continue;
        if (g.total.den() == 1 && fs[g.rep].atom->arg.num().begin()->second.is_one()) {
            plain.push_back({fs[g.rep].atom, static_cast<int>(g.total.num())});
        } else {
            AtomPtr a = make_exp_atom_from_direction(*fs[g.rep].atom, g.total.den());
            plain.push_back({a, static_cast<int>(g.total.num())});
        }
    }

    for (const auto& g : roots) {
        if (g.total.is_zero()) continue;
        const Expr& base = fs[g.rep].atom->arg;
        long long r = g.total.den(), p = g.total.num();
        long long s = fdiv(p, r), t = p - s * r; // 0 <= t < r
        if (s != 0) {
            if (base.is_rational()) {
                out.coeff *= Rational::pow(base.rational_value(), s);
            } else if (base.den_is_one() && base.num().size() == 1 &&
                       base.num().begin()->second.is_one() &&
                       base.num().begin()->first.size() == 1 &&
                       base.num().begin()->first[0].exp == 1) {
                plain.push_back({base.num().begin()->first[0].atom, static_cast<int>(s)});
            } else {
                return std::nullopt; // integer power of a multi-term base
            }
        }
        if (t != 0) {
            if (r == static_cast<long long>(fs[g.rep].atom->root) && t == p) {
                plain.push_back({fs[g.rep].atom, static_cast<int>(t)});
            } else {
                auto a = std::make_shared<AtomData>();
                a->kind = AtomKind::Root;
                a->arg = base;
                a->root = static_cast<int>(r);
                plain.push_back({a, static_cast<int>(t)});
            }
        }
    }

    // plain exponents may have merged to zero or gone negative (never expected
    // here since inputs are monomials); drop zeros and sort.
    Monomial m;
    for (auto& f : plain)
        if (f.exp != 0) m.push_back(f);
    std::sort(m.begin(), m.end(),
              [](const Factor& x, const Factor& y) { return compare_atoms(x.atom, y.atom) < 0; });
    // combine duplicates that sorting may have revealed
    Monomial m2;
    for (auto& f : m) {
        if (!m2.empty() && compare_atoms(m2.back().atom, f.atom) == 0) m2.back().exp += f.exp;
        else m2.push_back(f);
    }
    m2.erase(std::remove_if(m2.begin(), m2.end(), [](const Factor& f) { return f.exp == 0; }),
             m2.end());
    out.mono = std::move(m2);
    return out;
}

std::optional<MulOut> mono_mul(const Monomial& a, const Monomial& b) {
    if (a.empty()) return MulOut{Rational(1), b};
    if (b.empty()) return MulOut{Rational(1), a};
    std::vector<Factor> fs;
    fs.reserve(a.size() + b.size());
    fs.insert(fs.end(), a.begin(), a.end());
    fs.insert(fs.end(), b.begin(), b.end());
    return normalize_factors(std::move(fs));
}

std::optional<Poly> poly_mul_checked(const Poly& a, const Poly& b) {
    Poly r;
    for (const auto& [ma, ca] : a)
        for (const auto& [mb, cb] : b) {
            auto p = mono_mul(ma, mb);
            if (!p) return std::nullopt;
            poly_add_term(r, p->mono, ca * cb * p->coeff);
        }
    return r;
}

Poly poly_mul_strict(const Poly& a, const Poly& b) {
    auto r = poly_mul_checked(a, b);
    if (!r) throw math_error("internal: non-monomial product in polynomial context");
    return *r;
}

std::optional<Poly> poly_pow_checked(const Poly& p, long long n) {
    Poly acc = poly_one();
    for (long long k = 0; k < n; ++k) {
        auto r = poly_mul_checked(acc, p);
        if (!r) return std::nullopt;
        acc = std::move(*r);
    }
    return acc;
}

// --- multivariate gcd (primitive PRS) ---------------------------------------

bool poly_safe_for_gcd(const Poly& p) {
    for (const auto& [m, c] : p)
        for (const auto& f : m)
            if (f.atom->kind == AtomKind::Root && !f.atom->arg.is_rational() &&
                f.atom->arg.num().size() > 1)
                return false;
    return true;
}

Poly poly_div_mono(const Poly& p, const Monomial& d) {
    if (d.empty()) return p;
    Poly r;
    for (const auto& [m, c] : p) {
        auto q = mono_div(m, d);
        if (!q) throw math_error("internal: inexact monomial division");
        r.emplace(std::move(*q), c);
    }
    return r;
}

Poly make_primitive(const Poly& p) {
    if (p.empty()) return p;
    Poly q = poly_div_mono(p, common_monomial(p));
    Rational c = poly_content_signed(q);
    return poly_scale(q, c.inverse());
}

std::optional<Poly> poly_div_exact(const Poly& a0, const Poly& b) {
    if (b.empty()) return std::nullopt;
    Poly a = a0, q;
    const auto& ltb = *b.rbegin();
    int guard = 0;
    while (!a.empty()) {
        if (++guard > 20000) return std::nullopt;
        const auto lta = *a.rbegin();
        auto md = mono_div(lta.first, ltb.first);
        if (!md) return std::nullopt;
        Rational c = lta.second / ltb.second;
        poly_add_term(q, *md, c);
        for (const auto& [mb, cb] : b) {
            auto mm = mono_mul(*md, mb);
            if (!mm) return std::nullopt;
            poly_add_term(a, mm->mono, -(c * cb * mm->coeff));
        }
    }
    return q;
}

Poly poly_gcd(const Poly& a, const Poly& b);

struct UniPoly {
    std::vector<Poly> c; // c[k] multiplies z^k; kept trimmed
};

int udeg(const UniPoly& u) { return static_cast<int>(u.c.size()) - 1; }

void utrim(UniPoly& u) {
    while (!u.c.empty() && u.c.back().empty()) u.c.pop_back();
}

UniPoly to_uni(const Poly& p, const AtomPtr& z) {
    UniPoly u;
    for (const auto& [m, c] : p) {
        int k = 0;
        Monomial rest;
        for (const auto& f : m) {
            if (compare_atoms(f.atom, z) == 0) k = f.exp;
            else rest.push_back(f);
        }
        if (static_cast<size_t>(k) >= u.c.size()) u.c.resize(static_cast<size_t>(k) + 1);
        poly_add_term(u.c[static_cast<size_t>(k)], rest, c);
    }
    utrim(u);
    return u;
}

Poly from_uni(const UniPoly& u, const AtomPtr& z) {
    Poly p;
    for (size_t k = 0; k < u.c.size(); ++k) {
        if (u.c[k].empty()) continue;
        Monomial zk;
        if (k > 0) zk.push_back({z, static_cast<int>(k)});
        for (const auto& [m, c] : u.c[k]) {
            auto mm = mono_mul(m, zk);
            if (!mm) throw math_error("internal: non-monomial in univariate rebuild");
            poly_add_term(p, mm->mono, c * mm->coeff);
        }
    }
    return p;
}

Poly uni_content(const UniPoly& u) {
    Poly g;
    for (const auto& c : u.c) {
        if (c.empty()) continue;
        g = g.empty() ? c : poly_gcd(g, c);
        if (poly_is_const(g) && !g.empty()) break;
    }
    return g.empty() ? poly_one() : g;
}

std::optional<UniPoly> uni_div_content(const UniPoly& u, const Poly& content) {
    UniPoly r;
    r.c.resize(u.c.size());
    for (size_t k = 0; k < u.c.size(); ++k) {
        if (u.c[k].empty()) continue;
        auto q = poly_div_exact(u.c[k], content);
        if (!q) return std::nullopt;
        r.c[k] = std::move(*q);
    }
    utrim(r);
    return r;
}

// Pseudo-remainder of A by B in z.
UniPoly uni_prem(UniPoly A, const UniPoly& B) {
    const Poly& lb = B.c.back();
    int guard = 0;
    while (udeg(A) >= udeg(B) && !A.c.empty()) {
        if (++guard > 4000) throw math_error("internal: pseudo-division diverged");
        int k = udeg(A) - udeg(B);
        Poly lr = A.c.back();
        UniPoly next;
        next.c.resize(A.c.size());
        for (int i = 0; i <= udeg(A); ++i) {
            Poly t = A.c[static_cast<size_t>(i)].empty()
                         ? Poly{}
                         : poly_mul_strict(A.c[static_cast<size_t>(i)], lb);
            if (i >= k && i - k <= udeg(B) && !B.c[static_cast<size_t>(i - k)].empty())
                t = poly_add(t, poly_neg(poly_mul_strict(B.c[static_cast<size_t>(i - k)], lr)));
            next.c[static_cast<size_t>(i)] = std::move(t);
        }
        next.c.pop_back(); // leading term cancels by construction
        utrim(next);
        A = std::move(next);
    }
    return A;
}

Poly poly_gcd(const Poly& a0, const Poly& b0) {
    if (a0.empty()) return b0;
    if (b0.empty()) return a0;
    Monomial mg = mono_gcd(common_monomial(a0), common_monomial(b0));
    Poly a = make_primitive(a0), b = make_primitive(b0);

    Poly result;
    if (poly_is_const(a) || poly_is_const(b)) {
        result = poly_one();
    } else {
        // shared atom of smallest order; none shared means the primitive gcd is 1
        AtomPtr z;
        for (const auto& [m, c] : a) {
            for (const auto& f : m) {
                bool in_b = false;
                for (const auto& [mb, cb] : b) {
                    for (const auto& fb : mb)
                        if (compare_atoms(fb.atom, f.atom) == 0) {
                            in_b = true;
                            break;
                        }
                    if (in_b) break;
                }
                if (in_b && (!z || compare_atoms(f.atom, z) < 0)) z = f.atom;
            }
        }
        if (!z) {
            result = poly_one();
        } else {
            UniPoly ua = to_uni(a, z), ub = to_uni(b, z);
            Poly ca = uni_content(ua), cb = uni_content(ub);
            auto pa = uni_div_content(ua, ca), pb = uni_div_content(ub, cb);
            if (!pa || !pb) return poly_one();
            Poly cg = poly_gcd(ca, cb);
            UniPoly A = std::move(*pa), B = std::move(*pb);
            if (udeg(A) < udeg(B)) std::swap(A, B);
            while (!B.c.empty()) {
                UniPoly R = uni_prem(A, B);
                A = std::move(B);
                if (R.c.empty()) {
                    B = UniPoly{};
                } else {
                    Poly cr = uni_content(R);
                    auto pr = uni_div_content(R, cr);
                    if (!pr) return poly_one();
                    B = std::move(*pr);
                }
            }
            Poly g = make_primitive(from_uni(A, z));
            result = poly_mul_strict(cg, g);
        }
    }
    if (!mg.empty()) {
        Poly withmono;
        for (const auto& [m, c] : result) {
            auto mm = mono_mul(m, mg);
            if (!mm) throw math_error("internal: non-monomial gcd rebuild");
            poly_add_term(withmono, mm->mono, c * mm->coeff);
        }
        return withmono;
    }
    return result;
}

// --- printing ----------------------------------------------------------------

std::string poly_str(const Poly& p);

std::string expr_str_parenthesized(const Expr& e) {
    std::string s = e.str();
    bool needs = false;
    int depth = 0;
    for (size_t i = 0; i < s.size(); ++i) {
        char ch = s[i];
        if (ch == '(') ++depth;
        else if (ch == ')') --depth;
        else if (depth == 0 && (ch == '+' || (ch == '-' && i > 0) || ch == '*' || ch == '/'))
            needs = true;
    }
    if (s.size() > 0 && s[0] == '-') needs = true;
    return needs ? "(" + s + ")" : s;
}

std::string atom_base_str(const AtomPtr& a) {
    switch (a->kind) {
        case AtomKind::Symbol: return a->sym.name;
        case AtomKind::Log: return "log(" + a->arg.str() + ")";
        case AtomKind::Sin: return "sin(" + a->arg.str() + ")";
        case AtomKind::Cos: return "cos(" + a->arg.str() + ")";
        case AtomKind::UFunc: {
            std::string s = a->func;
            for (int k = 0; k < a->deriv; ++k) s += "'";
            return s + "(" + a->arg.str() + ")";
        }
        default: return "?";
    }
}

std::string factor_str(const Factor& f) {
    if (f.atom->kind == AtomKind::Exp) {
        Expr shown = Expr(static_cast<long long>(f.exp)) * f.atom->arg;
        return "exp(" + shown.str() + ")";
    }
    if (f.atom->kind == AtomKind::Root) {
        Rational e(f.exp, f.atom->root);
        return expr_str_parenthesized(f.atom->arg) + "^(" + e.str() + ")";
    }
    std::string s = atom_base_str(f.atom);
    if (f.exp != 1) s += "^" + std::to_string(f.exp);
    return s;
}

std::string term_str(const Monomial& m, const Rational& coeff_abs) {
    std::string s;
    if (m.empty()) return coeff_abs.str();
    if (!coeff_abs.is_one()) {
        if (coeff_abs.is_integer()) s += coeff_abs.str() + "*";
        else s += "(" + coeff_abs.str() + ")*";
    }
    for (size_t i = 0; i < m.size(); ++i) {
        if (i) s += "*";
        s += factor_str(m[i]);
    }
    return s;
}

std::string poly_str(const Poly& p) {
    if (p.empty()) return "0";
    std::string s;
    bool first = true;
    for (auto it = p.rbegin(); it != p.rend(); ++it) {
        const Rational& c = it->second;
        if (first) {
            if (c.is_negative()) s += "-";
            first = false;
        } else {
            s += c.is_negative() ? " - " : " + ";
        }
        s += term_str(it->first, c.abs());
    }
    return s;
}

} // namespace

// --- comparisons --------------------------------------------------------------

int compare_atoms(const AtomPtr& a, const AtomPtr& b) {
    if (a.get() == b.get()) return 0;
    if (a->kind != b->kind) return kind_rank(a->kind) < kind_rank(b->kind) ? -1 : 1;
    switch (a->kind) {
        case AtomKind::Symbol: return a->sym.compare(b->sym);
        case AtomKind::Exp:
        case AtomKind::Log:
        case AtomKind::Sin:
        case AtomKind::Cos: return a->arg.compare(b->arg);
        case AtomKind::UFunc: {
            if (a->func != b->func) return a->func < b->func ? -1 : 1;
            if (a->deriv != b->deriv) return a->deriv < b->deriv ? -1 : 1;
            return a->arg.compare(b->arg);
        }
        case AtomKind::Root: {
            if (a->root != b->root) return a->root < b->root ? -1 : 1;
            return a->arg.compare(b->arg);
        }
    }
    return 0;
}

// Lexicographic order: atoms earlier in the global order are more significant,
// higher exponent on the first differing atom wins. This is a true monomial
// order (multiplicative), which exact division relies on.
int compare_monomials(const Monomial& a, const Monomial& b) {
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        int c = compare_atoms(a[i].atom, b[j].atom);
        if (c < 0) return 1;  // a has the more significant atom
        if (c > 0) return -1;
        if (a[i].exp != b[j].exp) return a[i].exp > b[j].exp ? 1 : -1;
        ++i, ++j;
    }
    if (i < a.size()) return 1;
    if (j < b.size()) return -1;
    return 0;
}

int compare_polys(const Poly& a, const Poly& b) {
    auto ia = a.begin(), ib = b.begin();
    for (; ia != a.end() && ib != b.end(); ++ia, ++ib) {
        int c = compare_monomials(ia->first, ib->first);
        if (c != 0) return c;
        c = ia->second.compare(ib->second);
        if (c != 0) return c;
    }
    if (ia != a.end()) return 1;
    if (ib != b.end()) return -1;
    return 0;
}

// --- Expr basics ----------------------------------------------------------------

static const std::shared_ptr<const ExprData>& zero_data() {
    static const auto d = std::make_shared<const ExprData>(ExprData{Poly{}, poly_one()});
    return d;
}

Expr::Expr() : d_(zero_data()) {}

Expr::Expr(long long n) {
    if (n == 0) {
        d_ = zero_data();
        return;
    }
    Poly p;
    p.emplace(Monomial{}, Rational(n));
    d_ = std::make_shared<const ExprData>(ExprData{std::move(p), poly_one()});
}

Expr::Expr(const Rational& r) {
    if (r.is_zero()) {
        d_ = zero_data();
        return;
    }
    Poly p;
    p.emplace(Monomial{}, r);
    d_ = std::make_shared<const ExprData>(ExprData{std::move(p), poly_one()});
}

Expr Expr::symbol(const SymbolId& s) {
    auto a = std::make_shared<AtomData>();
    a->kind = AtomKind::Symbol;
    a->sym = s;
    return atom_expr(a);
}

Expr atom_expr(const AtomPtr& a) {
    Poly p;
    p.emplace(Monomial{Factor{a, 1}}, Rational(1));
    return Expr::from_fraction(std::move(p), poly_one());
}

const Poly& Expr::num() const { return d_->num; }
const Poly& Expr::den() const { return d_->den; }
bool Expr::den_is_one() const { return poly_is_one(d_->den); }
bool Expr::is_zero() const { return d_->num.empty(); }
bool Expr::is_one() const { return poly_is_one(d_->num) && poly_is_one(d_->den); }
bool Expr::is_rational() const { return den_is_one() && poly_is_const(d_->num); }

Rational Expr::rational_value() const {
    if (!is_rational()) throw math_error("expression is not a rational constant");
    return d_->num.empty() ? Rational(0) : d_->num.begin()->second;
}

Expr Expr::from_fraction(Poly num, Poly den) {
    if (den.empty()) throw math_error("division by zero");
    if (num.empty()) return Expr();

    // denominator: integer, primitive, positive leading coefficient
    Rational dc = poly_content_signed(den);
    if (!dc.is_one()) {
        den = poly_scale(den, dc.inverse());
        num = poly_scale(num, dc.inverse());
    }

    // cancel the common monomial factor
    Monomial cm = mono_gcd(common_monomial(num), common_monomial(den));
    if (!cm.empty()) {
        num = poly_div_mono(num, cm);
        den = poly_div_mono(den, cm);
    }

    if (den.size() > 1 && poly_safe_for_gcd(num) && poly_safe_for_gcd(den)) {
        // Coefficient swell in the pseudo-remainder sequence can overflow the
        // 64-bit rationals on large inputs; the fraction is left unreduced
        // then, which only affects the printed form, never zero-testing.
        try {
            Poly g = poly_gcd(num, den);
            if (!poly_is_const(g)) {
                auto qn = poly_div_exact(num, g);
                auto qd = poly_div_exact(den, g);
                if (qn && qd) {
                    num = std::move(*qn);
                    den = std::move(*qd);
                    Rational dc2 = poly_content_signed(den);
                    if (!dc2.is_one()) {
                        den = poly_scale(den, dc2.inverse());
                        num = poly_scale(num, dc2.inverse());
                    }
                }
            }
        } catch (const math_error&) {
            // keep the unreduced fraction
        }
    }
    return Expr(std::make_shared<const ExprData>(ExprData{std::move(num), std::move(den)}));
}

int Expr::compare(const Expr& o) const {
    if (d_.get() == o.d_.get()) return 0;
    int c = compare_polys(d_->num, o.d_->num);
    if (c != 0) return c;
    return compare_polys(d_->den, o.d_->den);
}

// --- arithmetic -----------------------------------------------------------------

namespace {

Expr poly_expr(const Poly& p) { return Expr::from_fraction(p, poly_one()); }

Expr term_expr(const Rational& c, const Monomial& m) {
    Poly p;
    p.emplace(m, c);
    return Expr::from_fraction(std::move(p), poly_one());
}

Expr term_pow_int(const AtomPtr& a, long long n) {
    if (n == 0) return Expr(1);
    Poly p;
    p.emplace(Monomial{Factor{a, static_cast<int>(n < 0 ? -n : n)}}, Rational(1));
    if (n > 0) return Expr::from_fraction(std::move(p), poly_one());
    return Expr::from_fraction(poly_one(), std::move(p));
}

Expr atom_pow(const AtomPtr& a, const Rational& e);

Expr term_mul_general(const Rational& c1, const Monomial& m1, const Rational& c2,
                      const Monomial& m2) {
    auto fast = mono_mul(m1, m2);
    if (fast) return term_expr(c1 * c2 * fast->coeff, fast->mono);
    // rebuild through constructors, grouping multiplicatively compatible factors
    Expr r(c1 * c2);
    std::vector<Factor> fs;
    fs.insert(fs.end(), m1.begin(), m1.end());
    fs.insert(fs.end(), m2.begin(), m2.end());
    Expr exp_arg;
    std::vector<std::pair<Expr, Rational>> root_groups;
    std::vector<Factor> plain;
    for (const auto& f : fs) {
        if (f.atom->kind == AtomKind::Exp) {
            exp_arg += Expr(static_cast<long long>(f.exp)) * f.atom->arg;
        } else if (f.atom->kind == AtomKind::Root) {
            bool found = false;
            for (auto& [b, tot] : root_groups)
                if (b == f.atom->arg) {
                    tot += Rational(f.exp, f.atom->root);
                    found = true;
                    break;
                }
            if (!found) root_groups.push_back({f.atom->arg, Rational(f.exp, f.atom->root)});
        } else {
            plain.push_back(f);
        }
    }
    for (const auto& f : plain) r *= term_pow_int(f.atom, f.exp);
    if (!exp_arg.is_zero()) r *= exp(exp_arg);
    for (const auto& [b, tot] : root_groups) r *= b.pow(tot);
    return r;
}

Expr mul_general(const Expr& a, const Expr& b) {
    Expr num;
    for (const auto& [m1, c1] : a.num())
        for (const auto& [m2, c2] : b.num()) num += term_mul_general(c1, m1, c2, m2);
    Expr den(1);
    {
        Expr dacc;
        for (const auto& [m1, c1] : a.den())
            for (const auto& [m2, c2] : b.den()) dacc += term_mul_general(c1, m1, c2, m2);
        den = dacc;
    }
    return num / den;
}

} // namespace

Expr Expr::operator-() const {
    if (is_zero()) return *this;
    return Expr(std::make_shared<const ExprData>(ExprData{poly_neg(d_->num), d_->den}));
}

Expr operator+(const Expr& a, const Expr& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (compare_polys(a.den(), b.den()) == 0)
        return Expr::from_fraction(poly_add(a.num(), b.num()), a.den());
    auto n1 = poly_mul_checked(a.num(), b.den());
    auto n2 = poly_mul_checked(b.num(), a.den());
    auto dd = poly_mul_checked(a.den(), b.den());
    if (n1 && n2 && dd) return Expr::from_fraction(poly_add(*n1, *n2), std::move(*dd));
    Expr num = poly_expr(a.num()) * poly_expr(b.den()) + poly_expr(b.num()) * poly_expr(a.den());
    Expr den = poly_expr(a.den()) * poly_expr(b.den());
    return num / den;
}

Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

Expr operator*(const Expr& a, const Expr& b) {
    if (a.is_zero() || b.is_zero()) return Expr();
    if (a.is_one()) return b;
    if (b.is_one()) return a;
    auto n = poly_mul_checked(a.num(), b.num());
    auto d = poly_mul_checked(a.den(), b.den());
    if (n && d) return Expr::from_fraction(std::move(*n), std::move(*d));
    return mul_general(a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
    if (b.is_zero()) throw math_error("division by zero");
    if (a.is_zero()) return a;
    return a * b.pow(Rational(-1));
}

// --- powers ---------------------------------------------------------------------

namespace {

// Extracts r-th roots of a positive integer: n = outside^r * inside.
void int_root_extract(long long n, long long r, long long& outside, long long& inside) {
    outside = 1;
    inside = 1;
    long long m = n;
    for (long long p = 2; p * p <= m && p < 100000; ++p) {
        int k = 0;
        while (m % p == 0) {
            m /= p;
            ++k;
        }
        for (long long i = 0; i < k / r; ++i) outside *= p;
        for (long long i = 0; i < k % r; ++i) inside *= p;
    }
    if (m > 1) {
        // residual factor: only a perfect power check
        double est = std::pow(static_cast<double>(m), 1.0 / static_cast<double>(r));
        long long c = std::llround(est);
        bool perfect = false;
        for (long long cand = std::max(2ll, c - 1); cand <= c + 1; ++cand) {
            long long acc = 1;
            bool over = false;
            for (long long i = 0; i < r; ++i) {
                if (acc > m / cand) {
                    over = true;
                    break;
                }
                acc *= cand;
            }
            if (!over && acc == m) {
                outside *= cand;
                perfect = true;
                break;
            }
        }
        if (!perfect) inside *= m;
    }
}

Expr make_root_expr(const Expr& base, long long r, long long p) {
    // base^(p/r) with gcd(p, r)=1, r >= 2, base not rational. Negative
    // exponents invert the positive form so that u^(-1/2) and 1/sqrt(u)
    // reach the same structure.
    if (p < 0) return Expr(1) / make_root_expr(base, r, -p);
    long long s = fdiv(p, r), t = p - s * r;
    Expr res(1);
    if (s != 0) res = base.pow(Rational(s));
    if (t != 0) {
        auto a = std::make_shared<AtomData>();
        a->kind = AtomKind::Root;
        a->arg = base;
        a->root = static_cast<int>(r);
        res = res * term_pow_int(a, t);
    }
    return res;
}

Expr rational_pow_expr(const Rational& c, const Rational& e) {
    if (c.is_zero()) {
        if (e.sign() > 0) return Expr();
        throw math_error("zero raised to a non-positive fractional power");
    }
    if (e.is_integer()) return Expr(Rational::pow(c, e.num()));
    Rational cp = Rational::pow(c, e.num());
    long long r = e.den();
    int sign = cp.sign();
    Rational acp = cp.abs();
    long long on, in, od, id;
    int_root_extract(acp.num(), r, on, in);
    int_root_extract(acp.den(), r, od, id);
    Rational outside(on, od), inside(in, id);
    if (sign < 0) {
        if (r % 2 == 1) outside = -outside;
        else inside = -inside; // even root of a negative constant stays symbolic
    }
    if (inside.is_one()) return Expr(outside);
    return Expr(outside) * make_root_expr(Expr(inside), r, 1);
}

Expr atom_pow(const AtomPtr& a, const Rational& e) {
    if (e.is_zero()) return Expr(1);
    if (e.is_integer()) return term_pow_int(a, e.num());
    switch (a->kind) {
        case AtomKind::Exp: return exp(Expr(e) * a->arg);
        case AtomKind::Root: return a->arg.pow(e * Rational(1, a->root));
        default: return make_root_expr(atom_expr(a), e.den(), e.num());
    }
}

Expr pow_poly_frac(const Poly& p, const Rational& e) {
    // e is non-integer here
    if (poly_is_one(p)) return Expr(1);
    if (p.size() == 1) {
        const auto& [m, c] = *p.begin();
        Expr r = rational_pow_expr(c, e);
        for (const auto& f : m) r *= atom_pow(f.atom, e * Rational(f.exp));
        return r;
    }
    Rational content = poly_content_signed(p);
    Poly base = poly_scale(p, content.inverse());
    if (content.is_negative() && e.den() % 2 == 0) {
        base = poly_neg(base);
        content = -content;
    }
    return rational_pow_expr(content, e) * make_root_expr(poly_expr(base), e.den(), e.num());
}

} // namespace

Expr Expr::pow(const Rational& e) const {
    if (e.is_zero()) return Expr(1);
    if (e.is_one()) return *this;
    if (is_rational() && e.is_integer()) return Expr(Rational::pow(rational_value(), e.num()));
    if (is_rational()) return rational_pow_expr(rational_value(), e);
    if (e.is_integer()) {
        long long n = e.num();
        const Poly& pn = n > 0 ? d_->num : d_->den;
        const Poly& pd = n > 0 ? d_->den : d_->num;
        if (n < 0 && d_->num.empty()) throw math_error("division by zero");
        long long k = n < 0 ? -n : n;
        auto rn = poly_pow_checked(pn, k);
        auto rd = poly_pow_checked(pd, k);
        if (rn && rd) return from_fraction(std::move(*rn), std::move(*rd));
        Expr acc(1);
        Expr base = n > 0 ? *this : from_fraction(d_->den, d_->num);
        for (long long i = 0; i < k; ++i) acc = acc * base;
        return acc;
    }
    return pow_poly_frac(d_->num, e) * pow_poly_frac(d_->den, -e);
}

// --- function constructors -------------------------------------------------------

Expr exp(const Expr& x) {
    if (x.is_zero()) return Expr(1);
    Expr acc(1);
    const Poly& q = x.den();
    bool qone = poly_is_one(q);
    for (const auto& [m, c] : x.num()) {
        if (qone && m.size() == 1 && m[0].exp == 1 && m[0].atom->kind == AtomKind::Log) {
            acc *= m[0].atom->arg.pow(c); // exp(c*log w) = w^c
            continue;
        }
        long long r = c.den(), p = c.num();
        Poly kn;
        kn.emplace(m, Rational(1, r));
        Expr kernel = Expr::from_fraction(std::move(kn), q);
        auto a = std::make_shared<AtomData>();
        a->kind = AtomKind::Exp;
        a->arg = kernel;
        acc *= term_pow_int(a, p);
    }
    return acc;
}

Expr log(const Expr& x) {
    if (x.is_one()) return Expr();
    auto a = std::make_shared<AtomData>();
    a->kind = AtomKind::Log;
    a->arg = x;
    return atom_expr(a);
}

Expr sin(const Expr& x) {
    if (x.is_zero()) return Expr();
    if (x.num().rbegin()->second.is_negative()) return -sin(-x);
    auto a = std::make_shared<AtomData>();
    a->kind = AtomKind::Sin;
    a->arg = x;
    return atom_expr(a);
}

Expr cos(const Expr& x) {
    if (x.is_zero()) return Expr(1);
    if (x.num().rbegin()->second.is_negative()) return cos(-x);
    auto a = std::make_shared<AtomData>();
    a->kind = AtomKind::Cos;
    a->arg = x;
    return atom_expr(a);
}

Expr sqrt(const Expr& x) { return x.pow(Rational(1, 2)); }

Expr ufunc(const std::string& name, int deriv, const Expr& arg) {
    auto a = std::make_shared<AtomData>();
    a->kind = AtomKind::UFunc;
    a->func = name;
    a->deriv = deriv;
    a->arg = arg;
    return atom_expr(a);
}

// --- calculus ---------------------------------------------------------------------

namespace {

Expr atom_diff(const AtomPtr& a, const SymbolId& s) {
    switch (a->kind) {
        case AtomKind::Symbol: return a->sym == s ? Expr(1) : Expr();
        case AtomKind::Exp: {
            Expr d = a->arg.diff(s);
            if (d.is_zero()) return Expr();
            return atom_expr(a) * d;
        }
        case AtomKind::Log: {
            Expr d = a->arg.diff(s);
            if (d.is_zero()) return Expr();
            return d / a->arg;
        }
        case AtomKind::Sin: {
            Expr d = a->arg.diff(s);
            if (d.is_zero()) return Expr();
            return cos(a->arg) * d;
        }
        case AtomKind::Cos: {
            Expr d = a->arg.diff(s);
            if (d.is_zero()) return Expr();
            return -sin(a->arg) * d;
        }
        case AtomKind::UFunc: {
            Expr d = a->arg.diff(s);
            if (d.is_zero()) return Expr();
            return ufunc(a->func, a->deriv + 1, a->arg) * d;
        }
        case AtomKind::Root: {
            Expr d = a->arg.diff(s);
            if (d.is_zero()) return Expr();
            Rational e(1, a->root);
            return Expr(e) * a->arg.pow(e - Rational(1)) * d;
        }
    }
    return Expr();
}

Expr poly_diff(const Poly& p, const SymbolId& s) {
    Expr acc;
    for (const auto& [m, c] : p) {
        for (size_t i = 0; i < m.size(); ++i) {
            Expr da = atom_diff(m[i].atom, s);
            if (da.is_zero()) continue;
            Monomial rest;
            for (size_t j = 0; j < m.size(); ++j) {
                if (j == i) {
                    if (m[j].exp > 1) rest.push_back({m[j].atom, m[j].exp - 1});
                } else {
                    rest.push_back(m[j]);
                }
            }
            acc += term_expr(c * Rational(m[i].exp), rest) * da;
        }
    }
    return acc;
}

} // namespace

Expr Expr::diff(const SymbolId& s) const {
    Expr dn = poly_diff(d_->num, s);
    if (den_is_one()) return dn;
    Expr dd = poly_diff(d_->den, s);
    Expr n = poly_expr(d_->num), d = poly_expr(d_->den);
    return (dn * d - n * dd) / (d * d);
}

namespace {

Expr atom_subst(const AtomPtr& a, const std::map<SymbolId, Expr>& b) {
    switch (a->kind) {
        case AtomKind::Symbol: {
            auto it = b.find(a->sym);
            return it != b.end() ? it->second : atom_expr(a);
        }
        case AtomKind::Exp: return exp(a->arg.substitute(b));
        case AtomKind::Log: return log(a->arg.substitute(b));
        case AtomKind::Sin: return sin(a->arg.substitute(b));
        case AtomKind::Cos: return cos(a->arg.substitute(b));
        case AtomKind::UFunc: return ufunc(a->func, a->deriv, a->arg.substitute(b));
        case AtomKind::Root: return a->arg.substitute(b).pow(Rational(1, a->root));
    }
    return atom_expr(a);
}

Expr poly_subst(const Poly& p, const std::map<SymbolId, Expr>& b) {
    Expr acc;
    for (const auto& [m, c] : p) {
        Expr t(c);
        for (const auto& f : m) t *= atom_subst(f.atom, b).pow(Rational(f.exp));
        acc += t;
    }
    return acc;
}

} // namespace

Expr Expr::substitute(const std::map<SymbolId, Expr>& bindings) const {
    if (bindings.empty()) return *this;
    Expr n = poly_subst(d_->num, bindings);
    if (den_is_one()) return n;
    return n / poly_subst(d_->den, bindings);
}

void Expr::for_each_atom(const std::function<void(const AtomPtr&)>& fn) const {
    auto walk_poly = [&](const Poly& p) {
        for (const auto& [m, c] : p)
            for (const auto& f : m) {
                fn(f.atom);
                if (f.atom->kind != AtomKind::Symbol) f.atom->arg.for_each_atom(fn);
            }
    };
    walk_poly(d_->num);
    walk_poly(d_->den);
}

void Expr::collect_symbols(std::set<SymbolId>& out) const {
    for_each_atom([&](const AtomPtr& a) {
        if (a->kind == AtomKind::Symbol) out.insert(a->sym);
    });
}

std::set<SymbolId> Expr::symbols() const {
    std::set<SymbolId> s;
    collect_symbols(s);
    return s;
}

bool Expr::depends_on(const SymbolId& s) const {
    auto all = symbols();
    return all.count(s) > 0;
}

int Expr::max_jet_order() const {
    int r = 0;
    for_each_atom([&](const AtomPtr& a) {
        if (a->kind == AtomKind::Symbol && a->sym.is_jet()) r = std::max(r, a->sym.jet.order());
    });
    return r;
}

Expr expr_gcd(const Expr& a, const Expr& b) {
    if (!a.den_is_one() || !b.den_is_one())
        throw math_error("expr_gcd expects polynomial expressions");
    if (!poly_safe_for_gcd(a.num()) || !poly_safe_for_gcd(b.num())) return Expr(1);
    return poly_expr(poly_gcd(a.num(), b.num()));
}

std::string Expr::str() const {
    if (is_zero()) return "0";
    std::string n = poly_str(d_->num);
    if (den_is_one()) return n;
    bool num_parens = d_->num.size() > 1;
    std::string s = num_parens ? "(" + n + ")" : n;
    s += "/";
    const Poly& dp = d_->den;
    bool den_simple = dp.size() == 1 && dp.begin()->second.is_one() &&
                      dp.begin()->first.size() == 1 &&
                      dp.begin()->first[0].atom->kind != AtomKind::Exp &&
                      dp.begin()->first[0].atom->kind != AtomKind::Root;
    std::string d = poly_str(dp);
    s += den_simple ? d : "(" + d + ")";
    return s;
}

} // namespace musym
