#pragma once

#include "musym/rational.hpp"
#include "musym/symbol.hpp"

#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace musym {

class Expr;

// Atoms are the indivisible multiplicative building blocks: symbols,
// transcendental applications, uninterpreted functions, and fractional-power
// roots. Everything else is a fraction of polynomials over atoms.
enum class AtomKind : unsigned char { Symbol = 0, Exp, Log, Sin, Cos, UFunc, Root };

struct AtomData;
using AtomPtr = std::shared_ptr<const AtomData>;

struct Factor {
    AtomPtr atom;
    int exp; // >= 1 inside monomials; fractions keep negative powers in the denominator
};
using Monomial = std::vector<Factor>; // sorted by atom order, see compare_atoms

int compare_atoms(const AtomPtr& a, const AtomPtr& b);
int compare_monomials(const Monomial& a, const Monomial& b);

struct MonoLess {
    bool operator()(const Monomial& a, const Monomial& b) const {
        return compare_monomials(a, b) < 0;
    }
};

// Multivariate polynomial over atoms with exact rational coefficients.
using Poly = std::map<Monomial, Rational, MonoLess>;

int compare_polys(const Poly& a, const Poly& b);

struct ExprData {
    Poly num;
    Poly den;
};

// Immutable symbolic expression in canonical form: a reduced fraction of two
// polynomials over the atom set. Construction canonicalizes, so structural
// equality of equal rational functions holds by design; transcendental
// identities the rewriter cannot see are left to the numeric oracle.
class Expr {
  public:
    Expr(); // zero
    Expr(long long n);
    Expr(const Rational& r);

    static Expr symbol(const SymbolId& s);
    static Expr from_fraction(Poly num, Poly den); // normalizing constructor

    bool is_zero() const;
    bool is_one() const;
    bool is_rational() const;
    Rational rational_value() const; // pre: is_rational()

    const Poly& num() const;
    const Poly& den() const;
    bool den_is_one() const;

    Expr operator-() const;
    friend Expr operator+(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a, const Expr& b);
    friend Expr operator*(const Expr& a, const Expr& b);
    friend Expr operator/(const Expr& a, const Expr& b);
    Expr& operator+=(const Expr& o) { return *this = *this + o; }
    Expr& operator-=(const Expr& o) { return *this = *this - o; }
    Expr& operator*=(const Expr& o) { return *this = *this * o; }
    Expr& operator/=(const Expr& o) { return *this = *this / o; }

    // e must be rational; general f^g is expressed as exp(g*log f) by callers.
    Expr pow(const Rational& e) const;

    int compare(const Expr& o) const;
    bool operator==(const Expr& o) const { return compare(o) == 0; }
    bool operator!=(const Expr& o) const { return compare(o) != 0; }
    bool operator<(const Expr& o) const { return compare(o) < 0; }

    // Partial derivative treating every other symbol as independent;
    // uninterpreted f(w) differentiates to f'(w)*dw/ds.
    Expr diff(const SymbolId& s) const;

    // Simultaneous substitution followed by canonicalization.
    Expr substitute(const std::map<SymbolId, Expr>& bindings) const;

    void collect_symbols(std::set<SymbolId>& out) const;
    std::set<SymbolId> symbols() const;
    bool depends_on(const SymbolId& s) const;
    int max_jet_order() const;

    // Visits every atom, including those nested inside function arguments.
    void for_each_atom(const std::function<void(const AtomPtr&)>& fn) const;

    std::string str() const;

  private:
    explicit Expr(std::shared_ptr<const ExprData> d) : d_(std::move(d)) {}
    std::shared_ptr<const ExprData> d_;
};

struct AtomData {
    AtomKind kind;
    SymbolId sym;     // Symbol
    Expr arg;         // Exp kernel / Log, Sin, Cos, UFunc argument / Root base
    std::string func; // UFunc name
    int deriv = 0;    // UFunc formal-derivative order
    int root = 0;     // Root index r >= 2
};

// Smart constructors; each returns a canonical Expr.
Expr exp(const Expr& x);
Expr log(const Expr& x);
Expr sin(const Expr& x);
Expr cos(const Expr& x);
Expr sqrt(const Expr& x);
Expr ufunc(const std::string& name, int deriv, const Expr& arg);
Expr atom_expr(const AtomPtr& a);

// Canonicalization happens on construction; exposed for API symmetry.
inline Expr canonicalize(const Expr& e) { return e; }

// gcd of two polynomial expressions (denominators must be 1), up to a unit.
Expr expr_gcd(const Expr& a, const Expr& b);

} // namespace musym
