#include "musym/parser.hpp"

#include <cctype>

namespace musym {

namespace {

struct Lexer {
    const std::string& s;
    size_t pos = 0;

    explicit Lexer(const std::string& text) : s(text) {}

    void skip_ws() {
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    }
    bool eof() {
        skip_ws();
        return pos >= s.size();
    }
    char peek() {
        skip_ws();
        return pos < s.size() ? s[pos] : '\0';
    }
    bool accept(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    void expect(char c) {
        skip_ws();
        if (pos >= s.size() || s[pos] != c)
            throw parse_error(std::string("expected '") + c + "'", pos);
        ++pos;
    }
};

struct ExprParser {
    Lexer lx;
    const JetContext& ctx;

    ExprParser(const std::string& text, const JetContext& c) : lx(text), ctx(c) {}

    Expr parse_full() {
        Expr e = parse_sum();
        if (!lx.eof()) throw parse_error("unexpected trailing input", lx.pos);
        return e;
    }

    Expr parse_sum() {
        Expr e = parse_product();
        for (;;) {
            if (lx.accept('+')) e += parse_product();
            else if (lx.accept('-')) e -= parse_product();
            else return e;
        }
    }

    Expr parse_product() {
        Expr e = parse_factor();
        for (;;) {
            if (lx.accept('*')) e *= parse_factor();
            else if (lx.accept('/')) e /= parse_factor();
            else return e;
        }
    }

    Expr parse_factor() {
        if (lx.accept('-')) return -parse_factor();
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_primary();
        if (!lx.accept('^')) return base;
        size_t at = lx.pos;
        Expr e = parse_factor(); // right-associative, signs allowed
        if (e.is_rational()) return base.pow(e.rational_value());
        if (base.is_zero()) throw parse_error("zero base with symbolic exponent", at);
        return musym::exp(e * musym::log(base));
    }

    Expr parse_primary() {
        lx.skip_ws();
        if (lx.pos >= lx.s.size()) throw parse_error("unexpected end of expression", lx.pos);
        char c = lx.s[lx.pos];
        if (c == '(') {
            ++lx.pos;
            Expr e = parse_sum();
            lx.expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident();
        throw parse_error("unexpected character", lx.pos);
    }

    Expr parse_number() {
        size_t start = lx.pos;
        long long v = 0;
        while (lx.pos < lx.s.size() && std::isdigit(static_cast<unsigned char>(lx.s[lx.pos]))) {
            int d = lx.s[lx.pos] - '0';
            if (v > (INT64_MAX - d) / 10) throw parse_error("integer literal overflow", start);
            v = v * 10 + d;
            ++lx.pos;
        }
        if (lx.pos < lx.s.size() && lx.s[lx.pos] == '.')
            throw parse_error("decimal literals are not supported; use exact rationals", lx.pos);
        return Expr(v);
    }

    Expr parse_ident() {
        size_t start = lx.pos;
        std::string name;
        while (lx.pos < lx.s.size()) {
            char ch = lx.s[lx.pos];
            if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '\'') {
                name += ch;
                ++lx.pos;
            } else {
                break;
            }
        }
        // function application?
        lx.skip_ws();
        bool call = lx.pos < lx.s.size() && lx.s[lx.pos] == '(';
        if (call) {
            std::string base = name;
            int deriv = 0;
            while (!base.empty() && base.back() == '\'') {
                base.pop_back();
                ++deriv;
            }
            if (deriv == 0) {
                if (base == "exp") return musym::exp(parse_call_arg());
                if (base == "log") return musym::log(parse_call_arg());
                if (base == "sin") return musym::sin(parse_call_arg());
                if (base == "cos") return musym::cos(parse_call_arg());
                if (base == "sqrt") return musym::sqrt(parse_call_arg());
            }
            if (ctx.has_function(base)) return ufunc(base, deriv, parse_call_arg());
            throw parse_error("undeclared function: " + base, start);
        }
        if (name.find('\'') != std::string::npos)
            throw parse_error("derivative apostrophes require a function call", start);
        return resolve_symbol(name, start);
    }

    Expr parse_call_arg() {
        lx.expect('(');
        Expr e = parse_sum();
        lx.expect(')');
        return e;
    }

    Expr resolve_symbol(const std::string& name, size_t at) {
        if (auto s = ctx.lookup(name)) return Expr::symbol(*s);
        // jet subscript: u_xy
        auto us = name.find('_');
        if (us != std::string::npos && us > 0) {
            std::string base = name.substr(0, us);
            std::string subs = name.substr(us + 1);
            int a = ctx.dependent_index(base);
            if (a < 0) throw parse_error("undeclared dependent variable: " + base, at);
            if (subs.empty()) throw parse_error("empty derivative subscript", at);
            MultiIndex J = MultiIndex::zeros(ctx.p());
            size_t k = 0;
            while (k < subs.size()) {
                int matched = -1;
                size_t len = 0;
                for (int i = 0; i < ctx.p(); ++i) {
                    const std::string& nm = ctx.independents()[static_cast<size_t>(i)];
                    if (subs.compare(k, nm.size(), nm) == 0 && nm.size() > len) {
                        matched = i;
                        len = nm.size();
                    }
                }
                if (matched < 0)
                    throw parse_error("derivative subscript names an undeclared independent "
                                      "variable: " +
                                          subs.substr(k),
                                      at);
                J.counts[static_cast<size_t>(matched)] += 1;
                k += len;
            }
            return Expr::symbol(ctx.jet(a, J));
        }
        // mechanical dots: q1d, q1dd (single independent variable)
        if (ctx.p() == 1) {
            std::string base = name;
            int order = 0;
            while (!base.empty() && base.back() == 'd') {
                base.pop_back();
                ++order;
                if (int a = ctx.dependent_index(base); a >= 0) {
                    MultiIndex J(std::vector<int>{order});
                    return Expr::symbol(ctx.jet(a, J));
                }
            }
        }
        throw parse_error("undeclared symbol: " + name, at);
    }
};

} // namespace

Expr parse_expr(const std::string& text, const JetContext& ctx) {
    ExprParser p(text, ctx);
    return p.parse_full();
}

} // namespace musym
