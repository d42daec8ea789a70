#include "musym/oracle.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace musym {

const char* ZeroVerdict::name(Verdict v) {
    switch (v) {
        case Verdict::ZeroSymbolic: return "zero";
        case Verdict::ZeroNumeric: return "zero-numeric";
        case Verdict::NonZero: return "nonzero";
        case Verdict::Indeterminate: return "indeterminate";
    }
    return "?";
}

namespace {

double next01(std::uint64_t& state) {
    // splitmix64 step, then 53-bit mantissa; bit-identical on every platform
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    z = z ^ (z >> 31);
    return static_cast<double>(z >> 11) * (1.0 / 9007199254740992.0);
}

double draw_value(std::uint64_t& state) {
    double mag = 0.1 + 1.9 * next01(state);
    double sgn = next01(state) < 0.5 ? -1.0 : 1.0;
    return sgn * mag;
}

double eval_atom(const AtomData& a, const PointBindings& pt);

double eval_poly(const Poly& p, const PointBindings& pt) {
    double s = 0;
    for (const auto& [m, c] : p) {
        double t = c.to_double();
        for (const auto& f : m) t *= std::pow(eval_atom(*f.atom, pt), f.exp);
        s += t;
    }
    return s;
}

double eval_poly_term_scale(const Poly& p, const PointBindings& pt) {
    double s = 0;
    for (const auto& [m, c] : p) {
        double t = c.to_double();
        for (const auto& f : m) t *= std::pow(eval_atom(*f.atom, pt), f.exp);
        s += std::abs(t);
    }
    return s;
}

double eval_expr(const Expr& e, const PointBindings& pt) {
    double n = eval_poly(e.num(), pt);
    if (e.den_is_one()) return n;
    double d = eval_poly(e.den(), pt);
    if (std::abs(d) < 1e-9) throw eval_domain_error("denominator vanishes at sample point");
    return n / d;
}

double eval_cubic_deriv(const std::array<double, 4>& c, double x, int deriv) {
    switch (deriv) {
        case 0: return c[0] + x * (c[1] + x * (c[2] + x * c[3]));
        case 1: return c[1] + x * (2 * c[2] + x * 3 * c[3]);
        case 2: return 2 * c[2] + 6 * c[3] * x;
        case 3: return 6 * c[3];
        default: return 0.0;
    }
}

double eval_atom(const AtomData& a, const PointBindings& pt) {
    switch (a.kind) {
        case AtomKind::Symbol: {
            auto it = pt.values.find(a.sym);
            if (it == pt.values.end()) throw math_error("unbound symbol: " + a.sym.name);
            return it->second;
        }
        case AtomKind::Exp: {
            double x = eval_expr(a.arg, pt);
            if (std::abs(x) > 500) throw eval_domain_error("exp overflow at sample point");
            return std::exp(x);
        }
        case AtomKind::Log: {
            double x = eval_expr(a.arg, pt);
            if (x <= 1e-12) throw eval_domain_error("log of a non-positive value");
            return std::log(x);
        }
        case AtomKind::Sin: return std::sin(eval_expr(a.arg, pt));
        case AtomKind::Cos: return std::cos(eval_expr(a.arg, pt));
        case AtomKind::UFunc: {
            auto it = pt.cubics.find(a.func);
            if (it == pt.cubics.end())
                throw math_error("unbound uninterpreted function: " + a.func);
            return eval_cubic_deriv(it->second, eval_expr(a.arg, pt), a.deriv);
        }
        case AtomKind::Root: {
            double x = eval_expr(a.arg, pt);
            int r = a.root;
            if (x < 0) {
                if (r % 2 == 0) throw eval_domain_error("even root of a negative value");
                return -std::pow(-x, 1.0 / r);
            }
            return std::pow(x, 1.0 / r);
        }
    }
    return 0.0;
}

std::string describe_point(const PointBindings& pt) {
    std::ostringstream os;
    bool first = true;
    for (const auto& [s, v] : pt.values) {
        if (!first) os << ", ";
        first = false;
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.6g", v);
        os << s.name << "=" << buf;
    }
    return os.str();
}

} // namespace

double evaluate(const Expr& e, const PointBindings& pt) { return eval_expr(e, pt); }

double evaluate_at(const Expr& e, const std::map<SymbolId, double>& point) {
    PointBindings pt;
    pt.values = point;
    return eval_expr(e, pt);
}

std::set<std::string> collect_ufunc_names(const Expr& e) {
    std::set<std::string> names;
    e.for_each_atom([&](const AtomPtr& a) {
        if (a->kind == AtomKind::UFunc) names.insert(a->func);
    });
    return names;
}

PointBindings sample_point(const std::set<SymbolId>& symbols,
                           const std::set<std::string>& ufunc_names, const OracleConfig& cfg,
                           int point_index, int attempt) {
    std::uint64_t state = cfg.seed;
    state ^= 0x5851f42d4c957f2dull * static_cast<std::uint64_t>(point_index + 1);
    state ^= 0x14057b7ef767814full * static_cast<std::uint64_t>(attempt + 1);
    PointBindings pt;
    for (const auto& s : symbols) pt.values[s] = draw_value(state);
    for (const auto& f : ufunc_names) {
        std::array<double, 4> c{};
        for (auto& x : c) x = draw_value(state);
        pt.cubics[f] = c;
    }
    return pt;
}

ZeroVerdict is_zero(const Expr& e, const OracleConfig& cfg) {
    if (e.is_zero()) return {Verdict::ZeroSymbolic, e, {}};
    auto syms = e.symbols();
    auto ufuncs = collect_ufunc_names(e);
    for (int k = 0; k < cfg.points; ++k) {
        bool evaluated = false;
        for (int attempt = 0; attempt < cfg.max_resamples && !evaluated; ++attempt) {
            PointBindings pt = sample_point(syms, ufuncs, cfg, k, attempt);
            try {
                double n = eval_poly(e.num(), pt);
                double scale = eval_poly_term_scale(e.num(), pt);
                if (e.den_is_one()) {
                    // nothing extra
                } else if (std::abs(eval_poly(e.den(), pt)) < 1e-9) {
                    throw eval_domain_error("denominator vanishes at sample point");
                }
                evaluated = true;
                if (std::abs(n) > cfg.rel_tol * (1.0 + scale) + cfg.abs_floor)
                    return {Verdict::NonZero, e, describe_point(pt)};
            } catch (const eval_domain_error&) {
                // resample
            }
        }
        if (!evaluated) return {Verdict::Indeterminate, e, {}};
    }
    return {Verdict::ZeroNumeric, e, {}};
}

ZeroVerdict prob_equal(const Expr& a, const Expr& b, const OracleConfig& cfg) {
    Expr d = a - b;
    if (d.is_zero()) return {Verdict::ZeroSymbolic, d, {}};
    // sample over everything either side mentions; cancellation in the
    // difference must not leave the originals unbound
    std::set<SymbolId> syms = a.symbols();
    b.collect_symbols(syms);
    std::set<std::string> ufuncs = collect_ufunc_names(a);
    for (const auto& n : collect_ufunc_names(b)) ufuncs.insert(n);
    for (int k = 0; k < cfg.points; ++k) {
        bool evaluated = false;
        for (int attempt = 0; attempt < cfg.max_resamples && !evaluated; ++attempt) {
            PointBindings pt = sample_point(syms, ufuncs, cfg, k, attempt);
            try {
                double va = evaluate(a, pt);
                double vb = evaluate(b, pt);
                evaluated = true;
                double bound = cfg.rel_tol * (1.0 + std::max(std::abs(va), std::abs(vb))) +
                               cfg.abs_floor;
                if (std::abs(va - vb) > bound) return {Verdict::NonZero, d, describe_point(pt)};
            } catch (const eval_domain_error&) {
                // resample
            }
        }
        if (!evaluated) return {Verdict::Indeterminate, d, {}};
    }
    return {Verdict::ZeroNumeric, d, {}};
}

} // namespace musym
