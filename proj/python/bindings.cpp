#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "musym/problem.hpp"

namespace py = pybind11;
using namespace musym;

namespace {

SymbolId resolve_symbol(const JetContext& ctx, const std::string& name) {
    Expr e = parse_expr(name, ctx);
    if (e.den_is_one() && e.num().size() == 1) {
        const auto& [m, c] = *e.num().begin();
        if (c.is_one() && m.size() == 1 && m[0].exp == 1 && m[0].atom->kind == AtomKind::Symbol)
            return m[0].atom->sym;
    }
    throw math_error("not a plain symbol: " + name);
}

MuForm build_muform(const JetContext& ctx, const std::vector<std::vector<std::vector<Expr>>>& ms) {
    std::vector<ExprMatrix> lam;
    for (const auto& rows : ms) {
        ExprMatrix m(static_cast<int>(rows.size()),
                     rows.empty() ? 0 : static_cast<int>(rows[0].size()));
        for (size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].size() != rows[0].size()) throw shape_error("ragged Lambda matrix");
            for (size_t c = 0; c < rows[r].size(); ++c)
                m.at(static_cast<int>(r), static_cast<int>(c)) = rows[r][c];
        }
        lam.push_back(std::move(m));
    }
    return MuForm(ctx, std::move(lam));
}

std::string verdict_str(const ZeroVerdict& v) { return ZeroVerdict::name(v.kind); }

py::dict conservation_dict(const ConservationReport& c) {
    py::dict d;
    d["classification"] = conservation_class_name(c.classification);
    d["divergence_residual"] = c.divergence_residual.str();
    d["mu_residual"] = c.mu_residual.str();
    d["on_shell"] = c.on_shell;
    if (c.on_shell_divergence) d["on_shell_divergence"] = c.on_shell_divergence->str();
    if (c.on_shell_mu_residual) d["on_shell_mu_residual"] = c.on_shell_mu_residual->str();
    if (c.decay_factor) d["decay_factor"] = c.decay_factor->str();
    return d;
}

} // namespace

PYBIND11_MODULE(_musym, m) {
    m.doc() = "mu-prolongations, mu-symmetries and mu-conservation laws for variational problems";

    py::register_exception<math_error>(m, "MathError");
    py::register_exception<parse_error>(m, "ParseError");

    py::class_<SymbolId>(m, "Symbol")
        .def_property_readonly("name", [](const SymbolId& s) { return s.name; })
        .def("__repr__", [](const SymbolId& s) { return "Symbol(" + s.name + ")"; });

    py::class_<JetContext>(m, "JetContext")
        .def(py::init<std::vector<std::string>, std::vector<std::string>,
                      std::vector<std::string>, std::vector<std::string>>(),
             py::arg("independents"), py::arg("dependents"),
             py::arg("parameters") = std::vector<std::string>{},
             py::arg("functions") = std::vector<std::string>{})
        .def_property_readonly("p", &JetContext::p)
        .def_property_readonly("q", &JetContext::q)
        .def("symbol", &resolve_symbol, py::arg("name"))
        .def("var", &JetContext::var, py::arg("name"))
        .def(
            "total_derivative",
            [](const JetContext& ctx, const Expr& e, int i) { return ctx.total_derivative(e, i); },
            py::arg("expr"), py::arg("i"))
        .def("total_derivative_multi",
             [](const JetContext& ctx, const Expr& e, const std::vector<int>& J) {
                 return ctx.total_derivative(e, MultiIndex(J));
             });

    py::class_<Expr>(m, "Expr")
        .def(py::init<long long>())
        .def("__str__", &Expr::str)
        .def("__repr__", &Expr::str)
        .def("__add__", [](const Expr& a, const Expr& b) { return a + b; })
        .def("__sub__", [](const Expr& a, const Expr& b) { return a - b; })
        .def("__mul__", [](const Expr& a, const Expr& b) { return a * b; })
        .def("__truediv__", [](const Expr& a, const Expr& b) { return a / b; })
        .def("__neg__", [](const Expr& a) { return -a; })
        .def("__eq__", [](const Expr& a, const Expr& b) { return a == b; })
        .def("pow",
             [](const Expr& e, long long num, long long den) { return e.pow(Rational(num, den)); },
             py::arg("num"), py::arg("den") = 1)
        .def("diff", [](const Expr& e, const SymbolId& s) { return e.diff(s); })
        .def("substitute",
             [](const Expr& e, const std::map<std::string, Expr>& b, const JetContext& ctx) {
                 std::map<SymbolId, Expr> bb;
                 for (const auto& [k, v] : b) bb.emplace(resolve_symbol(ctx, k), v);
                 return e.substitute(bb);
             })
        .def_property_readonly("is_zero", &Expr::is_zero)
        .def_property_readonly("max_jet_order", &Expr::max_jet_order);

    m.def("parse", &parse_expr, py::arg("text"), py::arg("ctx"));

    m.def(
        "is_zero",
        [](const Expr& e, std::uint64_t seed, int points, double tol) {
            OracleConfig cfg;
            cfg.seed = seed;
            cfg.points = points;
            cfg.rel_tol = tol;
            return verdict_str(is_zero(e, cfg));
        },
        py::arg("expr"), py::arg("seed") = OracleConfig{}.seed,
        py::arg("points") = OracleConfig{}.points, py::arg("tol") = OracleConfig{}.rel_tol);
    m.def(
        "prob_equal",
        [](const Expr& a, const Expr& b, std::uint64_t seed, int points, double tol) {
            OracleConfig cfg;
            cfg.seed = seed;
            cfg.points = points;
            cfg.rel_tol = tol;
            return verdict_str(prob_equal(a, b, cfg));
        },
        py::arg("a"), py::arg("b"), py::arg("seed") = OracleConfig{}.seed,
        py::arg("points") = OracleConfig{}.points, py::arg("tol") = OracleConfig{}.rel_tol);

    py::class_<MuForm>(m, "MuForm")
        .def(py::init(&build_muform), py::arg("ctx"), py::arg("lambdas"))
        .def_static("zero", &MuForm::zero)
        .def_static("scalar", &MuForm::scalar, py::arg("ctx"), py::arg("lambdas"))
        .def_property_readonly("compatible", &MuForm::compatible)
        .def("matrix_entry",
             [](const MuForm& mu, int i, int r, int c) { return mu.matrix(i).at(r, c); });

    m.def("check_compatibility", [](const MuForm& mu) {
        auto rep = check_compatibility(mu);
        py::list out;
        for (const auto& pr : rep.pairs) {
            py::dict d;
            d["i"] = pr.i;
            d["j"] = pr.j;
            d["verdict"] = verdict_str(pr.verdict);
            out.append(d);
        }
        py::dict r;
        r["zero"] = rep.zero();
        r["pairs"] = out;
        return r;
    });
    m.def("nabla", [](const MuForm& mu, int i, const std::vector<Expr>& v) {
        return nabla(mu, i, v);
    });
    m.def("nabla_multi", [](const MuForm& mu, const std::vector<int>& J,
                            const std::vector<Expr>& v) { return nabla_multi(mu, MultiIndex(J), v); });
    m.def("lambda_from_gamma", [](const Expr& gamma, const JetContext& ctx) {
        return lambda_from_gamma(GaugeFunction{gamma}, ctx);
    });
    m.def("gamma_from_lambda", [](const MuForm& mu) {
        auto r = gamma_from_lambda(mu);
        py::dict d;
        d["status"] = r.status == GammaStatus::Found
                          ? "found"
                          : (r.status == GammaStatus::Inconsistent ? "inconsistent" : "not-found");
        if (r.status == GammaStatus::Found) d["gamma"] = r.gamma;
        if (!r.message.empty()) d["message"] = r.message;
        return d;
    });
    m.def("common_eigenvector_check", [](const MuForm& mu, const std::vector<Expr>& phi) {
        auto r = common_eigenvector_check(mu, phi);
        py::dict d;
        d["found"] = r.found;
        if (r.found) d["lambdas"] = r.lambdas;
        return d;
    });

    py::class_<VectorField>(m, "VectorField")
        .def_property_readonly("vertical", &VectorField::vertical)
        .def_property_readonly("generalized",
                               [](const VectorField& X) { return X.generalized; })
        .def_property_readonly("xi", [](const VectorField& X) { return X.xi; })
        .def_property_readonly("phi", [](const VectorField& X) { return X.phi; });
    m.def("vector_field", &make_vector_field, py::arg("ctx"), py::arg("xi"), py::arg("phi"));
    m.def("evolutionary_form", &evolutionary_form, py::arg("X"), py::arg("ctx"));

    py::class_<ProlongedField>(m, "ProlongedField")
        .def_property_readonly("order", &ProlongedField::order)
        .def("coeff", [](const ProlongedField& Y, int a, const std::vector<int>& J) {
            return Y.coeff(a, MultiIndex(J));
        })
        .def("apply", [](const ProlongedField& Y, const Expr& e) { return apply(Y, e); });
    m.def("standard_prolong", &standard_prolong, py::arg("ctx"), py::arg("X"), py::arg("r"));
    m.def("mu_prolong", &mu_prolong, py::arg("X"), py::arg("mu"), py::arg("r"));

    py::class_<Lagrangian>(m, "Lagrangian")
        .def_property_readonly("order", [](const Lagrangian& L) { return L.order; })
        .def_property_readonly("density", [](const Lagrangian& L) { return L.density; });
    m.def("lagrangian", &make_lagrangian, py::arg("ctx"), py::arg("density"));

    m.def("euler_lagrange", &euler_lagrange, py::arg("ctx"), py::arg("L"));
    m.def("mu_euler_lagrange", &mu_euler_lagrange, py::arg("L"), py::arg("mu"));
    m.def(
        "mu_symmetry_residual",
        [](const VectorField& X, const MuForm& mu, const Lagrangian& L, const std::string& mode) {
            return mu_symmetry_residual(X, mu, L,
                                        mode == "standard" ? ProlongMode::Standard
                                                           : ProlongMode::Mu);
        },
        py::arg("X"), py::arg("mu"), py::arg("L"), py::arg("mode") = "mu");
    m.def("invariance_residual",
          [](const VectorField& X, const MuForm& mu, const Expr& F, const std::string& mode) {
              return invariance_residual(X, mu, F,
                                         mode == "standard" ? ProlongMode::Standard
                                                            : ProlongMode::Mu);
          },
          py::arg("X"), py::arg("mu"), py::arg("F"), py::arg("mode") = "mu");
    m.def("conserved_trace_current",
          [](const VectorField& X, const MuForm& mu, const Lagrangian& L) {
              return trace_current(conserved_mvector(X, mu, L));
          });
    m.def("verify_noether_identity",
          [](const VectorField& X, const MuForm& mu, const Lagrangian& L) {
              return verdict_str(verify_noether_identity(X, mu, L));
          });
    m.def("mu_conservation_report",
          [](const VectorField& X, const MuForm& mu, const Lagrangian& L) {
              auto P = conserved_mvector(X, mu, L);
              auto els = euler_lagrange(mu.ctx(), L);
              return conservation_dict(mu_divergence(P, mu, els));
          });
    m.def("theorem9", [](const VectorField& X, const MuForm& mu, const Lagrangian& L) {
        auto r = theorem9_conservation(X, mu, L);
        py::dict d;
        d["symmetry"] = verdict_str(r.symmetry);
        d["identity"] = verdict_str(r.identity);
        d["conservation"] = verdict_str(r.conservation);
        d["current"] = r.current;
        return d;
    });
    m.def("dual_mu_conservation", [](const VectorField& X, const MuForm& mu, const Lagrangian& L) {
        auto r = dual_mu_conservation(X, mu, L);
        py::dict d;
        d["standard_symmetry"] = verdict_str(r.standard_symmetry);
        d["dual_conservation"] = verdict_str(r.dual_conservation);
        d["current"] = r.current;
        return d;
    });
    m.def(
        "standard_reduction",
        [](const VectorField& X, const MuForm& mu, const Lagrangian& L) {
            auto r = standard_reduction(X, mu, L);
            py::dict d;
            d["ok"] = r.ok;
            if (r.ok) {
                d["gamma"] = r.gamma;
                d["current"] = r.current;
                d["divergence"] = verdict_str(r.divergence);
            } else {
                d["message"] = r.message;
            }
            return d;
        },
        py::arg("X"), py::arg("mu"), py::arg("L"));
    m.def(
        "run_problem",
        [](const std::string& text, const std::string& name, std::uint64_t seed, int points,
           double tol, const std::string& mode) {
            RunOptions opts;
            opts.oracle.seed = seed;
            opts.oracle.points = points;
            opts.oracle.rel_tol = tol;
            opts.mode = mode == "standard" ? ProlongMode::Standard : ProlongMode::Mu;
            Report rep = run(parse_problem(text), opts, name);
            py::dict d;
            d["json"] = rep.to_json();
            d["text"] = rep.to_text();
            d["exit_code"] = rep.exit_code();
            return d;
        },
        py::arg("text"), py::arg("name") = "<python>", py::arg("seed") = OracleConfig{}.seed,
        py::arg("points") = OracleConfig{}.points, py::arg("tol") = OracleConfig{}.rel_tol,
        py::arg("mode") = "mu");
}
