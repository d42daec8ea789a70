#include "musym/problem.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <sstream>

namespace musym {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string w;
    while (is >> w) out.push_back(w);
    return out;
}

// splits on top-level commas, respecting ( ) and [ ] nesting
std::vector<std::string> split_commas(const std::string& s, size_t offset) {
    std::vector<std::string> out;
    int depth = 0;
    std::string cur;
    for (size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c == '(' || c == '[') ++depth;
        else if (c == ')' || c == ']') {
            --depth;
            if (depth < 0) throw parse_error("unbalanced brackets", offset + i);
        }
        if (c == ',' && depth == 0) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (depth != 0) throw parse_error("unbalanced brackets", offset);
    out.push_back(trim(cur));
    return out;
}

std::string strip_outer(const std::string& s, char open, char close, size_t offset) {
    std::string t = trim(s);
    if (t.size() < 2 || t.front() != open || t.back() != close)
        throw parse_error(std::string("expected '") + open + "..." + close + "'", offset);
    return t.substr(1, t.size() - 2);
}

struct Builder {
    std::vector<std::string> indep, dep, params, funcs;
    bool vars_frozen = false;
    std::optional<JetContext> ctx;
    ProblemFile pf;
    std::map<std::string, ExprMatrix> lambda_by_name;
    std::optional<std::vector<Expr>> scalar_lambda;

    const JetContext& context(size_t offset) {
        if (!ctx) {
            if (indep.empty() || dep.empty())
                throw parse_error("independent and dependent variables must be declared first",
                                  offset);
            ctx = JetContext(indep, dep, params, funcs);
        }
        vars_frozen = true;
        return *ctx;
    }

    void declare_names(std::vector<std::string>& dst, const std::vector<std::string>& names,
                       size_t offset) {
        if (vars_frozen)
            throw parse_error("variable declarations must precede every other declaration",
                              offset);
        if (names.empty()) throw parse_error("expected at least one name", offset);
        for (const auto& n : names) {
            for (const auto* list : {&indep, &dep, &params, &funcs})
                if (std::find(list->begin(), list->end(), n) != list->end())
                    throw parse_error("duplicate declaration: " + n, offset);
            dst.push_back(n);
        }
    }

    void finish(size_t offset) {
        const JetContext& c = context(offset);
        if (scalar_lambda) {
            pf.lambda.clear();
            for (const auto& l : *scalar_lambda) pf.lambda.push_back(l * ExprMatrix::identity(c.q()));
            pf.lambda_given = true;
        } else if (!lambda_by_name.empty()) {
            pf.lambda.assign(static_cast<size_t>(c.p()), ExprMatrix(c.q(), c.q()));
            for (const auto& [name, m] : lambda_by_name) {
                int i = c.independent_index(name);
                pf.lambda[static_cast<size_t>(i)] = m;
            }
            pf.lambda_given = true;
        } else if (pf.gamma) {
            MuForm mf = lambda_from_gamma(GaugeFunction{*pf.gamma}, c);
            for (int i = 0; i < c.p(); ++i) pf.lambda.push_back(mf.matrix(i));
            pf.lambda_given = true;
        } else {
            pf.lambda.assign(static_cast<size_t>(c.p()), ExprMatrix(c.q(), c.q()));
        }
        pf.ctx = c;
    }
};

ExprMatrix parse_matrix_literal(const std::string& text, const JetContext& ctx, size_t offset) {
    std::string inner = strip_outer(text, '[', ']', offset);
    auto rows = split_commas(inner, offset);
    std::vector<std::vector<Expr>> entries;
    for (const auto& row : rows) {
        std::string ri = strip_outer(row, '[', ']', offset);
        std::vector<Expr> cells;
        for (const auto& cell : split_commas(ri, offset)) cells.push_back(parse_expr(cell, ctx));
        entries.push_back(std::move(cells));
    }
    size_t width = entries.empty() ? 0 : entries[0].size();
    for (const auto& r : entries)
        if (r.size() != width) throw parse_error("ragged matrix literal", offset);
    if (entries.size() != width || static_cast<int>(width) != ctx.q())
        throw parse_error("Lambda matrices must be q x q", offset);
    ExprMatrix m(ctx.q(), ctx.q());
    for (int i = 0; i < ctx.q(); ++i)
        for (int j = 0; j < ctx.q(); ++j)
            m.at(i, j) = entries[static_cast<size_t>(i)][static_cast<size_t>(j)];
    return m;
}

std::vector<Expr> parse_tuple(const std::string& text, const JetContext& ctx, size_t offset) {
    std::string inner = strip_outer(text, '(', ')', offset);
    std::vector<Expr> out;
    for (const auto& cell : split_commas(inner, offset)) out.push_back(parse_expr(cell, ctx));
    return out;
}

} // namespace

const VectorField* ProblemFile::find_field(const std::string& n) const {
    for (const auto& [name, f] : fields)
        if (name == n) return &f;
    return nullptr;
}
const Lagrangian* ProblemFile::find_lagrangian(const std::string& n) const {
    for (const auto& [name, l] : lagrangians)
        if (name == n) return &l;
    return nullptr;
}
const Expr* ProblemFile::find_invariant(const std::string& n) const {
    for (const auto& [name, e] : invariants)
        if (name == n) return &e;
    return nullptr;
}
const std::map<int, Expr>* ProblemFile::find_solution(const std::string& n) const {
    for (const auto& [name, s] : solutions)
        if (name == n) return &s;
    return nullptr;
}

ProblemFile parse_problem(const std::string& text) {
    Builder b;
    size_t line_start = 0;
    int line_no = 0;
    bool directives_started = false;

    std::istringstream is(text);
    std::string raw;
    while (std::getline(is, raw)) {
        ++line_no;
        size_t offset = line_start;
        line_start += raw.size() + 1;
        std::string line = raw;
        if (auto h = line.find('#'); h != std::string::npos) line = line.substr(0, h);
        line = trim(line);
        if (line.empty()) continue;

        auto words = split_ws(line);
        const std::string& head = words[0];
        auto eq_pos = line.find('=');
        auto after_eq = [&]() {
            if (eq_pos == std::string::npos) throw parse_error("expected '='", offset);
            return trim(line.substr(eq_pos + 1));
        };

        auto is_directive = head == "check" || head == "derive" || head == "verify";
        if (directives_started && !is_directive)
            throw parse_error("declarations must precede directives", offset);

        if (head == "independent") {
            b.declare_names(b.indep, {words.begin() + 1, words.end()}, offset);
        } else if (head == "dependent") {
            b.declare_names(b.dep, {words.begin() + 1, words.end()}, offset);
        } else if (head == "parameter") {
            b.declare_names(b.params, {words.begin() + 1, words.end()}, offset);
        } else if (head == "function") {
            b.declare_names(b.funcs, {words.begin() + 1, words.end()}, offset);
        } else if (head.rfind("lambda[", 0) == 0) {
            const JetContext& ctx = b.context(offset);
            auto close = head.find(']');
            if (close == std::string::npos) throw parse_error("expected ']'", offset);
            std::string iname = head.substr(7, close - 7);
            if (ctx.independent_index(iname) < 0)
                throw parse_error("lambda index is not an independent variable: " + iname, offset);
            if (b.lambda_by_name.count(iname) || b.scalar_lambda)
                throw parse_error("duplicate lambda declaration", offset);
            b.lambda_by_name.emplace(iname, parse_matrix_literal(after_eq(), ctx, offset));
        } else if (head == "scalar-lambda") {
            const JetContext& ctx = b.context(offset);
            if (b.scalar_lambda || !b.lambda_by_name.empty())
                throw parse_error("duplicate lambda declaration", offset);
            auto ls = parse_tuple(after_eq(), ctx, offset);
            if (static_cast<int>(ls.size()) != ctx.p())
                throw parse_error("scalar-lambda needs one entry per independent variable",
                                  offset);
            b.scalar_lambda = ls;
        } else if (head == "gamma") {
            const JetContext& ctx = b.context(offset);
            if (b.pf.gamma) throw parse_error("duplicate gamma declaration", offset);
            b.pf.gamma = parse_expr(after_eq(), ctx);
        } else if (head == "vectorfield") {
            const JetContext& ctx = b.context(offset);
            if (words.size() < 2) throw parse_error("vectorfield needs a name", offset);
            std::string name = words[1];
            if (!name.empty() && name.back() == ':') name.pop_back();
            if (b.pf.find_field(name)) throw parse_error("duplicate vectorfield: " + name, offset);
            auto colon = line.find(':');
            if (colon == std::string::npos) throw parse_error("expected ':'", offset);
            std::vector<Expr> xi, phi;
            for (const auto& part : split_commas(line.substr(colon + 1), offset)) {
                auto peq = part.find('=');
                if (peq == std::string::npos)
                    throw parse_error("expected xi=(...) or phi=(...)", offset);
                std::string key = trim(part.substr(0, peq));
                std::string val = trim(part.substr(peq + 1));
                if (key == "xi") xi = parse_tuple(val, ctx, offset);
                else if (key == "phi") phi = parse_tuple(val, ctx, offset);
                else throw parse_error("unknown vectorfield component: " + key, offset);
            }
            if (phi.empty()) throw parse_error("vectorfield needs phi components", offset);
            b.pf.fields.emplace_back(name, make_vector_field(ctx, xi, phi));
        } else if (head == "lagrangian") {
            const JetContext& ctx = b.context(offset);
            if (words.size() < 2) throw parse_error("lagrangian needs a name", offset);
            std::string name = words[1];
            if (b.pf.find_lagrangian(name))
                throw parse_error("duplicate lagrangian: " + name, offset);
            b.pf.lagrangians.emplace_back(name, make_lagrangian(ctx, parse_expr(after_eq(), ctx)));
        } else if (head == "invariant-coordinate") {
            const JetContext& ctx = b.context(offset);
            if (words.size() < 2) throw parse_error("invariant-coordinate needs a name", offset);
            std::string name = words[1];
            if (b.pf.find_invariant(name))
                throw parse_error("duplicate invariant-coordinate: " + name, offset);
            b.pf.invariants.emplace_back(name, parse_expr(after_eq(), ctx));
        } else if (head == "solution") {
            const JetContext& ctx = b.context(offset);
            if (words.size() < 2) throw parse_error("solution needs a name", offset);
            std::string name = words[1];
            if (!name.empty() && name.back() == ':') name.pop_back();
            if (b.pf.find_solution(name)) throw parse_error("duplicate solution: " + name, offset);
            auto colon = line.find(':');
            if (colon == std::string::npos) throw parse_error("expected ':'", offset);
            std::map<int, Expr> sol;
            for (const auto& part : split_commas(line.substr(colon + 1), offset)) {
                auto peq = part.find('=');
                if (peq == std::string::npos) throw parse_error("expected u = <expr>", offset);
                std::string dv = trim(part.substr(0, peq));
                int a = ctx.dependent_index(dv);
                if (a < 0) throw parse_error("not a dependent variable: " + dv, offset);
                Expr e = parse_expr(trim(part.substr(peq + 1)), ctx);
                for (const auto& s : e.symbols())
                    if (s.is_jet())
                        throw parse_error("solution expressions may use independent variables "
                                          "and parameters only",
                                          offset);
                sol.emplace(a, e);
            }
            b.pf.solutions.emplace_back(name, std::move(sol));
        } else if (is_directive) {
            b.context(offset); // declarations are complete
            directives_started = true;
            Directive d;
            d.text = line;
            d.line = line_no;
            std::string verb = head;
            std::string what = words.size() > 1 ? words[1] : "";
            auto need_args = [&](size_t n) {
                if (words.size() < 2 + n)
                    throw parse_error("directive needs " + std::to_string(n) + " argument(s)",
                                      offset);
            };
            if (verb == "check" && what == "compatibility") {
                d.kind = Directive::Kind::CheckCompatibility;
            } else if (verb == "check" && what == "mu-symmetry") {
                need_args(2);
                d.kind = Directive::Kind::CheckMuSymmetry;
                d.field = words[2];
                d.target = words[3];
            } else if (verb == "derive" && what == "conserved-vector") {
                need_args(2);
                d.kind = Directive::Kind::DeriveConservedVector;
                d.field = words[2];
                d.target = words[3];
            } else if (verb == "check" && what == "conservation") {
                need_args(2);
                d.kind = Directive::Kind::CheckConservation;
                d.field = words[2];
                d.target = words[3];
            } else if (verb == "check" && what == "divergence-symmetry") {
                need_args(2);
                d.kind = Directive::Kind::CheckDivergenceSymmetry;
                d.field = words[2];
                d.target = words[3];
            } else if (verb == "check" && what == "conditional") {
                need_args(2);
                d.kind = Directive::Kind::CheckConditional;
                d.field = words[2];
                d.target = words[3];
                // optional trailing clause: alpha = <expr>, scanned past the
                // four directive words so names may contain "alpha"
                size_t pos = 0;
                for (int w = 0; w < 4; ++w) {
                    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos])))
                        ++pos;
                    while (pos < line.size() &&
                           !std::isspace(static_cast<unsigned char>(line[pos])))
                        ++pos;
                }
                std::string tail = trim(line.substr(pos));
                if (!tail.empty()) {
                    if (tail.rfind("alpha", 0) != 0)
                        throw parse_error("expected alpha = <expr>", offset);
                    auto aeq = tail.find('=');
                    if (aeq == std::string::npos)
                        throw parse_error("expected alpha = <expr>", offset);
                    d.alpha = parse_expr(trim(tail.substr(aeq + 1)), b.context(offset));
                }
            } else if (verb == "derive" && what == "standard-reduction") {
                need_args(2);
                d.kind = Directive::Kind::DeriveStandardReduction;
                d.field = words[2];
                d.target = words[3];
            } else if (verb == "check" && what == "theorem9") {
                need_args(2);
                d.kind = Directive::Kind::CheckTheorem9;
                d.field = words[2];
                d.target = words[3];
            } else if (verb == "check" && what == "dual") {
                need_args(2);
                d.kind = Directive::Kind::CheckDual;
                d.field = words[2];
                d.target = words[3];
            } else if (verb == "verify" && what == "solution") {
                need_args(2);
                d.kind = Directive::Kind::VerifySolution;
                d.solution = words[2];
                d.target = words[3];
            } else {
                throw parse_error("unknown directive: " + line, offset);
            }
            // referenced names must exist
            if (!d.field.empty() && !b.pf.find_field(d.field))
                throw parse_error("undeclared vectorfield: " + d.field, offset);
            if (d.kind == Directive::Kind::CheckMuSymmetry) {
                if (!b.pf.find_lagrangian(d.target) && !b.pf.find_invariant(d.target))
                    throw parse_error("undeclared lagrangian or invariant-coordinate: " + d.target,
                                      offset);
            } else if (!d.target.empty() && !b.pf.find_lagrangian(d.target)) {
                throw parse_error("undeclared lagrangian: " + d.target, offset);
            }
            if (!d.solution.empty() && !b.pf.find_solution(d.solution))
                throw parse_error("undeclared solution: " + d.solution, offset);
            b.pf.directives.push_back(std::move(d));
        } else {
            throw parse_error("unknown declaration: " + head, offset);
        }
    }

    if (b.pf.directives.empty()) throw parse_error("no directives", text.size());
    b.finish(text.size());
    return b.pf;
}

std::string pretty_print(const ProblemFile& pf) {
    std::ostringstream os;
    const JetContext& c = pf.ctx;
    auto join = [](const std::vector<std::string>& v) {
        std::string s;
        for (size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + v[i];
        return s;
    };
    os << "independent " << join(c.independents()) << "\n";
    os << "dependent " << join(c.dependents()) << "\n";
    if (!c.parameters().empty()) os << "parameter " << join(c.parameters()) << "\n";
    if (!c.functions().empty()) os << "function " << join(c.functions()) << "\n";
    if (pf.lambda_given) {
        for (int i = 0; i < c.p(); ++i) {
            os << "lambda[" << c.independents()[static_cast<size_t>(i)] << "] = [";
            for (int r = 0; r < c.q(); ++r) {
                os << (r ? ",[" : "[");
                for (int cc = 0; cc < c.q(); ++cc)
                    os << (cc ? "," : "") << pf.lambda[static_cast<size_t>(i)].at(r, cc).str();
                os << "]";
            }
            os << "]\n";
        }
    }
    if (pf.gamma) os << "gamma = " << pf.gamma->str() << "\n";
    for (const auto& [name, X] : pf.fields) {
        os << "vectorfield " << name << ":";
        if (!X.vertical()) {
            os << " xi=(";
            for (size_t i = 0; i < X.xi.size(); ++i) os << (i ? "," : "") << X.xi[i].str();
            os << "),";
        }
        os << " phi=(";
        for (size_t a = 0; a < X.phi.size(); ++a) os << (a ? "," : "") << X.phi[a].str();
        os << ")\n";
    }
    for (const auto& [name, L] : pf.lagrangians)
        os << "lagrangian " << name << " = " << L.density.str() << "\n";
    for (const auto& [name, e] : pf.invariants)
        os << "invariant-coordinate " << name << " = " << e.str() << "\n";
    for (const auto& [name, sol] : pf.solutions) {
        os << "solution " << name << ":";
        bool first = true;
        for (const auto& [a, e] : sol) {
            os << (first ? " " : ", ") << c.dependents()[static_cast<size_t>(a)] << " = "
               << e.str();
            first = false;
        }
        os << "\n";
    }
    for (const auto& d : pf.directives) os << d.text << "\n";
    return os.str();
}

namespace {

Verdict combine2(Verdict a, Verdict b) {
    auto rank = [](Verdict v) {
        switch (v) {
            case Verdict::ZeroSymbolic: return 0;
            case Verdict::ZeroNumeric: return 1;
            case Verdict::Indeterminate: return 2;
            case Verdict::NonZero: return 3;
        }
        return 3;
    };
    return rank(a) >= rank(b) ? a : b;
}

std::string tuple_str(const std::vector<Expr>& v) {
    std::string s = "(";
    for (size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i].str();
    return s + ")";
}

} // namespace

bool Report::any_error() const {
    for (const auto& r : results)
        if (r.error) return true;
    return false;
}

bool Report::all_zero() const {
    for (const auto& r : results)
        if (r.error || !(r.verdict == Verdict::ZeroSymbolic || r.verdict == Verdict::ZeroNumeric))
            return false;
    return true;
}

int Report::exit_code() const {
    if (any_error()) return 2;
    return all_zero() ? 0 : 1;
}

std::string Report::to_text() const {
    std::ostringstream os;
    os << "problem: " << problem << "  (seed " << seed << ", " << points << " points, mode "
       << mode << ")\n";
    for (const auto& r : results) {
        os << "  [" << (r.error ? "error" : ZeroVerdict::name(r.verdict)) << "] " << r.directive;
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.1f", r.ms);
        os << "  (" << buf << " ms)\n";
        if (r.error) {
            os << "      " << r.error_message << "\n";
            continue;
        }
        if (!r.residual.empty()) os << "      residual: " << r.residual << "\n";
        if (!r.classification.empty()) os << "      classification: " << r.classification << "\n";
        for (const auto& [k, v] : r.detail) os << "      " << k << ": " << v << "\n";
    }
    return os.str();
}

std::string Report::to_json() const {
    nlohmann::json j;
    j["problem"] = problem;
    j["seed"] = seed;
    j["points"] = points;
    j["mode"] = mode;
    j["exit_code"] = exit_code();
    nlohmann::json dirs = nlohmann::json::array();
    for (const auto& r : results) {
        nlohmann::json d;
        d["directive"] = r.directive;
        if (r.error) {
            d["error"] = r.error_message;
        } else {
            d["verdict"] = ZeroVerdict::name(r.verdict);
            if (!r.residual.empty()) d["residual"] = r.residual;
            if (!r.classification.empty()) d["classification"] = r.classification;
            if (!r.detail.empty()) {
                nlohmann::json det;
                for (const auto& [k, v] : r.detail) det[k] = v;
                d["detail"] = det;
            }
        }
        dirs.push_back(std::move(d));
    }
    j["directives"] = std::move(dirs);
    return j.dump(2) + "\n";
}

namespace {

const VectorField& need_field(const ProblemFile& pf, const std::string& n) {
    const VectorField* f = pf.find_field(n);
    if (!f) throw math_error("undeclared vectorfield: " + n);
    return *f;
}
const Lagrangian& need_lagrangian(const ProblemFile& pf, const std::string& n) {
    const Lagrangian* l = pf.find_lagrangian(n);
    if (!l) throw math_error("undeclared lagrangian: " + n);
    return *l;
}

} // namespace

Report run(const ProblemFile& pf, const RunOptions& opts, const std::string& name) {
    Report rep;
    rep.problem = name.empty() ? "<anonymous>" : name;
    rep.seed = opts.oracle.seed;
    rep.points = opts.oracle.points;
    rep.mode = opts.mode == ProlongMode::Mu ? "mu" : "standard";

    const JetContext& ctx = pf.ctx;
    MuForm mu(ctx, pf.lambda);
    const OracleConfig& cfg = opts.oracle;

    for (const auto& d : pf.directives) {
        DirectiveResult r;
        r.directive = d.text;
        auto t0 = std::chrono::steady_clock::now();
        try {
            switch (d.kind) {
                case Directive::Kind::CheckCompatibility: {
                    auto c = check_compatibility(mu, cfg);
                    Verdict v = Verdict::ZeroSymbolic;
                    std::string res = "0";
                    for (const auto& pr : c.pairs) {
                        v = combine2(v, pr.verdict.kind);
                        if (!pr.verdict.zero()) {
                            std::string entries;
                            for (int rr = 0; rr < mu.q(); ++rr)
                                for (int cc = 0; cc < mu.q(); ++cc)
                                    if (!pr.residual.at(rr, cc).is_zero())
                                        entries += (entries.empty() ? "" : ", ") + std::string("(") +
                                                   std::to_string(rr) + "," + std::to_string(cc) +
                                                   "): " + pr.residual.at(rr, cc).str();
                            res = "pair (" +
                                  ctx.independents()[static_cast<size_t>(pr.i)] + "," +
                                  ctx.independents()[static_cast<size_t>(pr.j)] + "): " + entries;
                        }
                    }
                    r.verdict = v;
                    r.residual = res;
                    break;
                }
                case Directive::Kind::CheckMuSymmetry: {
                    const VectorField& X = need_field(pf, d.field);
                    Expr res;
                    if (const Lagrangian* L = pf.find_lagrangian(d.target)) {
                        res = mu_symmetry_residual(X, mu, *L, opts.mode);
                    } else if (const Expr* F = pf.find_invariant(d.target)) {
                        res = invariance_residual(X, mu, *F, opts.mode);
                    } else {
                        throw math_error("undeclared lagrangian or invariant-coordinate: " +
                                         d.target);
                    }
                    auto v = is_zero(res, cfg);
                    r.verdict = v.kind;
                    r.residual = res.str();
                    if (!v.witness.empty()) r.detail["witness"] = v.witness;
                    break;
                }
                case Directive::Kind::DeriveConservedVector: {
                    const VectorField& X = need_field(pf, d.field);
                    const Lagrangian& L = need_lagrangian(pf, d.target);
                    MVector P = conserved_mvector(X, mu, L);
                    r.detail["trace"] = tuple_str(trace_current(P));
                    auto v = verify_noether_identity(X, mu, L, cfg);
                    r.verdict = v.kind;
                    r.residual = v.residual.str();
                    r.detail["identity"] = "Tr(nabla_i P^i) - Y[L] + phi.E(L)";
                    break;
                }
                case Directive::Kind::CheckConservation: {
                    const VectorField& X = need_field(pf, d.field);
                    const Lagrangian& L = need_lagrangian(pf, d.target);
                    MVector P = conserved_mvector(X, mu, L);
                    auto els = euler_lagrange(ctx, L);
                    auto c = mu_divergence(P, mu, els, cfg);
                    r.classification = conservation_class_name(c.classification);
                    Expr shown = c.on_shell_divergence ? *c.on_shell_divergence
                                                       : c.divergence_residual;
                    r.residual = shown.str();
                    if (c.decay_factor) r.detail["decay_factor"] = c.decay_factor->str();
                    r.detail["on_shell"] = c.on_shell ? "true" : "false";
                    if (c.on_shell_mu_residual)
                        r.detail["mu_residual_on_shell"] = c.on_shell_mu_residual->str();
                    if (c.classification == ConservationClass::None ||
                        c.classification == ConservationClass::Conditional) {
                        r.verdict = Verdict::NonZero; // conserved in no mu-sense
                    } else if (!c.on_shell) {
                        r.verdict = Verdict::ZeroSymbolic;
                    } else {
                        // the operative zero: Tr(nabla_i P^i) modulo the equations
                        auto vv = c.on_shell_mu_residual ? is_zero(*c.on_shell_mu_residual, cfg)
                                                         : is_zero(c.mu_residual, cfg);
                        r.verdict = vv.kind;
                    }
                    break;
                }
                case Directive::Kind::CheckDivergenceSymmetry: {
                    const VectorField& X = need_field(pf, d.field);
                    const Lagrangian& L = need_lagrangian(pf, d.target);
                    auto c = divergence_symmetry_check(X, mu, L, std::nullopt, cfg);
                    r.verdict = combine2(c.invariance.kind, c.conservation.kind);
                    r.residual = c.on_shell_divergence.str();
                    r.detail["expected_rhs"] = c.expected_rhs.str();
                    r.detail["current"] = tuple_str(c.current);
                    break;
                }
                case Directive::Kind::CheckConditional: {
                    const VectorField& X = need_field(pf, d.field);
                    const Lagrangian& L = need_lagrangian(pf, d.target);
                    auto c = conditional_invariant_check(X, mu, L, d.alpha.value_or(Expr()), cfg);
                    if (!c.eigen_ok) {
                        r.error = true;
                        r.error_message = "phi is not a common eigenvector of the Lambda_i";
                        break;
                    }
                    r.verdict = combine2(c.symmetry.kind, c.decay.kind);
                    r.detail["decay_factor"] = c.decay_factor.str();
                    r.detail["lambda"] = tuple_str(c.lambda);
                    break;
                }
                case Directive::Kind::DeriveStandardReduction: {
                    const VectorField& X = need_field(pf, d.field);
                    const Lagrangian& L = need_lagrangian(pf, d.target);
                    auto c = standard_reduction(X, mu, L, pf.gamma, cfg);
                    if (!c.ok) {
                        r.error = true;
                        r.error_message = c.message;
                        break;
                    }
                    r.verdict = c.divergence.kind;
                    r.residual = c.on_shell_divergence.str();
                    r.detail["gamma"] = c.gamma.str();
                    r.detail["current"] = tuple_str(c.current);
                    break;
                }
                case Directive::Kind::CheckTheorem9: {
                    const VectorField& X = need_field(pf, d.field);
                    const Lagrangian& L = need_lagrangian(pf, d.target);
                    auto c = theorem9_conservation(X, mu, L, cfg);
                    r.verdict =
                        combine2(combine2(c.symmetry.kind, c.identity.kind), c.conservation.kind);
                    r.detail["current"] = tuple_str(c.current);
                    r.detail["identity"] = ZeroVerdict::name(c.identity.kind);
                    r.detail["conservation"] = ZeroVerdict::name(c.conservation.kind);
                    break;
                }
                case Directive::Kind::CheckDual: {
                    const VectorField& X = need_field(pf, d.field);
                    const Lagrangian& L = need_lagrangian(pf, d.target);
                    auto c = dual_mu_conservation(X, mu, L, cfg);
                    r.verdict = combine2(c.standard_symmetry.kind, c.dual_conservation.kind);
                    r.detail["current"] = tuple_str(c.current);
                    break;
                }
                case Directive::Kind::VerifySolution: {
                    const Lagrangian& L = need_lagrangian(pf, d.target);
                    const std::map<int, Expr>* solp = pf.find_solution(d.solution);
                    if (!solp) throw math_error("undeclared solution: " + d.solution);
                    const auto& sol = *solp;
                    auto els = euler_lagrange(ctx, L);
                    auto c = verify_solution(els, sol, ctx, cfg);
                    Verdict v = Verdict::ZeroSymbolic;
                    std::string res;
                    for (size_t k = 0; k < c.equations.size(); ++k) {
                        v = combine2(v, c.equations[k].kind);
                        res += (k ? ", " : "") + c.equations[k].residual.str();
                    }
                    r.verdict = v;
                    r.residual = res;
                    break;
                }
            }
        } catch (const std::exception& e) {
            r.error = true;
            r.error_message = e.what();
        }
        auto t1 = std::chrono::steady_clock::now();
        r.ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        rep.results.push_back(std::move(r));
    }
    return rep;
}

} // namespace musym
