#include "musym/context.hpp"

#include <algorithm>
#include <stdexcept>

namespace musym {

namespace {

void check_distinct(const std::vector<std::string>& names) {
    for (size_t i = 0; i < names.size(); ++i)
        for (size_t j = i + 1; j < names.size(); ++j)
            if (names[i] == names[j]) throw math_error("duplicate name: " + names[i]);
}

} // namespace

JetContext::JetContext(std::vector<std::string> independents, std::vector<std::string> dependents,
                       std::vector<std::string> parameters, std::vector<std::string> functions)
    : indep_(std::move(independents)), dep_(std::move(dependents)),
      params_(std::move(parameters)), funcs_(std::move(functions)) {
    if (indep_.empty() || dep_.empty())
        throw math_error("a jet context needs at least one independent and one dependent variable");
    std::vector<std::string> all = indep_;
    all.insert(all.end(), dep_.begin(), dep_.end());
    all.insert(all.end(), params_.begin(), params_.end());
    all.insert(all.end(), funcs_.begin(), funcs_.end());
    check_distinct(all);
}

SymbolId JetContext::independent(int i) const {
    SymbolId s;
    s.kind = SymbolKind::Independent;
    s.index = i;
    s.name = indep_.at(static_cast<size_t>(i));
    return s;
}

SymbolId JetContext::jet(int a, const MultiIndex& J) const {
    if (J.size() != p()) throw math_error("multi-index arity does not match the context");
    SymbolId s;
    s.kind = SymbolKind::Jet;
    s.index = a;
    s.jet = J;
    s.name = dep_.at(static_cast<size_t>(a));
    int order = J.order();
    if (order > 0) {
        if (p() == 1) {
            for (int k = 0; k < order; ++k) s.name += "d";
        } else {
            s.name += "_";
            for (int i = 0; i < p(); ++i)
                for (int k = 0; k < J[i]; ++k) s.name += indep_[static_cast<size_t>(i)];
        }
    }
    return s;
}

SymbolId JetContext::parameter(int k) const {
    SymbolId s;
    s.kind = SymbolKind::Parameter;
    s.index = k;
    s.name = params_.at(static_cast<size_t>(k));
    return s;
}

int JetContext::independent_index(const std::string& name) const {
    auto it = std::find(indep_.begin(), indep_.end(), name);
    return it == indep_.end() ? -1 : static_cast<int>(it - indep_.begin());
}

int JetContext::dependent_index(const std::string& name) const {
    auto it = std::find(dep_.begin(), dep_.end(), name);
    return it == dep_.end() ? -1 : static_cast<int>(it - dep_.begin());
}

int JetContext::parameter_index(const std::string& name) const {
    auto it = std::find(params_.begin(), params_.end(), name);
    return it == params_.end() ? -1 : static_cast<int>(it - params_.begin());
}

bool JetContext::has_function(const std::string& name) const {
    return std::find(funcs_.begin(), funcs_.end(), name) != funcs_.end();
}

std::optional<SymbolId> JetContext::lookup(const std::string& name) const {
    if (int i = independent_index(name); i >= 0) return independent(i);
    if (int a = dependent_index(name); a >= 0) return dependent(a);
    if (int k = parameter_index(name); k >= 0) return parameter(k);
    return std::nullopt;
}

Expr JetContext::var(const std::string& name) const {
    auto s = lookup(name);
    if (!s) throw math_error("undeclared symbol: " + name);
    return Expr::symbol(*s);
}

Expr JetContext::total_derivative(const Expr& e, int i) const {
    if (i < 0 || i >= p()) throw math_error("independent index out of range");
    Expr r = e.diff(independent(i));
    for (const SymbolId& s : e.symbols()) {
        if (!s.is_jet()) continue;
        Expr de = e.diff(s);
        if (de.is_zero()) continue;
        r += Expr::symbol(jet(s.index, s.jet.bumped(i))) * de;
    }
    return r;
}

Expr JetContext::total_derivative(const Expr& e, const MultiIndex& J) const {
    if (J.size() != p()) throw math_error("multi-index arity does not match the context");
    Expr r = e;
    for (int i = p() - 1; i >= 0; --i)
        for (int k = 0; k < J[i]; ++k) r = total_derivative(r, i);
    return r;
}

ZeroVerdict commute_check(const JetContext& ctx, const Expr& e, int i, int j,
                          const OracleConfig& cfg) {
    Expr d = ctx.total_derivative(ctx.total_derivative(e, i), j) -
             ctx.total_derivative(ctx.total_derivative(e, j), i);
    return is_zero(d, cfg);
}

} // namespace musym
