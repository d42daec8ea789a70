#pragma once

#include "musym/expr.hpp"
#include "musym/oracle.hpp"

#include <optional>
#include <string>
#include <vector>

namespace musym {

// Declares the phase manifold: p independent and q dependent variables plus
// free parameters and uninterpreted function names. Immutable value; jet
// order is open-ended and grows with the expressions, not the context.
class JetContext {
  public:
    JetContext() = default;
    JetContext(std::vector<std::string> independents, std::vector<std::string> dependents,
               std::vector<std::string> parameters = {}, std::vector<std::string> functions = {});

    int p() const { return static_cast<int>(indep_.size()); }
    int q() const { return static_cast<int>(dep_.size()); }

    const std::vector<std::string>& independents() const { return indep_; }
    const std::vector<std::string>& dependents() const { return dep_; }
    const std::vector<std::string>& parameters() const { return params_; }
    const std::vector<std::string>& functions() const { return funcs_; }

    SymbolId independent(int i) const;
    SymbolId jet(int a, const MultiIndex& J) const;
    SymbolId dependent(int a) const { return jet(a, MultiIndex::zeros(p())); }
    SymbolId parameter(int k) const;

    int independent_index(const std::string& name) const;
    int dependent_index(const std::string& name) const;
    int parameter_index(const std::string& name) const;
    bool has_function(const std::string& name) const;

    // Convenience lookup used by tests and bindings: plain variable names only.
    std::optional<SymbolId> lookup(const std::string& name) const;
    Expr var(const std::string& name) const;

    // D_i e = de/dx^i + sum over jet coordinates present in e of u^a_{J+e_i} de/du^a_J.
    Expr total_derivative(const Expr& e, int i) const;
    Expr total_derivative(const Expr& e, const MultiIndex& J) const;

  private:
    std::vector<std::string> indep_, dep_, params_, funcs_;
};

// Sanity check that [D_i, D_j] vanishes on e.
ZeroVerdict commute_check(const JetContext& ctx, const Expr& e, int i, int j,
                          const OracleConfig& cfg = {});

} // namespace musym
