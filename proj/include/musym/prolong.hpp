#pragma once

#include "musym/muform.hpp"

#include <map>

namespace musym {

std::vector<MultiIndex> multi_indices_of_order(int p, int m);
std::vector<MultiIndex> multi_indices_up_to(int p, int r);

// Lie-point field xi^i d/dx^i + phi^a d/du^a. Generalized fields (components
// depending on first derivatives) are only accepted vertical, and only
// first-order operations apply to them.
struct VectorField {
    std::vector<Expr> xi;  // p components
    std::vector<Expr> phi; // q components
    bool generalized = false;

    bool vertical() const {
        for (const auto& e : xi)
            if (!e.is_zero()) return false;
        return true;
    }
};

VectorField make_vector_field(const JetContext& ctx, std::vector<Expr> xi, std::vector<Expr> phi);

// Q^a = phi^a - xi^i u^a_i; the result is vertical and flagged generalized
// when the characteristics pick up first derivatives.
VectorField evolutionary_form(const VectorField& X, const JetContext& ctx);

enum class ProlongMode { Standard, Mu };

// Prolongation coefficients psi^a_J for all |J| <= order, computed eagerly on
// construction and reused by every theorem check.
class ProlongedField {
  public:
    ProlongedField(JetContext ctx, VectorField base, int order, ProlongMode mode,
                   std::map<MultiIndex, std::vector<Expr>> coeffs)
        : ctx_(std::move(ctx)), base_(std::move(base)), order_(order), mode_(mode),
          coeffs_(std::move(coeffs)) {}

    const VectorField& base() const { return base_; }
    const JetContext& ctx() const { return ctx_; }
    int order() const { return order_; }
    ProlongMode mode() const { return mode_; }

    const Expr& coeff(int a, const MultiIndex& J) const;
    const std::map<MultiIndex, std::vector<Expr>>& coefficients() const { return coeffs_; }

  private:
    JetContext ctx_;
    VectorField base_;
    int order_ = 0;
    ProlongMode mode_ = ProlongMode::Standard;
    std::map<MultiIndex, std::vector<Expr>> coeffs_;
};

ProlongedField standard_prolong(const JetContext& ctx, const VectorField& X, int r);
ProlongedField mu_prolong(const VectorField& X, const MuForm& mu, int r);

// Y[e] = xi^i de/dx^i + sum psi^a_J de/du^a_J; rejects expressions whose jet
// order exceeds the prolongation order.
Expr apply(const ProlongedField& Y, const Expr& e);

// F^a_J = psi^a_J - phi^a_J, the mu-difference terms.
std::map<MultiIndex, std::vector<Expr>> mu_difference(const VectorField& X, const MuForm& mu,
                                                      int r);

} // namespace musym
