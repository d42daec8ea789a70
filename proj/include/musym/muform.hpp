#pragma once

#include "musym/context.hpp"
#include "musym/matrix.hpp"
#include "musym/oracle.hpp"

#include <optional>
#include <vector>

namespace musym {

class MuForm;

struct CompatibilityPair {
    int i = 0, j = 0;
    ExprMatrix residual; // D_i Lambda_j - D_j Lambda_i + [Lambda_i, Lambda_j]
    ZeroVerdict verdict;
};

struct CompatibilityReport {
    std::vector<CompatibilityPair> pairs;
    bool zero() const {
        for (const auto& p : pairs)
            if (!p.verdict.zero()) return false;
        return true;
    }
};

// The horizontal form mu = Lambda_i dx^i: p square q x q matrices whose
// entries may depend on x, u and first derivatives only.
class MuForm {
  public:
    MuForm(JetContext ctx, std::vector<ExprMatrix> lambdas);

    static MuForm zero(const JetContext& ctx);
    static MuForm scalar(const JetContext& ctx, const std::vector<Expr>& lambdas);

    const JetContext& ctx() const { return ctx_; }
    const ExprMatrix& matrix(int i) const { return lambdas_[static_cast<size_t>(i)]; }
    int p() const { return static_cast<int>(lambdas_.size()); }
    int q() const { return lambdas_.empty() ? 0 : lambdas_[0].rows(); }

    bool is_zero() const;
    // All Lambda_i = lambda_i * I; returns the scalars when so.
    std::optional<std::vector<Expr>> scalar_form() const;

    // True when the horizontal Maurer-Cartan residuals vanish (symbolically,
    // or numerically under the default oracle); checked once at construction.
    bool compatible() const { return compatible_; }
    void require_compatible() const;

  private:
    JetContext ctx_;
    std::vector<ExprMatrix> lambdas_;
    bool compatible_ = false;
};

CompatibilityReport check_compatibility(const MuForm& mu, const OracleConfig& cfg = {});

// nabla_i on a column vector: (D_i + Lambda_i) psi; on a matrix: entrywise
// D_i plus left multiplication by Lambda_i.
std::vector<Expr> nabla(const MuForm& mu, int i, const std::vector<Expr>& v);
ExprMatrix nabla(const MuForm& mu, int i, const ExprMatrix& m);

// Composition nabla_1^{j_1} ... nabla_p^{j_p}; rejects incompatible forms,
// where the composition would depend on the order.
std::vector<Expr> nabla_multi(const MuForm& mu, const MultiIndex& J, const std::vector<Expr>& v);

// (nabla_i nabla_j - nabla_j nabla_i) v for all pairs, on a test vector.
ZeroVerdict zero_curvature_check(const MuForm& mu, const std::vector<Expr>& v,
                                 const OracleConfig& cfg = {});

// Gauge function gamma(x, u): a scalar (the q = 1 / scalar-eigenvalue cases)
// or a q x q matrix, invertible at generic points (oracle-checked).
struct GaugeFunction {
    GaugeFunction() = default;
    explicit GaugeFunction(Expr scalar) : gamma(std::move(scalar)) {}
    explicit GaugeFunction(ExprMatrix m) : matrix(std::move(m)) {}
    Expr gamma;
    std::optional<ExprMatrix> matrix;
};

// Lambda_i = gamma^{-1} D_i gamma; the result always satisfies the
// compatibility condition.
MuForm lambda_from_gamma(const GaugeFunction& gamma, const JetContext& ctx);

enum class GammaStatus { Found, Inconsistent, NotFound };

struct GammaResult {
    GammaStatus status = GammaStatus::NotFound;
    Expr gamma;
    std::string message;
};

// Scalar-case inverse of lambda_from_gamma: integrates lambda_i = D_i Phi for
// lambda affine in the first derivatives, returning gamma with
// lambda_i = gamma^{-1} D_i gamma verified symbolically. Heuristic: rational
// potentials are caught through the common denominator of the lambda_i,
// polynomial/exponential parts through monomial-wise antidifferentiation.
GammaResult gamma_from_lambda(const MuForm& mu, const OracleConfig& cfg = {});

struct EigenResult {
    bool found = false;
    std::vector<Expr> lambdas; // Lambda_i phi = lambdas[i] * phi
};

EigenResult common_eigenvector_check(const MuForm& mu, const std::vector<Expr>& phi,
                                     const OracleConfig& cfg = {});

} // namespace musym
