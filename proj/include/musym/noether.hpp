#pragma once

#include "musym/prolong.hpp"

#include <optional>

namespace musym {

struct Lagrangian {
    Expr density;
    int order = 1;
};

// order is the maximal jet order of the density; conserved-vector
// construction supports orders 1 and 2.
Lagrangian make_lagrangian(const JetContext& ctx, const Expr& density);

// pi^i_a = dL/du^a_i, indexed [i][a].
std::vector<std::vector<Expr>> momenta(const JetContext& ctx, const Lagrangian& L);

// E_a = sum over |J| <= order of (-1)^{|J|} D_J dL/du^a_J, unnormalized.
std::vector<Expr> euler_lagrange(const JetContext& ctx, const Lagrangian& L);

// dL/du^a - D_i pi^i_a + pi^i_b (Lambda_i)^b_a; first-order Lagrangians only.
std::vector<Expr> mu_euler_lagrange(const Lagrangian& L, const MuForm& mu);

// Vertical X: Y[L]. For xi != 0 the evolutionary representative is used and
// the residual is Y_Q[L] + D_i(L xi^i) + L xi^i Tr(Lambda_i), which vanishes
// exactly when X is a mu-symmetry in the divergence sense (built-in
// B_i = -L xi_i delta).
Expr mu_symmetry_residual(const VectorField& X, const MuForm& mu, const Lagrangian& L,
                          ProlongMode mode = ProlongMode::Mu);

// Invariance of a scalar function under the full prolonged field, xi included;
// used for the mu-invariant coordinates of the examples.
Expr invariance_residual(const VectorField& X, const MuForm& mu, const Expr& F,
                         ProlongMode mode = ProlongMode::Mu);

// The M-vector with the fixed index convention (P^i)^b_a = phi^b pi^i_a
// (the other common convention is its transpose; every traced quantity
// agrees). Order 2 adds the minimal-substitution terms; order > 2 is not
// supported. For xi != 0 the vector is built on the characteristics Q and
// carries the L xi^i block.
using MVector = std::vector<ExprMatrix>;
MVector conserved_mvector(const VectorField& X, const MuForm& mu, const Lagrangian& L);

std::vector<Expr> trace_current(const MVector& P);

// Off-shell master identity Tr(nabla_i P^i) = Y[L] - phi^a E_a, with E the
// unnormalized Euler-Lagrange expression above. (The identity is stated in
// the literature with the opposite orientation of E; this is the form that
// holds with E_a = sum (-1)^{|J|} D_J dL/du^a_J.)
ZeroVerdict verify_noether_identity(const VectorField& X, const MuForm& mu, const Lagrangian& L,
                                    const OracleConfig& cfg = {});

// Linear on-shell reduction: eliminates jet coordinates of order >= elim_order
// against the span of the generators (coefficients found by linear matching);
// returns the reduced remainder, or nullopt when the residual is not in the
// span. Generators that are nonlinear in the eliminated coordinates are
// dropped; augment with D_i generators before calling if needed.
std::optional<Expr> eliminate_on_shell(const Expr& residual, const std::vector<Expr>& generators,
                                       const JetContext& ctx, int elim_order);

// eliminate_on_shell against {E_a} augmented with {D_i E_a} when the residual
// order calls for it.
std::optional<Expr> reduce_on_shell(const Expr& residual, const std::vector<Expr>& equations,
                                    const JetContext& ctx);

enum class ConservationClass { StandardConserved, MuConserved, Conditional, None };

const char* conservation_class_name(ConservationClass c);

struct ConservationReport {
    Expr divergence_residual;                // D_i Tr P^i, off shell
    Expr mu_residual;                        // Tr(nabla_i P^i), off shell
    std::optional<Expr> on_shell_divergence; // divergence residual reduced on shell
    std::optional<Expr> on_shell_mu_residual;
    ConservationClass classification = ConservationClass::None;
    bool on_shell = false;            // whether the equations of motion were used
    std::optional<Expr> decay_factor; // p = 1: on-shell D_t Tr P = factor * Tr P
};

ConservationReport mu_divergence(const MVector& P, const MuForm& mu,
                                 const std::vector<Expr>& equations = {},
                                 const OracleConfig& cfg = {});

struct DivergenceSymmetryReport {
    ZeroVerdict invariance;        // divergence mu-symmetry residual
    std::vector<Expr> current;     // trace components of the conserved quantity
    Expr on_shell_divergence;      // D_i current^i reduced on shell
    Expr expected_rhs;             // the mu-side the divergence must equal
    ZeroVerdict conservation;      // verdict of their difference
};

// With B supplied (vertical X): checks Y[L] = Tr(nabla_i B^i) and the
// mu-conservation of P - B. Without B: the built-in B_i = -L xi_i delta,
// with trace current Q^a pi^i_a + L xi^i.
DivergenceSymmetryReport divergence_symmetry_check(const VectorField& X, const MuForm& mu,
                                                   const Lagrangian& L,
                                                   const std::optional<MVector>& B = {},
                                                   const OracleConfig& cfg = {});

struct ConditionalReport {
    bool eigen_ok = false;
    std::vector<Expr> lambda; // scalar eigenvalues of the Lambda_i on phi
    ZeroVerdict symmetry;     // Y[L] - alpha Tr P (or Y[L] - Tr(A_i P^i))
    Expr decay_factor;        // alpha - lambda (p = 1 form)
    ZeroVerdict decay;        // on-shell decay law
};

// p = 1 with Lambda phi = lambda phi: checks Y[L] = alpha Tr P and the decay
// law D_t Tr P = (alpha - lambda) Tr P on shell.
ConditionalReport conditional_invariant_check(const VectorField& X, const MuForm& mu,
                                              const Lagrangian& L, const Expr& alpha,
                                              const OracleConfig& cfg = {});

// General p with supplied matrices A_i: Y[L] = Tr(A_i P^i) and
// D_i Tr P^i = Tr((A_i - Lambda_i) P^i) on shell.
ConditionalReport conditional_invariant_check(const VectorField& X, const MuForm& mu,
                                              const Lagrangian& L,
                                              const std::vector<ExprMatrix>& A,
                                              const OracleConfig& cfg = {});

struct ReductionResult {
    bool ok = false;
    Expr gamma;
    std::vector<Expr> current; // gamma-dressed standard current
    ZeroVerdict divergence;    // ordinary divergence on shell
    Expr on_shell_divergence;
    std::string message;
};

// Gauge reduction to a standard conservation law: q = 1, or the
// common-eigenvector case; gamma recovered via gamma_from_lambda unless
// supplied. For xi != 0 (q = 1) the current carries the L xi^i term.
ReductionResult standard_reduction(const VectorField& X, const MuForm& mu, const Lagrangian& L,
                                   const std::optional<Expr>& gamma = {},
                                   const OracleConfig& cfg = {});

struct Theorem9Report {
    ZeroVerdict symmetry;      // Y[L]
    ZeroVerdict identity;      // Y[L] - phi.muEL - D_i(phi^a pi^i_a), off shell
    ZeroVerdict conservation;  // D_i(phi^a pi^i_a) reduced modulo the mu-EL equations
    std::vector<Expr> current; // phi^a pi^i_a
};

Theorem9Report theorem9_conservation(const VectorField& X, const MuForm& mu, const Lagrangian& L,
                                     const OracleConfig& cfg = {});

struct DualReport {
    ZeroVerdict standard_symmetry; // X^{(1)}[L], must vanish off shell
    ZeroVerdict dual_conservation; // D_i(phi pi) - pi^i_b (Lambda_i)^b_a phi^a mod mu-EL
    std::vector<Expr> current;
};

// Section 7.3 dual: a standard symmetry of L yields a (-mu)-conservation law
// under the mu-Euler-Lagrange flow.
DualReport dual_mu_conservation(const VectorField& X, const MuForm& mu, const Lagrangian& L,
                                const OracleConfig& cfg = {});

struct SolutionCheck {
    std::vector<ZeroVerdict> equations;
    bool all_zero() const {
        for (const auto& v : equations)
            if (!v.zero()) return false;
        return true;
    }
};

// solution maps dependent index -> expression in the independent variables
// and parameters; jet bindings are derived automatically.
SolutionCheck verify_solution(const std::vector<Expr>& equations,
                              const std::map<int, Expr>& solution, const JetContext& ctx,
                              const OracleConfig& cfg = {});

// The substitution map verify_solution uses (exposed for currents-on-solution
// checks).
std::map<SymbolId, Expr> solution_bindings(const std::vector<Expr>& targets,
                                           const std::map<int, Expr>& solution,
                                           const JetContext& ctx);

} // namespace musym
