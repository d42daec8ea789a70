#pragma once

#include "musym/noether.hpp"
#include "musym/parser.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace musym {

struct Directive {
    enum class Kind {
        CheckCompatibility,
        CheckMuSymmetry,
        DeriveConservedVector,
        CheckConservation,
        CheckDivergenceSymmetry,
        CheckConditional,
        DeriveStandardReduction,
        CheckTheorem9,
        CheckDual,
        VerifySolution,
    };
    Kind kind = Kind::CheckCompatibility;
    std::string field;    // vector field name
    std::string target;   // lagrangian or invariant-coordinate name
    std::string solution; // solution name (verify solution)
    std::optional<Expr> alpha;
    std::string text; // raw directive line, echoed in reports
    int line = 0;
};

// Parsed .mun problem: declarations then directives.
struct ProblemFile {
    JetContext ctx;
    std::vector<ExprMatrix> lambda;
    bool lambda_given = false;
    std::optional<Expr> gamma;
    std::vector<std::pair<std::string, VectorField>> fields;
    std::vector<std::pair<std::string, Lagrangian>> lagrangians;
    std::vector<std::pair<std::string, Expr>> invariants;
    std::vector<std::pair<std::string, std::map<int, Expr>>> solutions;
    std::vector<Directive> directives;

    const VectorField* find_field(const std::string& n) const;
    const Lagrangian* find_lagrangian(const std::string& n) const;
    const Expr* find_invariant(const std::string& n) const;
    const std::map<int, Expr>* find_solution(const std::string& n) const;
};

ProblemFile parse_problem(const std::string& text);

// Canonical re-rendering; parse(pretty_print(parse(t))) is a fixed point.
std::string pretty_print(const ProblemFile& pf);

struct RunOptions {
    OracleConfig oracle;
    ProlongMode mode = ProlongMode::Mu;
};

struct DirectiveResult {
    std::string directive; // echo of the source line
    Verdict verdict = Verdict::Indeterminate;
    std::string residual;       // canonical print of the operative residual
    std::string classification; // conservation class when meaningful
    std::map<std::string, std::string> detail;
    bool error = false;
    std::string error_message;
    double ms = 0.0; // wall time, text report only
};

struct Report {
    std::string problem;
    std::uint64_t seed = 0;
    int points = 0;
    std::string mode;
    std::vector<DirectiveResult> results;

    bool any_error() const;
    bool all_zero() const;
    // 0: all directives zero; 1: some NonZero/Indeterminate; 2: structural error
    int exit_code() const;
    std::string to_text() const;
    std::string to_json() const; // stable key order, timing omitted
};

Report run(const ProblemFile& pf, const RunOptions& opts, const std::string& name = "");

} // namespace musym
