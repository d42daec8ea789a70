#pragma once

#include "musym/expr.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace musym {

enum class Verdict : unsigned char { ZeroSymbolic, ZeroNumeric, NonZero, Indeterminate };

struct ZeroVerdict {
    Verdict kind = Verdict::Indeterminate;
    Expr residual;
    std::string witness; // sample point for NonZero verdicts

    bool zero() const { return kind == Verdict::ZeroSymbolic || kind == Verdict::ZeroNumeric; }
    static const char* name(Verdict v);
};

struct OracleConfig {
    int points = 20;
    double rel_tol = 1e-9;
    double abs_floor = 1e-12;
    int max_resamples = 50;
    std::uint64_t seed = 20240901;
};

// Thrown by evaluation at a point outside an expression's domain (log of a
// non-positive value, vanishing denominator, ...); the oracle resamples.
struct eval_domain_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Concrete sample: symbol values plus cubic realizations of the uninterpreted
// functions, so that V and V' are evaluated consistently.
struct PointBindings {
    std::map<SymbolId, double> values;
    std::map<std::string, std::array<double, 4>> cubics;
};

double evaluate(const Expr& e, const PointBindings& pt);
double evaluate_at(const Expr& e, const std::map<SymbolId, double>& point);

// Deterministic for fixed (cfg.seed, point_index, attempt). Magnitudes are
// drawn from [0.1, 2] with random sign, keeping clear of the singular
// hyperplanes the corpus divides by.
PointBindings sample_point(const std::set<SymbolId>& symbols,
                           const std::set<std::string>& ufunc_names, const OracleConfig& cfg,
                           int point_index, int attempt);

std::set<std::string> collect_ufunc_names(const Expr& e);

ZeroVerdict is_zero(const Expr& e, const OracleConfig& cfg = {});
ZeroVerdict prob_equal(const Expr& a, const Expr& b, const OracleConfig& cfg = {});

} // namespace musym
