#pragma once

#include "musym/context.hpp"

#include <stdexcept>
#include <string>

namespace musym {

struct parse_error : std::runtime_error {
    size_t offset;
    parse_error(const std::string& msg, size_t off)
        : std::runtime_error(msg + " (at byte " + std::to_string(off) + ")"), offset(off) {}
};

// Parses infix expression text against the declared symbols of a context.
// Grammar: + - * / ^, unary minus, exp/log/sin/cos/sqrt, declared
// uninterpreted functions V(...) with derivative apostrophes V'(...),
// jet subscripts u_xy, and mechanical dots q1d, q1dd when p = 1.
Expr parse_expr(const std::string& text, const JetContext& ctx);

} // namespace musym
