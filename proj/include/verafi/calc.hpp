#pragma once

#include "verafi/rational.hpp"

#include <string>

namespace verafi {

struct CalcError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Evaluates an arithmetic expression over +, -, *, /, unary minus,
// parentheses, and integer/decimal literals with exact rational arithmetic.
Rational calculator_eval(const std::string& expression);

// calculator_eval rendered as a decimal string (exact when terminating,
// otherwise 12 significant digits).
std::string tool_calculator(const std::string& expression);

// Sandboxed numeric mini-language: one statement per line, either
// `name = expr` or a bare expression; the final expression's value is the
// output. Expressions support arithmetic, comparisons, and the built-ins
// abs, min, max, sum, round, pow. No loops, no name access outside bound
// variables and built-ins, no I/O. Evaluation is bounded by a step budget.
std::string tool_code_eval(const std::string& program, size_t step_budget = 10000);

}  // namespace verafi
