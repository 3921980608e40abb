#pragma once

#include "verafi/rational.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace verafi {

enum class PolicyOp { Eq, Add, Sub, Mul, Div, Lt, Le, Gt, Ge, Implies, And, Or, Not };

const char* policy_op_name(PolicyOp op);

struct PolicyAst;
using AstPtr = std::shared_ptr<const PolicyAst>;

struct PolicyAst {
    struct Symbol {
        std::string name;
    };
    struct Number {
        Rational value;
    };
    struct Boolean {
        bool value;
    };
    struct Apply {
        PolicyOp op;
        std::vector<AstPtr> args;
    };
    std::variant<Symbol, Number, Boolean, Apply> node;
};

bool ast_equal(const PolicyAst& a, const PolicyAst& b);

struct ParseError : std::runtime_error {
    ParseError(const std::string& message, size_t position)
        : std::runtime_error(message + " at position " + std::to_string(position)),
          position(position) {}
    size_t position;
};

// Parses one SMT-lib s-expression. Numbers become exact rationals, bare
// identifiers become symbols, "true"/"false" become booleans. Operator
// arities are checked (not unary; => and the binary arithmetic/comparison
// operators binary; =, +, *, and, or n-ary with n >= 2).
AstPtr parse_smtlib(const std::string& text);

// Inverse of parse_smtlib up to whitespace: parse(render(ast)) == ast.
std::string render_smtlib(const PolicyAst& ast);

// An environment value: exact rational, boolean, or uninterpreted enum
// constant (compared by name).
using PolicyValue = std::variant<Rational, bool, std::string>;
using Environment = std::map<std::string, PolicyValue>;

enum class RuleStatus { Satisfied, Violated, Indeterminate };

struct RuleVerdict {
    std::string rule_id;
    RuleStatus status = RuleStatus::Indeterminate;
    std::vector<std::string> missing_symbols;  // non-empty iff Indeterminate
    std::string diagnostic;
};

struct PolicyRule {
    std::string id;
    std::string expression;            // SMT-lib text
    std::string alternate_expression;  // natural-language form
    AstPtr ast;                        // null only in lenient loads
    std::string parse_error;           // set when ast is null
};

struct PolicySet {
    std::vector<PolicyRule> rules;  // file order preserved
    std::string source_path;
};

// Loads the policy JSON file: top-level "rules", each rule with keys "id",
// "alternateExpression", "expression". Strict mode throws on unparseable
// expressions and duplicate ids; lenient mode records them for linting.
PolicySet load_policies(const std::string& path, bool strict = true);

// Numeric equality inside rules uses relative tolerance
// |a - b| <= epsilon * max(|a|, |b|); comparisons are otherwise exact.
// Unbound symbols make the verdict Indeterminate, except that => with a
// false antecedent is Satisfied regardless of the consequent. Division by
// zero yields Violated with a diagnostic. Symbols written in ALL_CAPS are
// uninterpreted enum constants unless explicitly bound.
RuleVerdict evaluate_rule(const PolicyRule& rule, const Environment& env, double epsilon = 1e-6);

// Renders the in-context policy block: the exact header line
// "FINANCIAL VALIDATION RULES:" followed by the alternate expressions of
// the first max_rules rules, plus a trailing
// "... and {N} additional validation rules" line when truncated.
std::string format_policy_context(const PolicySet& policies, size_t max_rules);

// Reports unparseable rules, duplicate ids, and symbols appearing in
// exactly one rule. Empty result means clean.
std::vector<std::string> lint_policy_set(const PolicySet& policies);

}  // namespace verafi
