#include "verafi/policy.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

using nlohmann::json;

namespace verafi {

const char* policy_op_name(PolicyOp op) {
    switch (op) {
        case PolicyOp::Eq: return "=";
        case PolicyOp::Add: return "+";
        case PolicyOp::Sub: return "-";
        case PolicyOp::Mul: return "*";
        case PolicyOp::Div: return "/";
        case PolicyOp::Lt: return "<";
        case PolicyOp::Le: return "<=";
        case PolicyOp::Gt: return ">";
        case PolicyOp::Ge: return ">=";
        case PolicyOp::Implies: return "=>";
        case PolicyOp::And: return "and";
        case PolicyOp::Or: return "or";
        case PolicyOp::Not: return "not";
    }
    return "?";
}

bool ast_equal(const PolicyAst& a, const PolicyAst& b) {
    if (a.node.index() != b.node.index()) return false;
    if (auto* sa = std::get_if<PolicyAst::Symbol>(&a.node)) {
        return sa->name == std::get<PolicyAst::Symbol>(b.node).name;
    }
    if (auto* na = std::get_if<PolicyAst::Number>(&a.node)) {
        return na->value == std::get<PolicyAst::Number>(b.node).value;
    }
    if (auto* ba = std::get_if<PolicyAst::Boolean>(&a.node)) {
        return ba->value == std::get<PolicyAst::Boolean>(b.node).value;
    }
    const auto& aa = std::get<PolicyAst::Apply>(a.node);
    const auto& ab = std::get<PolicyAst::Apply>(b.node);
    if (aa.op != ab.op || aa.args.size() != ab.args.size()) return false;
    for (size_t i = 0; i < aa.args.size(); ++i) {
        if (!ast_equal(*aa.args[i], *ab.args[i])) return false;
    }
    return true;
}

namespace {

struct Token {
    enum Kind { LParen, RParen, Atom, End } kind;
    std::string text;
    size_t position;
};

std::vector<Token> lex(const std::string& text) {
    std::vector<Token> tokens;
    size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '(') {
            tokens.push_back({Token::LParen, "(", i});
            ++i;
        } else if (c == ')') {
            tokens.push_back({Token::RParen, ")", i});
            ++i;
        } else {
            size_t start = i;
            while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) &&
                   text[i] != '(' && text[i] != ')') {
                ++i;
            }
            tokens.push_back({Token::Atom, text.substr(start, i - start), start});
        }
    }
    tokens.push_back({Token::End, "", text.size()});
    return tokens;
}

std::optional<PolicyOp> lookup_op(const std::string& name) {
    static const std::map<std::string, PolicyOp> ops = {
        {"=", PolicyOp::Eq},        {"+", PolicyOp::Add},  {"-", PolicyOp::Sub},
        {"*", PolicyOp::Mul},       {"/", PolicyOp::Div},  {"<", PolicyOp::Lt},
        {"<=", PolicyOp::Le},       {">", PolicyOp::Gt},   {">=", PolicyOp::Ge},
        {"=>", PolicyOp::Implies},  {"and", PolicyOp::And}, {"or", PolicyOp::Or},
        {"not", PolicyOp::Not},
    };
    auto it = ops.find(name);
    if (it == ops.end()) return std::nullopt;
    return it->second;
}

void check_arity(PolicyOp op, size_t n, size_t position) {
    bool ok = false;
    switch (op) {
        case PolicyOp::Not:
            ok = n == 1;
            break;
        case PolicyOp::Implies:
        case PolicyOp::Sub:
        case PolicyOp::Div:
        case PolicyOp::Lt:
        case PolicyOp::Le:
        case PolicyOp::Gt:
        case PolicyOp::Ge:
            ok = n == 2;
            break;
        case PolicyOp::Eq:
        case PolicyOp::Add:
        case PolicyOp::Mul:
        case PolicyOp::And:
        case PolicyOp::Or:
            ok = n >= 2;
            break;
    }
    if (!ok) {
        throw ParseError(std::string("operator '") + policy_op_name(op) +
                             "' applied to " + std::to_string(n) + " arguments",
                         position);
    }
}

AstPtr make_atom(const Token& token) {
    if (auto number = parse_number_literal(token.text)) {
        return std::make_shared<PolicyAst>(PolicyAst{PolicyAst::Number{*number}});
    }
    if (token.text == "true") {
        return std::make_shared<PolicyAst>(PolicyAst{PolicyAst::Boolean{true}});
    }
    if (token.text == "false") {
        return std::make_shared<PolicyAst>(PolicyAst{PolicyAst::Boolean{false}});
    }
    return std::make_shared<PolicyAst>(PolicyAst{PolicyAst::Symbol{token.text}});
}

AstPtr parse_expr(const std::vector<Token>& tokens, size_t& pos) {
    const Token& token = tokens[pos];
    switch (token.kind) {
        case Token::Atom:
            ++pos;
            return make_atom(token);
        case Token::LParen: {
            ++pos;
            if (tokens[pos].kind != Token::Atom) {
                throw ParseError("expected operator after '('", tokens[pos].position);
            }
            auto op = lookup_op(tokens[pos].text);
            if (!op) {
                throw ParseError("unknown operator '" + tokens[pos].text + "'",
                                 tokens[pos].position);
            }
            size_t op_position = tokens[pos].position;
            ++pos;
            std::vector<AstPtr> args;
            while (tokens[pos].kind != Token::RParen) {
                if (tokens[pos].kind == Token::End) {
                    throw ParseError("unclosed parenthesis", tokens[pos].position);
                }
                args.push_back(parse_expr(tokens, pos));
            }
            ++pos;  // consume ')'
            check_arity(*op, args.size(), op_position);
            return std::make_shared<PolicyAst>(PolicyAst{PolicyAst::Apply{*op, std::move(args)}});
        }
        case Token::RParen:
            throw ParseError("unexpected ')'", token.position);
        case Token::End:
            throw ParseError("unexpected end of input", token.position);
    }
    throw ParseError("unreachable", token.position);
}

}  // namespace

AstPtr parse_smtlib(const std::string& text) {
    auto tokens = lex(text);
    size_t pos = 0;
    AstPtr ast = parse_expr(tokens, pos);
    if (tokens[pos].kind != Token::End) {
        throw ParseError("trailing input after expression", tokens[pos].position);
    }
    return ast;
}

std::string render_smtlib(const PolicyAst& ast) {
    if (auto* sym = std::get_if<PolicyAst::Symbol>(&ast.node)) return sym->name;
    if (auto* num = std::get_if<PolicyAst::Number>(&ast.node)) {
        return to_decimal_string(num->value);
    }
    if (auto* b = std::get_if<PolicyAst::Boolean>(&ast.node)) return b->value ? "true" : "false";
    const auto& apply = std::get<PolicyAst::Apply>(ast.node);
    std::string out = "(";
    out += policy_op_name(apply.op);
    for (const auto& arg : apply.args) {
        out += " ";
        out += render_smtlib(*arg);
    }
    out += ")";
    return out;
}

// --- evaluation ------------------------------------------------------------

namespace {

bool is_enum_constant(const std::string& name) {
    if (name.empty() || !std::isupper(static_cast<unsigned char>(name[0]))) return false;
    return std::all_of(name.begin(), name.end(), [](char c) {
        unsigned char uc = static_cast<unsigned char>(c);
        return std::isupper(uc) || std::isdigit(uc) || c == '_';
    });
}

struct TypeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DivByZero {
    std::string diagnostic;
};

// Evaluation outcome: a value, a set of missing symbols, or a division by
// zero. Kleene logic for the boolean connectives keeps verdicts monotone in
// the environment.
struct EvalResult {
    enum Kind { Val, Unknown, DivZero } kind = Unknown;
    PolicyValue value;
    std::set<std::string> missing;
    std::string diagnostic;

    static EvalResult of(PolicyValue v) { return {Val, std::move(v), {}, {}}; }
    static EvalResult unknown(std::set<std::string> missing) {
        return {Unknown, {}, std::move(missing), {}};
    }
    static EvalResult div_zero(std::string diag) { return {DivZero, {}, {}, std::move(diag)}; }

    bool is_bool(bool b) const {
        return kind == Val && std::holds_alternative<bool>(value) && std::get<bool>(value) == b;
    }
};

const Rational& as_number(const EvalResult& r) {
    if (!std::holds_alternative<Rational>(r.value)) {
        throw TypeError("expected a number in arithmetic context");
    }
    return std::get<Rational>(r.value);
}

std::set<std::string> merge_missing(const std::vector<EvalResult>& results) {
    std::set<std::string> missing;
    for (const auto& r : results) {
        if (r.kind == EvalResult::Unknown) missing.insert(r.missing.begin(), r.missing.end());
    }
    return missing;
}

EvalResult eval_ast(const PolicyAst& ast, const Environment& env, const Rational& epsilon);

bool numbers_equal(const Rational& a, const Rational& b, const Rational& epsilon) {
    Rational diff = a - b;
    if (diff < 0) diff = -diff;
    Rational aa = a < 0 ? Rational(-a) : a;
    Rational ab = b < 0 ? Rational(-b) : b;
    return diff <= epsilon * std::max(aa, ab);
}

EvalResult eval_equality(const std::vector<EvalResult>& args, const Rational& epsilon) {
    // Two determined unequal arguments decide falsity even with other
    // arguments unknown.
    for (size_t i = 0; i < args.size(); ++i) {
        for (size_t j = i + 1; j < args.size(); ++j) {
            if (args[i].kind != EvalResult::Val || args[j].kind != EvalResult::Val) continue;
            const auto& a = args[i].value;
            const auto& b = args[j].value;
            if (a.index() != b.index()) {
                throw TypeError("'=' compares values of different types");
            }
            bool eq;
            if (std::holds_alternative<Rational>(a)) {
                eq = numbers_equal(std::get<Rational>(a), std::get<Rational>(b), epsilon);
            } else if (std::holds_alternative<bool>(a)) {
                eq = std::get<bool>(a) == std::get<bool>(b);
            } else {
                eq = std::get<std::string>(a) == std::get<std::string>(b);
            }
            if (!eq) return EvalResult::of(false);
        }
    }
    auto missing = merge_missing(args);
    if (!missing.empty()) return EvalResult::unknown(std::move(missing));
    return EvalResult::of(true);
}

EvalResult eval_apply(const PolicyAst::Apply& apply, const Environment& env,
                      const Rational& epsilon) {
    std::vector<EvalResult> args;
    args.reserve(apply.args.size());
    for (const auto& arg : apply.args) {
        args.push_back(eval_ast(*arg, env, epsilon));
    }
    for (const auto& r : args) {
        if (r.kind == EvalResult::DivZero &&
            !(apply.op == PolicyOp::Implies || apply.op == PolicyOp::And ||
              apply.op == PolicyOp::Or)) {
            return r;
        }
    }
    switch (apply.op) {
        case PolicyOp::Add:
        case PolicyOp::Mul:
        case PolicyOp::Sub: {
            for (const auto& r : args) {
                if (r.kind == EvalResult::Val) as_number(r);  // type check
            }
            auto missing = merge_missing(args);
            if (!missing.empty()) return EvalResult::unknown(std::move(missing));
            Rational acc = as_number(args[0]);
            for (size_t i = 1; i < args.size(); ++i) {
                const Rational& v = as_number(args[i]);
                if (apply.op == PolicyOp::Add) acc += v;
                else if (apply.op == PolicyOp::Mul) acc *= v;
                else acc -= v;
            }
            return EvalResult::of(acc);
        }
        case PolicyOp::Div: {
            for (const auto& r : args) {
                if (r.kind == EvalResult::Val) as_number(r);
            }
            if (args[1].kind == EvalResult::Val && as_number(args[1]) == 0) {
                return EvalResult::div_zero("division by zero in '" +
                                            render_smtlib(PolicyAst{apply}) + "'");
            }
            auto missing = merge_missing(args);
            if (!missing.empty()) return EvalResult::unknown(std::move(missing));
            return EvalResult::of(Rational(as_number(args[0]) / as_number(args[1])));
        }
        case PolicyOp::Lt:
        case PolicyOp::Le:
        case PolicyOp::Gt:
        case PolicyOp::Ge: {
            for (const auto& r : args) {
                if (r.kind == EvalResult::Val) as_number(r);
            }
            auto missing = merge_missing(args);
            if (!missing.empty()) return EvalResult::unknown(std::move(missing));
            const Rational& a = as_number(args[0]);
            const Rational& b = as_number(args[1]);
            bool result = apply.op == PolicyOp::Lt   ? a < b
                          : apply.op == PolicyOp::Le ? a <= b
                          : apply.op == PolicyOp::Gt ? a > b
                                                     : a >= b;
            return EvalResult::of(result);
        }
        case PolicyOp::Eq:
            return eval_equality(args, epsilon);
        case PolicyOp::Not: {
            const auto& a = args[0];
            if (a.kind == EvalResult::DivZero) return a;
            if (a.kind == EvalResult::Unknown) return a;
            if (!std::holds_alternative<bool>(a.value)) {
                throw TypeError("'not' applied to a non-boolean");
            }
            return EvalResult::of(!std::get<bool>(a.value));
        }
        case PolicyOp::And:
        case PolicyOp::Or: {
            bool is_and = apply.op == PolicyOp::And;
            for (const auto& a : args) {
                if (a.kind == EvalResult::Val && !std::holds_alternative<bool>(a.value)) {
                    throw TypeError("boolean connective applied to a non-boolean");
                }
            }
            // A dominant operand decides the result regardless of the rest.
            for (const auto& a : args) {
                if (a.is_bool(!is_and)) return EvalResult::of(!is_and);
            }
            for (const auto& a : args) {
                if (a.kind == EvalResult::DivZero) return a;
            }
            auto missing = merge_missing(args);
            if (!missing.empty()) return EvalResult::unknown(std::move(missing));
            return EvalResult::of(is_and);
        }
        case PolicyOp::Implies: {
            const auto& antecedent = args[0];
            const auto& consequent = args[1];
            if (antecedent.kind == EvalResult::Val &&
                !std::holds_alternative<bool>(antecedent.value)) {
                throw TypeError("'=>' antecedent is not boolean");
            }
            if (consequent.kind == EvalResult::Val &&
                !std::holds_alternative<bool>(consequent.value)) {
                throw TypeError("'=>' consequent is not boolean");
            }
            if (antecedent.is_bool(false)) return EvalResult::of(true);
            if (consequent.is_bool(true)) return EvalResult::of(true);
            if (antecedent.kind == EvalResult::DivZero) return antecedent;
            if (consequent.kind == EvalResult::DivZero) return consequent;
            if (antecedent.kind == EvalResult::Unknown || consequent.kind == EvalResult::Unknown) {
                std::set<std::string> missing;
                if (antecedent.kind == EvalResult::Unknown) {
                    missing.insert(antecedent.missing.begin(), antecedent.missing.end());
                }
                if (consequent.kind == EvalResult::Unknown) {
                    missing.insert(consequent.missing.begin(), consequent.missing.end());
                }
                return EvalResult::unknown(std::move(missing));
            }
            return EvalResult::of(std::get<bool>(consequent.value));
        }
    }
    throw TypeError("unhandled operator");
}

EvalResult eval_ast(const PolicyAst& ast, const Environment& env, const Rational& epsilon) {
    if (auto* num = std::get_if<PolicyAst::Number>(&ast.node)) {
        return EvalResult::of(num->value);
    }
    if (auto* b = std::get_if<PolicyAst::Boolean>(&ast.node)) {
        return EvalResult::of(b->value);
    }
    const auto& sym = std::get_if<PolicyAst::Symbol>(&ast.node);
    if (sym) {
        auto it = env.find(sym->name);
        if (it != env.end()) return EvalResult::of(it->second);
        if (is_enum_constant(sym->name)) return EvalResult::of(PolicyValue{sym->name});
        return EvalResult::unknown({sym->name});
    }
    return eval_apply(std::get<PolicyAst::Apply>(ast.node), env, epsilon);
}

}  // namespace

RuleVerdict evaluate_rule(const PolicyRule& rule, const Environment& env, double epsilon) {
    if (!rule.ast) {
        throw std::runtime_error("rule " + rule.id + " has no parsed expression");
    }
    RuleVerdict verdict;
    verdict.rule_id = rule.id;
    EvalResult result = eval_ast(*rule.ast, env, Rational(epsilon));
    switch (result.kind) {
        case EvalResult::DivZero:
            verdict.status = RuleStatus::Violated;
            verdict.diagnostic = result.diagnostic;
            break;
        case EvalResult::Unknown:
            verdict.status = RuleStatus::Indeterminate;
            verdict.missing_symbols.assign(result.missing.begin(), result.missing.end());
            break;
        case EvalResult::Val:
            if (!std::holds_alternative<bool>(result.value)) {
                throw std::runtime_error("rule " + rule.id +
                                         " does not evaluate to a boolean");
            }
            verdict.status =
                std::get<bool>(result.value) ? RuleStatus::Satisfied : RuleStatus::Violated;
            break;
    }
    return verdict;
}

// --- loading / rendering / linting -----------------------------------------

PolicySet load_policies(const std::string& path, bool strict) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open policy file: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const std::exception& e) {
        throw std::runtime_error("malformed policy file " + path + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("rules") || !doc["rules"].is_array()) {
        throw std::runtime_error("policy file " + path + " has no top-level \"rules\" array");
    }
    PolicySet set;
    set.source_path = path;
    std::set<std::string> seen;
    for (const auto& entry : doc["rules"]) {
        PolicyRule rule;
        rule.id = entry.at("id").get<std::string>();
        rule.expression = entry.at("expression").get<std::string>();
        rule.alternate_expression = entry.at("alternateExpression").get<std::string>();
        if (rule.id.empty()) throw std::runtime_error("policy rule with empty id in " + path);
        if (!seen.insert(rule.id).second) {
            if (strict) throw std::runtime_error("duplicate policy rule id: " + rule.id);
        }
        try {
            rule.ast = parse_smtlib(rule.expression);
        } catch (const ParseError& e) {
            if (strict) {
                throw std::runtime_error("rule " + rule.id + ": " + e.what());
            }
            rule.parse_error = e.what();
        }
        set.rules.push_back(std::move(rule));
    }
    return set;
}

std::string format_policy_context(const PolicySet& policies, size_t max_rules) {
    if (max_rules == 0) throw std::invalid_argument("max_rules must be >= 1");
    std::string out = "FINANCIAL VALIDATION RULES:";
    size_t shown = std::min(max_rules, policies.rules.size());
    for (size_t i = 0; i < shown; ++i) {
        out += "\n" + policies.rules[i].alternate_expression;
    }
    if (shown < policies.rules.size()) {
        out += "\n... and " + std::to_string(policies.rules.size() - shown) +
               " additional validation rules";
    }
    return out;
}

namespace {

void collect_symbols(const PolicyAst& ast, std::set<std::string>& out) {
    if (auto* sym = std::get_if<PolicyAst::Symbol>(&ast.node)) {
        out.insert(sym->name);
        return;
    }
    if (auto* apply = std::get_if<PolicyAst::Apply>(&ast.node)) {
        for (const auto& arg : apply->args) collect_symbols(*arg, out);
    }
}

}  // namespace

std::vector<std::string> lint_policy_set(const PolicySet& policies) {
    std::vector<std::string> diagnostics;
    std::map<std::string, int> id_counts;
    std::map<std::string, std::set<std::string>> symbol_rules;  // symbol -> rule ids
    for (const auto& rule : policies.rules) {
        ++id_counts[rule.id];
        if (!rule.ast) {
            diagnostics.push_back("rule " + rule.id + " does not parse: " + rule.parse_error);
            continue;
        }
        std::set<std::string> symbols;
        collect_symbols(*rule.ast, symbols);
        for (const auto& s : symbols) symbol_rules[s].insert(rule.id);
    }
    for (const auto& [id, count] : id_counts) {
        if (count > 1) {
            diagnostics.push_back("duplicate rule id " + id + " (" + std::to_string(count) +
                                  " occurrences)");
        }
    }
    for (const auto& [symbol, rules] : symbol_rules) {
        if (rules.size() == 1) {
            diagnostics.push_back("symbol '" + symbol + "' appears only in rule " +
                                  *rules.begin() + " (possible typo)");
        }
    }
    return diagnostics;
}

}  // namespace verafi
