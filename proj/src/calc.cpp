#include "verafi/calc.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <variant>
#include <vector>

namespace verafi {

namespace {

struct Token {
    enum Kind { Number, Ident, Op, End } kind = End;
    std::string text;
    Rational number;
    size_t position = 0;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) { advance(); }

    const Token& peek() const { return current_; }

    Token take() {
        Token t = current_;
        advance();
        return t;
    }

    [[noreturn]] void fail(const std::string& message) const {
        throw CalcError(message + " at position " + std::to_string(current_.position));
    }

private:
    void advance() {
        while (pos_ < text_.size() &&
               std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
        current_.position = pos_;
        if (pos_ >= text_.size()) {
            current_ = {Token::End, "", 0, pos_};
            return;
        }
        char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && pos_ + 1 < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
            size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
                ++pos_;
            }
            std::string literal = text_.substr(start, pos_ - start);
            auto number = parse_number_literal(literal);
            if (!number) throw CalcError("bad number literal '" + literal + "' at position " +
                                         std::to_string(start));
            current_ = {Token::Number, literal, *number, start};
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
                ++pos_;
            }
            current_ = {Token::Ident, text_.substr(start, pos_ - start), 0, start};
            return;
        }
        static const std::vector<std::string> two_char = {"<=", ">=", "==", "!="};
        for (const auto& op : two_char) {
            if (text_.compare(pos_, 2, op) == 0) {
                current_ = {Token::Op, op, 0, pos_};
                pos_ += 2;
                return;
            }
        }
        if (std::string("+-*/(),=<>").find(c) != std::string::npos) {
            current_ = {Token::Op, std::string(1, c), 0, pos_};
            ++pos_;
            return;
        }
        throw CalcError(std::string("unexpected character '") + c + "' at position " +
                        std::to_string(pos_));
    }

    const std::string& text_;
    size_t pos_ = 0;
    Token current_;
};

using Value = std::variant<Rational, bool>;

const Rational& number_of(const Value& v, const char* context) {
    if (!std::holds_alternative<Rational>(v)) {
        throw CalcError(std::string("expected a number in ") + context);
    }
    return std::get<Rational>(v);
}

class Evaluator {
public:
    Evaluator(bool allow_names, size_t step_budget)
        : allow_names_(allow_names), steps_left_(step_budget) {}

    std::map<std::string, Value> variables;

    Value eval_expression(Lexer& lex) {
        Value left = eval_additive(lex);
        if (lex.peek().kind == Token::Op) {
            std::string op = lex.peek().text;  // copy: take() overwrites the peeked token
            if (op == "<" || op == "<=" || op == ">" || op == ">=" || op == "==" || op == "!=") {
                lex.take();
                Value right = eval_additive(lex);
                const Rational& a = number_of(left, "comparison");
                const Rational& b = number_of(right, "comparison");
                bool result = op == "<"    ? a < b
                              : op == "<=" ? a <= b
                              : op == ">"  ? a > b
                              : op == ">=" ? a >= b
                              : op == "==" ? a == b
                                           : a != b;
                return result;
            }
        }
        return left;
    }

private:
    void spend() {
        if (steps_left_ == 0) throw CalcError("step budget exceeded");
        --steps_left_;
    }

    Value eval_additive(Lexer& lex) {
        Value acc = eval_term(lex);
        while (lex.peek().kind == Token::Op &&
               (lex.peek().text == "+" || lex.peek().text == "-")) {
            spend();
            std::string op = lex.take().text;
            Value rhs = eval_term(lex);
            Rational a = number_of(acc, "arithmetic");
            const Rational& b = number_of(rhs, "arithmetic");
            acc = op == "+" ? Rational(a + b) : Rational(a - b);
        }
        return acc;
    }

    Value eval_term(Lexer& lex) {
        Value acc = eval_unary(lex);
        while (lex.peek().kind == Token::Op &&
               (lex.peek().text == "*" || lex.peek().text == "/")) {
            spend();
            std::string op = lex.take().text;
            Value rhs = eval_unary(lex);
            Rational a = number_of(acc, "arithmetic");
            const Rational& b = number_of(rhs, "arithmetic");
            if (op == "/") {
                if (b == 0) throw CalcError("division by zero");
                acc = Rational(a / b);
            } else {
                acc = Rational(a * b);
            }
        }
        return acc;
    }

    Value eval_unary(Lexer& lex) {
        spend();
        if (lex.peek().kind == Token::Op && lex.peek().text == "-") {
            lex.take();
            Value v = eval_unary(lex);
            return Rational(-number_of(v, "negation"));
        }
        return eval_primary(lex);
    }

    Value eval_primary(Lexer& lex) {
        const Token& token = lex.peek();
        if (token.kind == Token::Number) {
            return lex.take().number;
        }
        if (token.kind == Token::Op && token.text == "(") {
            lex.take();
            Value v = eval_expression(lex);
            if (!(lex.peek().kind == Token::Op && lex.peek().text == ")")) {
                lex.fail("expected ')'");
            }
            lex.take();
            return v;
        }
        if (token.kind == Token::Ident) {
            if (!allow_names_) lex.fail("calculator accepts only arithmetic expressions");
            Token name = lex.take();
            if (lex.peek().kind == Token::Op && lex.peek().text == "(") {
                return eval_call(name.text, lex);
            }
            auto it = variables.find(name.text);
            if (it == variables.end()) {
                throw CalcError("name '" + name.text + "' is not defined (position " +
                                std::to_string(name.position) + ")");
            }
            return it->second;
        }
        lex.fail("expected a value");
    }

    Value eval_call(const std::string& name, Lexer& lex) {
        static const std::vector<std::string> builtins = {"abs", "min", "max",
                                                          "sum", "round", "pow"};
        if (std::find(builtins.begin(), builtins.end(), name) == builtins.end()) {
            throw CalcError("function '" + name + "' is not on the allow-list");
        }
        lex.take();  // '('
        std::vector<Value> args;
        if (!(lex.peek().kind == Token::Op && lex.peek().text == ")")) {
            while (true) {
                args.push_back(eval_expression(lex));
                if (lex.peek().kind == Token::Op && lex.peek().text == ",") {
                    lex.take();
                    continue;
                }
                break;
            }
        }
        if (!(lex.peek().kind == Token::Op && lex.peek().text == ")")) {
            lex.fail("expected ')' in call");
        }
        lex.take();
        spend();
        return apply_builtin(name, args);
    }

    Value apply_builtin(const std::string& name, const std::vector<Value>& args) {
        auto expect_args = [&](size_t lo, size_t hi) {
            if (args.size() < lo || args.size() > hi) {
                throw CalcError(name + " takes " + std::to_string(lo) +
                                (hi == lo ? "" : ".." + std::to_string(hi)) + " arguments");
            }
        };
        if (name == "abs") {
            expect_args(1, 1);
            Rational v = number_of(args[0], "abs");
            return v < 0 ? Rational(-v) : v;
        }
        if (name == "sum") {
            expect_args(1, args.size() < 1 ? 1 : args.size());
            Rational acc = 0;
            for (const auto& a : args) acc += number_of(a, "sum");
            return acc;
        }
        if (name == "min" || name == "max") {
            expect_args(1, args.size() < 1 ? 1 : args.size());
            Rational best = number_of(args[0], name.c_str());
            for (size_t i = 1; i < args.size(); ++i) {
                const Rational& v = number_of(args[i], name.c_str());
                if (name == "min" ? v < best : v > best) best = v;
            }
            return best;
        }
        if (name == "round") {
            expect_args(1, 2);
            Rational v = number_of(args[0], "round");
            BigInt scale = 1;
            if (args.size() == 2) {
                Rational nd = number_of(args[1], "round");
                if (boost::multiprecision::denominator(nd) != 1 || nd < 0 || nd > 30) {
                    throw CalcError("round digits must be an integer in [0, 30]");
                }
                BigInt n = boost::multiprecision::numerator(nd);
                for (BigInt i = 0; i < n; ++i) scale *= 10;
            }
            Rational scaled = v * scale;
            BigInt num = boost::multiprecision::numerator(scaled);
            BigInt den = boost::multiprecision::denominator(scaled);
            bool negative = num < 0;
            if (negative) num = -num;
            BigInt q = num / den;
            BigInt r = num % den;
            if (2 * r >= den) ++q;  // round half away from zero
            Rational result(q, scale);
            return negative ? Rational(-result) : result;
        }
        // pow
        expect_args(2, 2);
        Rational base = number_of(args[0], "pow");
        Rational exp = number_of(args[1], "pow");
        if (boost::multiprecision::denominator(exp) != 1) {
            throw CalcError("pow exponent must be an integer");
        }
        BigInt e = boost::multiprecision::numerator(exp);
        bool invert = e < 0;
        if (invert) e = -e;
        if (e > 1000) throw CalcError("pow exponent too large");
        Rational acc = 1;
        for (BigInt i = 0; i < e; ++i) {
            spend();
            acc *= base;
        }
        if (invert) {
            if (acc == 0) throw CalcError("division by zero");
            acc = Rational(1) / acc;
        }
        return acc;
    }

    bool allow_names_;
    size_t steps_left_;
};

std::string render_value(const Value& v) {
    if (std::holds_alternative<bool>(v)) return std::get<bool>(v) ? "true" : "false";
    return to_decimal_string(std::get<Rational>(v));
}

}  // namespace

Rational calculator_eval(const std::string& expression) {
    Lexer lex(expression);
    Evaluator eval(false, 100000);
    Value v = eval.eval_expression(lex);
    if (lex.peek().kind != Token::End) lex.fail("trailing input");
    return number_of(v, "calculator");
}

std::string tool_calculator(const std::string& expression) {
    return to_decimal_string(calculator_eval(expression));
}

std::string tool_code_eval(const std::string& program, size_t step_budget) {
    Evaluator eval(true, step_budget);
    std::istringstream in(program);
    std::string line;
    std::optional<Value> last;
    size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            // Assignment if the line starts `name =` (and not `==`).
            Lexer probe(line);
            std::string target;
            if (probe.peek().kind == Token::Ident) {
                Token name = probe.take();
                if (probe.peek().kind == Token::Op && probe.peek().text == "=") {
                    target = name.text;
                }
            }
            if (!target.empty()) {
                probe.take();  // '='
                Value v = eval.eval_expression(probe);
                if (probe.peek().kind != Token::End) probe.fail("trailing input");
                eval.variables[target] = v;
                last.reset();
            } else {
                Lexer lex(line);
                Value v = eval.eval_expression(lex);
                if (lex.peek().kind != Token::End) lex.fail("trailing input");
                last = v;
            }
        } catch (const CalcError& e) {
            throw CalcError("line " + std::to_string(line_number) + ": " + e.what());
        }
    }
    if (!last) throw CalcError("program has no final expression to print");
    return render_value(*last);
}

}  // namespace verafi
