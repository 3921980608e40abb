#include <doctest.h>

#include "verafi/policy.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>

using namespace verafi;

namespace {

const std::string kPolicyFile =
    std::string(VERAFI_SOURCE_DIR) + "/data/policies/verafi_policies.json";

PolicyRule make_rule(const std::string& id, const std::string& expr) {
    PolicyRule rule;
    rule.id = id;
    rule.expression = expr;
    rule.ast = parse_smtlib(expr);
    return rule;
}

}  // namespace

TEST_CASE("the shipped policy file parses into the five rules in order") {
    PolicySet set = load_policies(kPolicyFile);
    REQUIRE(set.rules.size() == 5);
    CHECK(set.rules[0].id == "ID8");
    CHECK(set.rules[1].id == "ID9");
    CHECK(set.rules[2].id == "ID11");
    CHECK(set.rules[3].id == "ID15");
    CHECK(set.rules[4].id == "ID19");
    for (const auto& rule : set.rules) {
        CHECK(rule.ast != nullptr);
        CHECK(rule.parse_error.empty());
        CHECK(!rule.alternate_expression.empty());
    }
    CHECK(lint_policy_set(set).empty() == false);  // single-use symbols are expected here
    for (const auto& diag : lint_policy_set(set)) {
        CHECK(diag.find("duplicate") == std::string::npos);
        CHECK(diag.find("unparseable") == std::string::npos);
    }
}

TEST_CASE("parse_smtlib builds the documented tree for rule ID8") {
    AstPtr ast = parse_smtlib("(= returnOnAssets (/ netIncome averageTotalAssets))");
    const auto& eq = std::get<PolicyAst::Apply>(ast->node);
    CHECK(eq.op == PolicyOp::Eq);
    REQUIRE(eq.args.size() == 2);
    CHECK(std::get<PolicyAst::Symbol>(eq.args[0]->node).name == "returnOnAssets");
    const auto& div = std::get<PolicyAst::Apply>(eq.args[1]->node);
    CHECK(div.op == PolicyOp::Div);
    REQUIRE(div.args.size() == 2);
    CHECK(std::get<PolicyAst::Symbol>(div.args[0]->node).name == "netIncome");
    CHECK(std::get<PolicyAst::Symbol>(div.args[1]->node).name == "averageTotalAssets");
}

TEST_CASE("parse_smtlib builds the implication tree for rule ID19") {
    AstPtr ast = parse_smtlib("(=> (= dataSource SEC_FILING) usesMostAuthoritativeSource)");
    const auto& imp = std::get<PolicyAst::Apply>(ast->node);
    CHECK(imp.op == PolicyOp::Implies);
    REQUIRE(imp.args.size() == 2);
    const auto& ante = std::get<PolicyAst::Apply>(imp.args[0]->node);
    CHECK(ante.op == PolicyOp::Eq);
    CHECK(std::get<PolicyAst::Symbol>(imp.args[1]->node).name ==
          "usesMostAuthoritativeSource");
}

TEST_CASE("parse_smtlib parses literals") {
    AstPtr num = parse_smtlib("(> x 0.5)");
    const auto& cmp = std::get<PolicyAst::Apply>(num->node);
    CHECK(std::get<PolicyAst::Number>(cmp.args[1]->node).value == Rational(1, 2));
    AstPtr boolean = parse_smtlib("(and true flag)");
    const auto& conj = std::get<PolicyAst::Apply>(boolean->node);
    CHECK(std::get<PolicyAst::Boolean>(conj.args[0]->node).value == true);
}

TEST_CASE("parse_smtlib enforces arity and structure") {
    CHECK_THROWS_AS(parse_smtlib("(not x y)"), ParseError);
    CHECK_THROWS_AS(parse_smtlib("(=> a)"), ParseError);
    CHECK_THROWS_AS(parse_smtlib("(- a b c)"), ParseError);
    CHECK_THROWS_AS(parse_smtlib("(/ a)"), ParseError);
    CHECK_THROWS_AS(parse_smtlib("(= a)"), ParseError);
    CHECK_THROWS_AS(parse_smtlib("(= a"), ParseError);
    CHECK_THROWS_AS(parse_smtlib("(= a b))"), ParseError);
    CHECK_THROWS_AS(parse_smtlib(""), ParseError);
    CHECK_THROWS_AS(parse_smtlib("(frobnicate a b)"), ParseError);
    // n-ary operators accept more than two arguments.
    CHECK(parse_smtlib("(+ a b c d)") != nullptr);
    CHECK(parse_smtlib("(and p q r)") != nullptr);
    CHECK(parse_smtlib("(= a b c)") != nullptr);
}

TEST_CASE("parse errors carry a position") {
    try {
        parse_smtlib("(= a");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.position == 4);
        CHECK(std::string(e.what()).find("position") != std::string::npos);
    }
}

TEST_CASE("render_smtlib round-trips every shipped rule") {
    PolicySet set = load_policies(kPolicyFile);
    for (const auto& rule : set.rules) {
        std::string rendered = render_smtlib(*rule.ast);
        AstPtr reparsed = parse_smtlib(rendered);
        CHECK(ast_equal(*rule.ast, *reparsed));
    }
    // And for assorted shapes beyond the shipped file.
    for (const std::string expr :
         {"(not (or a b (> x 1.25)))", "(* 2 x (+ y 3))", "(=> (and p q) (= r s t))",
          "(<= liabilities 1000000)", "x", "true", "-3.5"}) {
        AstPtr ast = parse_smtlib(expr);
        CHECK(ast_equal(*ast, *parse_smtlib(render_smtlib(*ast))));
    }
}

TEST_CASE("the four worked rule verdicts") {
    PolicySet set = load_policies(kPolicyFile);
    const PolicyRule& id8 = set.rules[0];
    const PolicyRule& id11 = set.rules[2];
    const PolicyRule& id19 = set.rules[4];

    SUBCASE("ID8 satisfied by consistent figures") {
        Environment env{{"netIncome", Rational(100)},
                        {"averageTotalAssets", Rational(1000)},
                        {"returnOnAssets", Rational(1, 10)}};
        auto verdict = evaluate_rule(id8, env);
        CHECK(verdict.status == RuleStatus::Satisfied);
        CHECK(verdict.missing_symbols.empty());
        CHECK(verdict.rule_id == "ID8");
    }
    SUBCASE("ID8 violated by an inconsistent ratio") {
        Environment env{{"netIncome", Rational(100)},
                        {"averageTotalAssets", Rational(1000)},
                        {"returnOnAssets", Rational(2, 10)}};
        CHECK(evaluate_rule(id8, env).status == RuleStatus::Violated);
    }
    SUBCASE("ID19 vacuously satisfied with a false antecedent") {
        Environment env{{"dataSource", std::string("OTHER")}};
        auto verdict = evaluate_rule(id19, env);
        CHECK(verdict.status == RuleStatus::Satisfied);
        CHECK(verdict.missing_symbols.empty());
    }
    SUBCASE("ID11 indeterminate when the ratio is unbound") {
        Environment env{{"currentAssets", Rational(7)}, {"currentLiabilities", Rational(2)}};
        auto verdict = evaluate_rule(id11, env);
        CHECK(verdict.status == RuleStatus::Indeterminate);
        CHECK(verdict.missing_symbols == std::vector<std::string>{"currentRatio"});
    }
}

TEST_CASE("ID19 positive path requires the consequent") {
    PolicySet set = load_policies(kPolicyFile);
    const PolicyRule& id19 = set.rules[4];
    Environment env{{"dataSource", std::string("SEC_FILING")},
                    {"usesMostAuthoritativeSource", true}};
    CHECK(evaluate_rule(id19, env).status == RuleStatus::Satisfied);
    env["usesMostAuthoritativeSource"] = false;
    CHECK(evaluate_rule(id19, env).status == RuleStatus::Violated);
    env.erase("usesMostAuthoritativeSource");
    auto verdict = evaluate_rule(id19, env);
    CHECK(verdict.status == RuleStatus::Indeterminate);
    CHECK(verdict.missing_symbols == std::vector<std::string>{"usesMostAuthoritativeSource"});
}

TEST_CASE("numeric equality uses relative tolerance") {
    PolicyRule rule = make_rule("R", "(= x y)");
    Environment env{{"x", Rational(1000000)}, {"y", Rational(1000000) + Rational(1, 10)}};
    CHECK(evaluate_rule(rule, env, 1e-6).status == RuleStatus::Satisfied);
    env["y"] = Rational(1000003);
    CHECK(evaluate_rule(rule, env, 1e-6).status == RuleStatus::Violated);
    // Ordering comparisons stay exact.
    PolicyRule lt = make_rule("R2", "(< x y)");
    Environment close{{"x", Rational(1)}, {"y", Rational(1) + Rational(1, 10000000000)}};
    CHECK(evaluate_rule(lt, close).status == RuleStatus::Satisfied);
}

TEST_CASE("division by zero is a violation with a diagnostic") {
    PolicyRule rule = make_rule("R", "(= q (/ a b))");
    Environment env{{"q", Rational(1)}, {"a", Rational(1)}, {"b", Rational(0)}};
    auto verdict = evaluate_rule(rule, env);
    CHECK(verdict.status == RuleStatus::Violated);
    CHECK(!verdict.diagnostic.empty());
}

TEST_CASE("type mismatches are errors") {
    PolicyRule rule = make_rule("R", "(= x y)");
    Environment env{{"x", Rational(1)}, {"y", true}};
    CHECK_THROWS_AS(evaluate_rule(rule, env), std::runtime_error);
    PolicyRule conj = make_rule("R2", "(and x 1)");
    Environment env2{{"x", true}};
    CHECK_THROWS_AS(evaluate_rule(conj, env2), std::runtime_error);
}

TEST_CASE("ALL_CAPS symbols are enum constants by default") {
    PolicyRule rule = make_rule("R", "(= dataSource SEC_FILING)");
    Environment env{{"dataSource", std::string("SEC_FILING")}};
    CHECK(evaluate_rule(rule, env).status == RuleStatus::Satisfied);
    env["dataSource"] = std::string("PRESS_RELEASE");
    CHECK(evaluate_rule(rule, env).status == RuleStatus::Violated);
    // An explicit binding overrides the enum-constant reading.
    Environment bound{{"dataSource", std::string("OTHER")},
                      {"SEC_FILING", std::string("OTHER")}};
    CHECK(evaluate_rule(rule, bound).status == RuleStatus::Satisfied);
}

TEST_CASE("boolean connectives use Kleene short-circuiting over unknowns") {
    PolicyRule disj = make_rule("R", "(or p q)");
    Environment env{{"p", true}};
    CHECK(evaluate_rule(disj, env).status == RuleStatus::Satisfied);  // q irrelevant
    PolicyRule conj = make_rule("R2", "(and p q)");
    Environment falsy{{"p", false}};
    CHECK(evaluate_rule(conj, falsy).status == RuleStatus::Violated);  // q irrelevant
    auto verdict = evaluate_rule(conj, env);  // p true, q unknown
    CHECK(verdict.status == RuleStatus::Indeterminate);
    CHECK(verdict.missing_symbols == std::vector<std::string>{"q"});
}

TEST_CASE("equality can be decided false with unbound arguments present") {
    PolicyRule rule = make_rule("R", "(= a b c)");
    Environment env{{"a", Rational(1)}, {"b", Rational(2)}};
    CHECK(evaluate_rule(rule, env).status == RuleStatus::Violated);
}

TEST_CASE("monotone indeterminacy: extra bindings never unsettle a verdict") {
    PolicySet set = load_policies(kPolicyFile);
    std::mt19937 rng(20240202);
    std::uniform_int_distribution<int> value(-4, 4);
    std::uniform_int_distribution<int> coin(0, 1);
    std::vector<std::string> symbols = {
        "returnOnAssets", "netIncome",      "averageTotalAssets",
        "debtToEquityRatio", "totalDebt",   "totalShareholdersEquity",
        "currentRatio",   "currentAssets",  "currentLiabilities",
        "freeCashFlow",   "operatingCashFlow", "capitalExpenditures",
        "dataSource",     "usesMostAuthoritativeSource"};
    for (int trial = 0; trial < 200; ++trial) {
        Environment env;
        for (const auto& s : symbols) {
            if (coin(rng)) continue;  // leave unbound
            if (s == "dataSource") {
                env[s] = std::string(coin(rng) ? "SEC_FILING" : "OTHER");
            } else if (s == "usesMostAuthoritativeSource") {
                env[s] = coin(rng) == 1;
            } else {
                env[s] = Rational(value(rng));
            }
        }
        for (const auto& rule : set.rules) {
            RuleVerdict before;
            try {
                before = evaluate_rule(rule, env);
            } catch (const std::exception&) {
                continue;  // degenerate random environment (e.g. type clash)
            }
            if (before.status == RuleStatus::Indeterminate) continue;
            Environment extended = env;
            for (const auto& s : symbols) {
                if (!extended.count(s) && s != "dataSource" &&
                    s != "usesMostAuthoritativeSource") {
                    extended[s] = Rational(value(rng));
                }
            }
            RuleVerdict after;
            try {
                after = evaluate_rule(rule, extended);
            } catch (const std::exception&) {
                continue;
            }
            CHECK(after.status == before.status);
        }
    }
}

TEST_CASE("format_policy_context emits the documented block") {
    PolicySet set = load_policies(kPolicyFile);
    SUBCASE("no truncation at max_rules = 5") {
        std::string block = format_policy_context(set, 5);
        std::string expected = "FINANCIAL VALIDATION RULES:\n";
        for (const auto& rule : set.rules) expected += rule.alternate_expression + "\n";
        expected.pop_back();
        CHECK(block == expected);
    }
    SUBCASE("truncation appends the additional-rules line") {
        std::string block = format_policy_context(set, 2);
        CHECK(block ==
              "FINANCIAL VALIDATION RULES:\n"
              "returnOnAssets is equal to netIncome / averageTotalAssets\n"
              "debtToEquityRatio is equal to totalDebt / totalShareholdersEquity\n"
              "... and 3 additional validation rules");
    }
    SUBCASE("empty set renders only the header") {
        PolicySet empty;
        CHECK(format_policy_context(empty, 10) == "FINANCIAL VALIDATION RULES:");
    }
}

TEST_CASE("load_policies strictness and linting") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "verafi_policy_test";
    fs::create_directories(dir);

    SUBCASE("duplicate ids rejected in strict mode, reported by lint in lenient mode") {
        fs::path file = dir / "dup.json";
        std::ofstream(file) << R"json({"rules": [
            {"id": "ID8", "alternateExpression": "a", "expression": "(= x y)"},
            {"id": "ID8", "alternateExpression": "b", "expression": "(= x z)"}]})json";
        CHECK_THROWS_WITH_AS(load_policies(file.string(), true), doctest::Contains("ID8"),
                             std::runtime_error);
        PolicySet lenient = load_policies(file.string(), false);
        bool found = false;
        for (const auto& diag : lint_policy_set(lenient)) {
            if (diag.find("duplicate") != std::string::npos) found = true;
        }
        CHECK(found);
    }
    SUBCASE("unparseable expression names the rule and position") {
        fs::path file = dir / "bad.json";
        std::ofstream(file) << R"json({"rules": [
            {"id": "ID1", "alternateExpression": "a", "expression": "(= a"}]})json";
        CHECK_THROWS_WITH_AS(load_policies(file.string(), true), doctest::Contains("ID1"),
                             std::runtime_error);
        PolicySet lenient = load_policies(file.string(), false);
        REQUIRE(lenient.rules.size() == 1);
        CHECK(lenient.rules[0].ast == nullptr);
        CHECK(!lenient.rules[0].parse_error.empty());
    }
    SUBCASE("empty rules list is a valid empty set") {
        fs::path file = dir / "empty.json";
        std::ofstream(file) << R"json({"rules": []})json";
        CHECK(load_policies(file.string()).rules.empty());
    }
    SUBCASE("single-use symbol warning") {
        fs::path file = dir / "single.json";
        std::ofstream(file) << R"json({"rules": [
            {"id": "A", "alternateExpression": "a", "expression": "(= shared netIncme)"},
            {"id": "B", "alternateExpression": "b", "expression": "(> shared 0)"}]})json";
        PolicySet set = load_policies(file.string());
        bool found = false;
        for (const auto& diag : lint_policy_set(set)) {
            if (diag.find("netIncme") != std::string::npos) found = true;
            CHECK(diag.find("shared") == std::string::npos);
        }
        CHECK(found);
    }
    fs::remove_all(dir);
}
