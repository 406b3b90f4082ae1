#include <random>

#include <gtest/gtest.h>

#include "expr_gen.hpp"
#include "fairhil/expr.hpp"

using namespace fairhil;
using namespace fairhil::expr;

namespace {

std::size_t error_offset(std::string_view text) {
  try {
    (void)parse(text);
  } catch (const ParseError& e) {
    return e.offset();
  }
  return static_cast<std::size_t>(-1);
}

DataTable numbers_table() {
  std::vector<std::optional<std::string>> cat{"a", "b", "a"};
  return DataTable({Column::numeric("income", {1000, 2000, NAN}), Column::numeric("loan_amount", {500, 0, 10}),
                    Column::numeric("net income", {1, 2, 3}), Column::from_labels("kind", cat)});
}

}  // namespace

TEST(Expr, PrecedenceAndAssociativity) {
  EXPECT_EQ(print(*parse("1 + 2 * 3")), "1 + 2 * 3");
  EXPECT_EQ(print(*parse("(1 + 2) * 3")), "(1 + 2) * 3");
  EXPECT_EQ(print(*parse("a - (b - c)")), "a - (b - c)");
  EXPECT_EQ(print(*parse("(a - b) - c")), "(a - b) - c");  // user grouping kept
  EXPECT_EQ(print(*parse("((a))")), "(a)");
  EXPECT_EQ(print(*parse("--a")), "--a");
  const auto env = [](std::string_view) -> std::optional<double> { return std::nullopt; };
  EXPECT_EQ(evaluate(*parse("8 / 4 / 2"), env), 1.0);
  EXPECT_EQ(evaluate(*parse("2 - 3 - 4"), env), -5.0);
  EXPECT_EQ(evaluate(*parse("-2 * 3 + 1e1"), env), 4.0);
}

TEST(Expr, UnicodeOperatorsAndQuotedNames) {
  const auto e = parse("\"net income\" \xC3\x97 2 \xE2\x88\x92 \"a\"\"b\" \xC3\xB7 4");
  EXPECT_EQ(print(*e), "\"net income\" * 2 - \"a\"\"b\" / 4");
  EXPECT_EQ(references(*e), (std::vector<std::string>{"net income", "a\"b"}));
}

TEST(Expr, PositionedErrors) {
  EXPECT_EQ(error_offset("1 +"), 3u);
  EXPECT_EQ(error_offset("(1 + 2"), 6u);
  EXPECT_EQ(error_offset("1 + 2)"), 5u);
  EXPECT_EQ(error_offset("a $ b"), 2u);
  EXPECT_EQ(error_offset(""), 0u);
  EXPECT_EQ(error_offset("\"abc"), 4u);
  EXPECT_EQ(error_offset("1 2"), 2u);
  try {
    (void)parse("(1 + ");
  } catch (const ParseError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
    EXPECT_FALSE(e.expected().empty());
    EXPECT_NE(e.detail().find("offset=5"), std::string::npos);
  }
}

TEST(Expr, ParsePrintRoundTripOnGeneratedTrees) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 300; ++i) {
    const auto tree = exprgen::generate(rng, 5);
    const ExprPtr ast = canonicalize(exprgen::to_ast(*tree));
    const std::string text = print(*ast);
    ASSERT_TRUE(structurally_equal(*parse(text), *ast)) << text;
  }
}

TEST(Expr, EvaluationMatchesIndependentEvaluator) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-100, 100);
  for (int i = 0; i < 200; ++i) {
    const auto tree = exprgen::generate(rng, 4);
    const ExprPtr ast = parse(exprgen::render(*tree));
    std::map<std::string, std::optional<double>> env;
    for (const auto& n : exprgen::names()) env[n] = rng() % 10 == 0 ? std::nullopt : std::optional<double>(std::round(u(rng)));
    const auto got = evaluate(*ast, [&](std::string_view n) { return env.at(std::string(n)); });
    const auto want = exprgen::eval(*tree, env);
    ASSERT_EQ(got.has_value(), want.has_value()) << exprgen::render(*tree);
    if (want) ASSERT_EQ(*got, *want) << exprgen::render(*tree);
  }
}

TEST(Expr, BindingAndDerivedColumn) {
  const DataTable t = numbers_table();
  try {
    (void)bind(parse("incme / 2"), t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchema);
    EXPECT_NE(e.detail().find("income"), std::string::npos);
  }
  EXPECT_THROW((void)bind(parse("kind + 1"), t), Error);

  const BoundExpr b = bind(parse("loan_amount / income"), t);
  const DerivedColumn d = evaluate_column(b, t, "ratio");
  EXPECT_DOUBLE_EQ(d.column.number(0), 0.5);
  EXPECT_DOUBLE_EQ(d.column.number(1), 0.0);
  EXPECT_TRUE(d.column.is_missing(2));  // missing income
  ASSERT_TRUE(d.column.derived_from());
}

TEST(Expr, CustomMetricNameRules) {
  const DataTable t = numbers_table();
  EXPECT_THROW((void)make_custom_metric("", "income", t), Error);
  EXPECT_THROW((void)make_custom_metric("income", "income * 2", t), Error);
  const CustomMetricDef d = make_custom_metric("ratio", "loan_amount/income", t);
  EXPECT_EQ(d.source_text, "loan_amount/income");
}
