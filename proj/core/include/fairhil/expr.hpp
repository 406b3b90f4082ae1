#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "fairhil/binning.hpp"
#include "fairhil/data_table.hpp"
#include "fairhil/error.hpp"

// Custom-metric expressions: numbers, feature references, unary minus and
// the four arithmetic operators with the usual precedence.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | primary
//   primary := NUMBER | IDENT | QUOTED | '(' expr ')'
//
// IDENT is [A-Za-z_][A-Za-z0-9_.]*; QUOTED is a double-quoted name in which
// '""' stands for one quote. The symbols U+00D7, U+00F7 and U+2212 are read
// as '*', '/' and '-'.
namespace fairhil::expr {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

enum class BinaryOp { kAdd, kSub, kMul, kDiv };

struct Number {
  double value;
};
struct FeatureRef {
  std::string name;
};
struct Negate {
  ExprPtr operand;
};
struct Binary {
  BinaryOp op;
  ExprPtr lhs;
  ExprPtr rhs;
};
// Parentheses the user wrote that precedence alone does not require.
struct Group {
  ExprPtr inner;
};

struct Expr {
  std::variant<Number, FeatureRef, Negate, Binary, Group> node;
};

ExprPtr number(double value);
ExprPtr ref(std::string name);
ExprPtr negate(ExprPtr operand);
ExprPtr binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs);
ExprPtr group(ExprPtr inner);

bool structurally_equal(const Expr& a, const Expr& b);

class ParseError : public Error {
 public:
  ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& message);

  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

// Throws ParseError. The result is canonical (see canonicalize).
ExprPtr parse(std::string_view text);

// Drops Group nodes where the parentheses are required anyway and collapses
// nested groups, so that parse(print(e)) structurally equals canonicalize(e).
ExprPtr canonicalize(const ExprPtr& e);

// Minimal parentheses plus user groups; ASCII operators with single spaces.
std::string print(const Expr& e);

// Every referenced feature name, in first-occurrence order.
std::vector<std::string> references(const Expr& e);

// Missing operands, division by zero and non-finite results all give nullopt.
using Environment = std::function<std::optional<double>(std::string_view)>;
std::optional<double> evaluate(const Expr& e, const Environment& env);

// Expression whose references were checked against a table schema.
class BoundExpr {
 public:
  const ExprPtr& ast() const noexcept { return ast_; }
  std::optional<double> evaluate_row(const DataTable& table, std::size_t row) const;

 private:
  friend BoundExpr bind(ExprPtr ast, const DataTable& table);
  ExprPtr ast_;
  std::unordered_map<std::string, std::size_t> columns_;
};

// Throws kSchema for unknown names (listing the closest numeric columns) or
// references to categorical columns.
BoundExpr bind(ExprPtr ast, const DataTable& table);

struct DerivedColumn {
  Column column;
  BinSpec bins;
};

DerivedColumn evaluate_column(const BoundExpr& bound, const DataTable& table, std::string name,
                              std::size_t k_max = kDefaultMaxBins);

struct CustomMetricDef {
  std::string name;
  std::string source_text;
  ExprPtr ast;
};

// Validates the name (non-empty, not an existing column) and binds the source.
CustomMetricDef make_custom_metric(std::string name, std::string source_text, const DataTable& table);

}  // namespace fairhil::expr
