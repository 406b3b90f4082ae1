#include "fairhil/expr.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace fairhil::expr {

ExprPtr number(double value) { return std::make_shared<const Expr>(Expr{Number{value}}); }
ExprPtr ref(std::string name) { return std::make_shared<const Expr>(Expr{FeatureRef{std::move(name)}}); }
ExprPtr negate(ExprPtr operand) { return std::make_shared<const Expr>(Expr{Negate{std::move(operand)}}); }
ExprPtr binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs) {
  return std::make_shared<const Expr>(Expr{Binary{op, std::move(lhs), std::move(rhs)}});
}
ExprPtr group(ExprPtr inner) { return std::make_shared<const Expr>(Expr{Group{std::move(inner)}}); }

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, Number>) {
          return x.value == y.value;
        } else if constexpr (std::is_same_v<T, FeatureRef>) {
          return x.name == y.name;
        } else if constexpr (std::is_same_v<T, Negate>) {
          return structurally_equal(*x.operand, *y.operand);
        } else if constexpr (std::is_same_v<T, Binary>) {
          return x.op == y.op && structurally_equal(*x.lhs, *y.lhs) && structurally_equal(*x.rhs, *y.rhs);
        } else {
          return structurally_equal(*x.inner, *y.inner);
        }
      },
      a.node);
}

namespace {

std::string describe_expected(const std::vector<std::string>& expected) {
  std::string out;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i) out += i + 1 == expected.size() ? " or " : ", ";
    out += expected[i];
  }
  return out;
}

}  // namespace

ParseError::ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& message)
    : Error(ErrorCode::kParse, message,
            "offset=" + std::to_string(offset) + "; expected: " + describe_expected(expected)),
      offset_(offset),
      expected_(std::move(expected)) {}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class Tok { kNumber, kName, kPlus, kMinus, kStar, kSlash, kLParen, kRParen, kEnd };

struct Token {
  Tok kind;
  std::size_t offset;
  std::string text;  // name text, or number spelling
  double value = 0.0;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; }

const std::vector<std::string> kOperandStart = {"number", "feature name", "'('", "'-'"};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      ++i;
      continue;
    }
    const std::size_t start = i;
    auto single = [&](Tok kind, std::size_t len) {
      out.push_back(Token{kind, start, std::string(s.substr(start, len))});
      i += len;
    };
    // UTF-8 multiplication sign, division sign and minus sign.
    if (s.compare(i, 2, "\xC3\x97") == 0) { single(Tok::kStar, 2); continue; }
    if (s.compare(i, 2, "\xC3\xB7") == 0) { single(Tok::kSlash, 2); continue; }
    if (s.compare(i, 3, "\xE2\x88\x92") == 0) { single(Tok::kMinus, 3); continue; }
    switch (c) {
      case '+': single(Tok::kPlus, 1); continue;
      case '-': single(Tok::kMinus, 1); continue;
      case '*': single(Tok::kStar, 1); continue;
      case '/': single(Tok::kSlash, 1); continue;
      case '(': single(Tok::kLParen, 1); continue;
      case ')': single(Tok::kRParen, 1); continue;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      if (j < s.size() && s[j] == '.') {
        ++j;
        while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      }
      if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < s.size() && (s[k] == '+' || s[k] == '-')) ++k;
        if (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) {
          while (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) ++k;
          j = k;
        }
      }
      const auto spelled = s.substr(i, j - i);
      const auto v = parse_number(spelled);
      if (!v) throw ParseError(start, {"number"}, "malformed number '" + std::string(spelled) + "'");
      out.push_back(Token{Tok::kNumber, start, std::string(spelled), *v});
      i = j;
      continue;
    }
    if (ident_start(c)) {
      std::size_t j = i + 1;
      while (j < s.size() && ident_char(s[j])) ++j;
      out.push_back(Token{Tok::kName, start, std::string(s.substr(i, j - i))});
      i = j;
      continue;
    }
    if (c == '"') {
      std::string name;
      std::size_t j = i + 1;
      for (;;) {
        if (j >= s.size()) throw ParseError(s.size(), {"'\"'"}, "unterminated quoted name");
        if (s[j] == '"') {
          if (j + 1 < s.size() && s[j + 1] == '"') {
            name.push_back('"');
            j += 2;
            continue;
          }
          ++j;
          break;
        }
        name.push_back(s[j++]);
      }
      if (name.empty()) throw ParseError(start, {"feature name"}, "empty quoted name");
      out.push_back(Token{Tok::kName, start, std::move(name)});
      i = j;
      continue;
    }
    throw ParseError(start, kOperandStart, std::string("unknown character '") + c + "'");
  }
  out.push_back(Token{Tok::kEnd, s.size(), {}});
  return out;
}

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::kEnd: return "end of input";
    case Tok::kNumber: return "number '" + t.text + "'";
    case Tok::kName: return "name '" + t.text + "'";
    default: return "'" + t.text + "'";
  }
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(tokenize(text)) {}

  ExprPtr parse_all() {
    ExprPtr e = expression();
    if (peek().kind != Tok::kEnd) fail({"operator", "end of input"});
    return e;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() { return tokens_[pos_++]; }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    const Token& t = peek();
    throw ParseError(t.offset, expected, "unexpected " + describe(t) + ", expected " + describe_expected(expected));
  }

  ExprPtr expression() {
    ExprPtr lhs = term();
    while (peek().kind == Tok::kPlus || peek().kind == Tok::kMinus) {
      const BinaryOp op = next().kind == Tok::kPlus ? BinaryOp::kAdd : BinaryOp::kSub;
      lhs = binary(op, lhs, term());
    }
    return lhs;
  }

  ExprPtr term() {
    ExprPtr lhs = unary();
    while (peek().kind == Tok::kStar || peek().kind == Tok::kSlash) {
      const BinaryOp op = next().kind == Tok::kStar ? BinaryOp::kMul : BinaryOp::kDiv;
      lhs = binary(op, lhs, unary());
    }
    return lhs;
  }

  ExprPtr unary() {
    if (peek().kind == Tok::kMinus) {
      next();
      return negate(unary());
    }
    return primary();
  }

  ExprPtr primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::kNumber:
        next();
        return number(t.value);
      case Tok::kName:
        next();
        return ref(t.text);
      case Tok::kLParen: {
        next();
        ExprPtr inner = expression();
        if (peek().kind != Tok::kRParen) fail({"operator", "')'"});
        next();
        return group(inner);
      }
      default:
        fail(kOperandStart);
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

// Binding strength: 1 additive, 2 multiplicative, 3 unary, 4 atoms.
int precedence(const Expr& e) {
  if (const auto* b = std::get_if<Binary>(&e.node)) {
    return (b->op == BinaryOp::kAdd || b->op == BinaryOp::kSub) ? 1 : 2;
  }
  if (std::holds_alternative<Negate>(e.node)) return 3;
  return 4;
}

enum class Slot { kTop, kLeft, kRight, kOperand };

bool needs_parens(const Expr& child, int parent_prec, Slot slot) {
  const int p = precedence(child);
  switch (slot) {
    case Slot::kTop: return false;
    case Slot::kLeft: return p < parent_prec;
    case Slot::kRight: return p <= parent_prec;
    case Slot::kOperand: return p < 3;
  }
  return false;
}

ExprPtr canonical(const ExprPtr& e, int parent_prec, Slot slot) {
  return std::visit(
      [&](const auto& x) -> ExprPtr {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Number> || std::is_same_v<T, FeatureRef>) {
          return e;
        } else if constexpr (std::is_same_v<T, Negate>) {
          return negate(canonical(x.operand, 3, Slot::kOperand));
        } else if constexpr (std::is_same_v<T, Binary>) {
          const int p = precedence(*e);
          return binary(x.op, canonical(x.lhs, p, Slot::kLeft), canonical(x.rhs, p, Slot::kRight));
        } else {
          ExprPtr inner = x.inner;
          while (const auto* g = std::get_if<Group>(&inner->node)) inner = g->inner;
          if (needs_parens(*inner, parent_prec, slot)) return canonical(inner, parent_prec, slot);
          return group(canonical(inner, 0, Slot::kTop));
        }
      },
      e->node);
}

std::string op_text(BinaryOp op) {
  switch (op) {
    case BinaryOp::kAdd: return " + ";
    case BinaryOp::kSub: return " - ";
    case BinaryOp::kMul: return " * ";
    case BinaryOp::kDiv: return " / ";
  }
  return " ? ";
}

bool bare_name(std::string_view name) {
  if (name.empty() || !ident_start(name.front())) return false;
  return std::all_of(name.begin() + 1, name.end(), ident_char);
}

void print_to(const Expr& e, int parent_prec, Slot slot, std::string& out) {
  const bool parens = needs_parens(e, parent_prec, slot);
  if (parens) out.push_back('(');
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Number>) {
          out += format_number(x.value);
        } else if constexpr (std::is_same_v<T, FeatureRef>) {
          if (bare_name(x.name)) {
            out += x.name;
          } else {
            out.push_back('"');
            for (char c : x.name) {
              if (c == '"') out.push_back('"');
              out.push_back(c);
            }
            out.push_back('"');
          }
        } else if constexpr (std::is_same_v<T, Negate>) {
          out.push_back('-');
          print_to(*x.operand, 3, Slot::kOperand, out);
        } else if constexpr (std::is_same_v<T, Binary>) {
          const int p = precedence(e);
          print_to(*x.lhs, p, Slot::kLeft, out);
          out += op_text(x.op);
          print_to(*x.rhs, p, Slot::kRight, out);
        } else {
          out.push_back('(');
          const Expr* inner = x.inner.get();
          while (const auto* g = std::get_if<Group>(&inner->node)) inner = g->inner.get();
          print_to(*inner, 0, Slot::kTop, out);
          out.push_back(')');
        }
      },
      e.node);
  if (parens) out.push_back(')');
}

void collect_refs(const Expr& e, std::vector<std::string>& out) {
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, FeatureRef>) {
          if (std::find(out.begin(), out.end(), x.name) == out.end()) out.push_back(x.name);
        } else if constexpr (std::is_same_v<T, Negate>) {
          collect_refs(*x.operand, out);
        } else if constexpr (std::is_same_v<T, Binary>) {
          collect_refs(*x.lhs, out);
          collect_refs(*x.rhs, out);
        } else if constexpr (std::is_same_v<T, Group>) {
          collect_refs(*x.inner, out);
        }
      },
      e.node);
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

}  // namespace

ExprPtr parse(std::string_view text) { return canonicalize(Parser(text).parse_all()); }

ExprPtr canonicalize(const ExprPtr& e) { return canonical(e, 0, Slot::kTop); }

std::string print(const Expr& e) {
  std::string out;
  print_to(e, 0, Slot::kTop, out);
  return out;
}

std::vector<std::string> references(const Expr& e) {
  std::vector<std::string> out;
  collect_refs(e, out);
  return out;
}

std::optional<double> evaluate(const Expr& e, const Environment& env) {
  return std::visit(
      [&](const auto& x) -> std::optional<double> {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Number>) {
          return x.value;
        } else if constexpr (std::is_same_v<T, FeatureRef>) {
          return env(x.name);
        } else if constexpr (std::is_same_v<T, Negate>) {
          const auto v = evaluate(*x.operand, env);
          if (!v) return std::nullopt;
          return -*v;
        } else if constexpr (std::is_same_v<T, Binary>) {
          const auto a = evaluate(*x.lhs, env);
          const auto b = evaluate(*x.rhs, env);
          if (!a || !b) return std::nullopt;
          double r = 0.0;
          switch (x.op) {
            case BinaryOp::kAdd: r = *a + *b; break;
            case BinaryOp::kSub: r = *a - *b; break;
            case BinaryOp::kMul: r = *a * *b; break;
            case BinaryOp::kDiv:
              if (*b == 0.0) return std::nullopt;
              r = *a / *b;
              break;
          }
          if (!std::isfinite(r)) return std::nullopt;
          return r;
        } else {
          return evaluate(*x.inner, env);
        }
      },
      e.node);
}

std::optional<double> BoundExpr::evaluate_row(const DataTable& table, std::size_t row) const {
  return evaluate(*ast_, [&](std::string_view name) -> std::optional<double> {
    const Column& col = table.column(columns_.at(std::string(name)));
    if (col.is_missing(row)) return std::nullopt;
    return col.number(row);
  });
}

BoundExpr bind(ExprPtr ast, const DataTable& table) {
  BoundExpr bound;
  for (const auto& name : references(*ast)) {
    const auto idx = table.find(name);
    if (!idx) {
      std::vector<std::pair<std::size_t, std::string>> ranked;
      for (const auto& c : table.columns()) {
        if (c.is_numeric()) ranked.emplace_back(edit_distance(name, c.name()), c.name());
      }
      std::sort(ranked.begin(), ranked.end());
      std::vector<std::string> candidates;
      for (std::size_t i = 0; i < ranked.size() && i < 5; ++i) candidates.push_back(ranked[i].second);
      throw Error(ErrorCode::kSchema, "unknown feature '" + name + "' in expression",
                  "candidates: " + join_names(candidates));
    }
    const Column& col = table.column(*idx);
    if (!col.is_numeric()) {
      throw Error(ErrorCode::kSchema, "feature '" + name + "' is categorical; expressions need numeric features");
    }
    bound.columns_.emplace(name, *idx);
  }
  bound.ast_ = std::move(ast);
  return bound;
}

DerivedColumn evaluate_column(const BoundExpr& bound, const DataTable& table, std::string name, std::size_t k_max) {
  std::vector<double> values(table.rows());
  for (std::size_t r = 0; r < table.rows(); ++r) {
    values[r] = bound.evaluate_row(table, r).value_or(std::numeric_limits<double>::quiet_NaN());
  }
  if (std::all_of(values.begin(), values.end(), [](double v) { return std::isnan(v); })) {
    throw Error(ErrorCode::kValidation, "expression for '" + name + "' is missing on every row");
  }
  BinSpec bins = bin_values(name, values, k_max);
  Column column = Column::numeric(std::move(name), std::move(values)).derived(print(*bound.ast()));
  return DerivedColumn{std::move(column), std::move(bins)};
}

CustomMetricDef make_custom_metric(std::string name, std::string source_text, const DataTable& table) {
  if (name.empty()) throw Error(ErrorCode::kValidation, "custom metric needs a name");
  if (table.find(name)) {
    throw Error(ErrorCode::kValidation, "custom metric name '" + name + "' collides with a dataset column");
  }
  ExprPtr ast = parse(source_text);
  bind(ast, table);
  return CustomMetricDef{std::move(name), std::move(source_text), std::move(ast)};
}

}  // namespace fairhil::expr
