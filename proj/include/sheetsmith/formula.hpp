#pragma once

// Excel-like formula language: AST, lexer, recursive-descent parser and
// canonical renderer.
//
// Grammar (lowest precedence first):
//
//   formula    := ['='] comparison END
//   comparison := additive (('<' | '<=' | '>' | '>=' | '=' | '<>') additive)*
//   additive   := term (('+' | '-') term)*
//   term       := power (('*' | '/') power)*
//   power      := unary ('^' unary)*
//   unary      := '-' unary | primary
//   primary    := NUMBER | STRING | TRUE | FALSE | cell [':' cell]
//               | NAME '(' comparison (',' comparison)* ')' | '(' comparison ')'
//
// All binary operators are left-associative.

#include "sheetsmith/error.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace sheetsmith {

enum class Function { If, And, Or, Not, Min, Max, Average, Sum };

inline constexpr std::array<Function, 8> kAllFunctions{
    Function::If,  Function::And, Function::Or,      Function::Not,
    Function::Min, Function::Max, Function::Average, Function::Sum};

inline std::string_view function_name(Function f) {
  switch (f) {
  case Function::If: return "IF";
  case Function::And: return "AND";
  case Function::Or: return "OR";
  case Function::Not: return "NOT";
  case Function::Min: return "MIN";
  case Function::Max: return "MAX";
  case Function::Average: return "AVERAGE";
  case Function::Sum: return "SUM";
  }
  return "?";
}

/// Case-insensitive lookup of a supported function name.
inline std::optional<Function> function_from_name(std::string_view name) {
  for (Function f : kAllFunctions) {
    std::string_view canonical = function_name(f);
    if (canonical.size() != name.size()) continue;
    bool same = true;
    for (std::size_t i = 0; i < name.size() && same; ++i)
      same = std::toupper(static_cast<unsigned char>(name[i])) == canonical[i];
    if (same) return f;
  }
  return std::nullopt;
}

struct Arity {
  std::size_t min;
  std::optional<std::size_t> max;
};

inline Arity function_arity(Function f) {
  switch (f) {
  case Function::If: return {2, 3};
  case Function::Not: return {1, 1};
  default: return {1, std::nullopt};
  }
}

enum class BinaryOperator {
  Add, Subtract, Multiply, Divide, Power,
  Less, LessEqual, Greater, GreaterEqual, Equal, NotEqual
};

inline std::string_view operator_symbol(BinaryOperator op) {
  switch (op) {
  case BinaryOperator::Add: return "+";
  case BinaryOperator::Subtract: return "-";
  case BinaryOperator::Multiply: return "*";
  case BinaryOperator::Divide: return "/";
  case BinaryOperator::Power: return "^";
  case BinaryOperator::Less: return "<";
  case BinaryOperator::LessEqual: return "<=";
  case BinaryOperator::Greater: return ">";
  case BinaryOperator::GreaterEqual: return ">=";
  case BinaryOperator::Equal: return "=";
  case BinaryOperator::NotEqual: return "<>";
  }
  return "?";
}

inline bool is_comparison(BinaryOperator op) {
  return op >= BinaryOperator::Less;
}

/// Binding strength; higher binds tighter.
inline int precedence(BinaryOperator op) {
  switch (op) {
  case BinaryOperator::Add:
  case BinaryOperator::Subtract: return 2;
  case BinaryOperator::Multiply:
  case BinaryOperator::Divide: return 3;
  case BinaryOperator::Power: return 4;
  default: return 1;
  }
}

inline constexpr int kUnaryPrecedence = 5;
inline constexpr int kPrimaryPrecedence = 6;

/// Owning, deep-copying pointer so recursive nodes keep value semantics.
template <typename T>
class Box {
public:
  Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}
  Box(const Box& other) : ptr_(std::make_unique<T>(*other.ptr_)) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& other) {
    if (this != &other) ptr_ = std::make_unique<T>(*other.ptr_);
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;

  const T& operator*() const { return *ptr_; }
  const T* operator->() const { return ptr_.get(); }

  friend bool operator==(const Box& a, const Box& b) { return *a == *b; }

private:
  std::unique_ptr<T> ptr_;
};

/// Column index (1 = A) to letters.
inline std::string column_letters(std::uint32_t column) {
  std::string letters;
  while (column > 0) {
    --column;
    letters.insert(letters.begin(), static_cast<char>('A' + column % 26));
    column /= 26;
  }
  return letters;
}

inline constexpr std::uint32_t kMaxColumn = 16384;  // XFD
inline constexpr std::uint32_t kMaxRow = 1048576;

struct CellRef {
  std::uint32_t column = 1;  // 1-based, A = 1
  std::uint32_t row = 1;     // 1-based
  bool column_absolute = false;
  bool row_absolute = false;

  /// Relative form, e.g. "C5". Used for grid keys and operand identity.
  std::string canonical() const {
    return column_letters(column) + std::to_string(row);
  }

  /// Text including any `$` markers.
  std::string text() const {
    std::string out;
    if (column_absolute) out += '$';
    out += column_letters(column);
    if (row_absolute) out += '$';
    out += std::to_string(row);
    return out;
  }

  bool operator==(const CellRef&) const = default;
};

/// Parses "C5", "$c$5", ... Returns nullopt when the text is not exactly one
/// cell reference.
inline std::optional<CellRef> parse_cell_ref(std::string_view text) {
  std::size_t i = 0;
  CellRef ref;
  if (i < text.size() && text[i] == '$') { ref.column_absolute = true; ++i; }
  std::size_t letters_begin = i;
  std::uint64_t column = 0;
  while (i < text.size() && std::isalpha(static_cast<unsigned char>(text[i]))) {
    column = column * 26 +
             static_cast<std::uint64_t>(
                 std::toupper(static_cast<unsigned char>(text[i])) - 'A' + 1);
    ++i;
    if (i - letters_begin > 3) return std::nullopt;
  }
  if (i == letters_begin || column > kMaxColumn) return std::nullopt;
  if (i < text.size() && text[i] == '$') { ref.row_absolute = true; ++i; }
  std::size_t digits_begin = i;
  std::uint64_t row = 0;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
    row = row * 10 + static_cast<std::uint64_t>(text[i] - '0');
    ++i;
    if (row > kMaxRow) return std::nullopt;
  }
  if (i == digits_begin || i != text.size() || row == 0) return std::nullopt;
  ref.column = static_cast<std::uint32_t>(column);
  ref.row = static_cast<std::uint32_t>(row);
  return ref;
}

/// Shortest text that reads back to the same double.
inline std::string format_number(double value) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) return "0";
  return std::string(buf.data(), end);
}

struct Expr;

/// The parser only produces non-negative literals; a leading minus is a
/// UnaryOp. Use `signed_number` to build a literal that round-trips.
struct NumberLiteral {
  double value = 0.0;
  bool operator==(const NumberLiteral&) const = default;
};

struct TextLiteral {
  std::string value;
  bool operator==(const TextLiteral&) const = default;
};

struct BooleanLiteral {
  bool value = false;
  bool operator==(const BooleanLiteral&) const = default;
};

/// Endpoints are always top-left / bottom-right after construction via
/// `make_range`.
struct RangeRef {
  CellRef start;
  CellRef end;

  std::string canonical() const {
    return start.canonical() + ":" + end.canonical();
  }
  std::string text() const { return start.text() + ":" + end.text(); }

  bool operator==(const RangeRef&) const = default;
};

inline RangeRef make_range(const CellRef& a, const CellRef& b) {
  RangeRef r;
  const CellRef& left = a.column <= b.column ? a : b;
  const CellRef& right = a.column <= b.column ? b : a;
  const CellRef& top = a.row <= b.row ? a : b;
  const CellRef& bottom = a.row <= b.row ? b : a;
  r.start = {left.column, top.row, left.column_absolute, top.row_absolute};
  r.end = {right.column, bottom.row, right.column_absolute,
           bottom.row_absolute};
  return r;
}

struct FunctionCall {
  Function function = Function::Sum;
  std::vector<Expr> args;
  bool operator==(const FunctionCall&) const = default;
};

struct BinaryOp {
  BinaryOperator op;
  Box<Expr> lhs;
  Box<Expr> rhs;
  bool operator==(const BinaryOp&) const = default;
};

/// Negation.
struct UnaryOp {
  Box<Expr> operand;
  bool operator==(const UnaryOp&) const = default;
};

struct Expr {
  using Node = std::variant<NumberLiteral, TextLiteral, BooleanLiteral,
                            CellRef, RangeRef, FunctionCall, BinaryOp,
                            UnaryOp>;
  Node node;

  Expr() = default;
  template <typename T>
    requires(!std::is_same_v<std::decay_t<T>, Expr> &&
             std::is_constructible_v<Node, T>)
  Expr(T n) : node(std::move(n)) {}

  bool operator==(const Expr&) const = default;
};

struct FormulaAst {
  Expr root;
  bool operator==(const FormulaAst&) const = default;
};

// Convenience builders.
inline Expr negate(Expr operand) { return UnaryOp{std::move(operand)}; }
inline Expr number(double v) { return NumberLiteral{v}; }
inline Expr signed_number(double v) {
  return std::signbit(v) ? negate(number(-v)) : number(v);
}
inline Expr text(std::string v) { return TextLiteral{std::move(v)}; }
inline Expr boolean(bool v) { return BooleanLiteral{v}; }
inline Expr call(Function f, std::vector<Expr> args) {
  return FunctionCall{f, std::move(args)};
}
inline Expr binary(BinaryOperator op, Expr lhs, Expr rhs) {
  return BinaryOp{op, std::move(lhs), std::move(rhs)};
}

/// Visits every node in pre-order.
template <typename Visitor>
void walk(const Expr& e, Visitor&& visit) {
  visit(e);
  if (const auto* fc = std::get_if<FunctionCall>(&e.node)) {
    for (const Expr& a : fc->args) walk(a, visit);
  } else if (const auto* b = std::get_if<BinaryOp>(&e.node)) {
    walk(*b->lhs, visit);
    walk(*b->rhs, visit);
  } else if (const auto* u = std::get_if<UnaryOp>(&e.node)) {
    walk(*u->operand, visit);
  }
}

namespace detail {

enum class TokenKind {
  Number, String, Name, LParen, RParen, Comma, Colon, Operator, End, Invalid
};

struct Token {
  TokenKind kind;
  std::string text;  // Name: raw text; String: unescaped; Operator: symbol
  std::size_t position;
  double number = 0.0;
};

inline bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '$' || c == '_' ||
         c == '.';
}

// Never throws: malformed lexemes become Invalid tokens so the caller can
// report unknown functions before syntax errors.
inline std::vector<Token> lex(std::string_view src, std::size_t offset) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto push = [&](TokenKind k, std::string t, std::size_t pos) {
    out.push_back(Token{k, std::move(t), pos + offset});
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
    std::size_t start = i;
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < src.size() &&
         std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
      if (i < src.size() && src[i] == '.') {
        ++i;
        while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
      }
      if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < src.size() && (src[j] == '+' || src[j] == '-')) ++j;
        if (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) {
          i = j;
          while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
        }
      }
      // A number running straight into a name ("1A") is malformed.
      if (i < src.size() && is_name_char(src[i])) {
        while (i < src.size() && is_name_char(src[i])) ++i;
        push(TokenKind::Invalid, std::string(src.substr(start, i - start)), start);
        continue;
      }
      std::string lexeme(src.substr(start, i - start));
      double value = 0.0;
      auto res = std::from_chars(lexeme.data(), lexeme.data() + lexeme.size(), value);
      if (res.ec != std::errc{} || res.ptr != lexeme.data() + lexeme.size()) {
        push(TokenKind::Invalid, lexeme, start);
        continue;
      }
      out.push_back(Token{TokenKind::Number, lexeme, start + offset, value});
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '$' || c == '_') {
      while (i < src.size() && is_name_char(src[i])) ++i;
      push(TokenKind::Name, std::string(src.substr(start, i - start)), start);
      continue;
    }
    if (c == '"') {
      std::string value;
      ++i;
      bool closed = false;
      while (i < src.size()) {
        if (src[i] == '"') {
          if (i + 1 < src.size() && src[i + 1] == '"') {
            value += '"';
            i += 2;
            continue;
          }
          ++i;
          closed = true;
          break;
        }
        value += src[i++];
      }
      push(closed ? TokenKind::String : TokenKind::Invalid, std::move(value), start);
      continue;
    }
    ++i;
    switch (c) {
    case '(': push(TokenKind::LParen, "(", start); break;
    case ')': push(TokenKind::RParen, ")", start); break;
    case ',': push(TokenKind::Comma, ",", start); break;
    case ':': push(TokenKind::Colon, ":", start); break;
    case '+': case '-': case '*': case '/': case '^': case '=':
      push(TokenKind::Operator, std::string(1, c), start);
      break;
    case '<':
      if (i < src.size() && (src[i] == '=' || src[i] == '>')) {
        push(TokenKind::Operator, std::string{c, src[i]}, start);
        ++i;
      } else {
        push(TokenKind::Operator, "<", start);
      }
      break;
    case '>':
      if (i < src.size() && src[i] == '=') {
        push(TokenKind::Operator, ">=", start);
        ++i;
      } else {
        push(TokenKind::Operator, ">", start);
      }
      break;
    default:
      push(TokenKind::Invalid, std::string(1, c), start);
    }
  }
  out.push_back(Token{TokenKind::End, "", src.size() + offset});
  return out;
}

inline constexpr int kMaxNesting = 200;

class Parser {
public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  Expr parse_formula() {
    Expr e = comparison();
    if (peek().kind != TokenKind::End)
      fail("operator or end of input");
    return e;
  }

private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& advance() { return tokens_[pos_++]; }

  [[noreturn]] void fail(const std::string& expected) const {
    throw SyntaxError(peek().position, expected);
  }

  bool peek_operator(std::string_view sym) const {
    return peek().kind == TokenKind::Operator && peek().text == sym;
  }

  std::optional<BinaryOperator> match_operator(int level) {
    if (peek().kind != TokenKind::Operator) return std::nullopt;
    static constexpr std::array<BinaryOperator, 11> all{
        BinaryOperator::Add,       BinaryOperator::Subtract,
        BinaryOperator::Multiply,  BinaryOperator::Divide,
        BinaryOperator::Power,     BinaryOperator::Less,
        BinaryOperator::LessEqual, BinaryOperator::Greater,
        BinaryOperator::GreaterEqual, BinaryOperator::Equal,
        BinaryOperator::NotEqual};
    for (BinaryOperator op : all) {
      if (precedence(op) == level && operator_symbol(op) == peek().text) {
        ++pos_;
        return op;
      }
    }
    return std::nullopt;
  }

  Expr binary_level(int level) {
    if (level > 4) return unary();
    Expr lhs = binary_level(level + 1);
    while (auto op = match_operator(level)) {
      Expr rhs = binary_level(level + 1);
      lhs = binary(*op, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  Expr comparison() {
    if (++depth_ > kMaxNesting) fail("shallower nesting");
    Expr e = binary_level(1);
    --depth_;
    return e;
  }

  Expr unary() {
    if (peek_operator("-")) {
      ++pos_;
      if (++depth_ > kMaxNesting) fail("shallower nesting");
      Expr operand = unary();
      --depth_;
      return negate(std::move(operand));
    }
    return primary();
  }

  CellRef expect_cell(const Token& tok) const {
    if (auto ref = parse_cell_ref(tok.text)) return *ref;
    throw SyntaxError(tok.position, "cell reference");
  }

  Expr primary() {
    const Token& tok = peek();
    switch (tok.kind) {
    case TokenKind::Number:
      ++pos_;
      return number(tok.number);
    case TokenKind::String:
      ++pos_;
      return text(tok.text);
    case TokenKind::LParen: {
      ++pos_;
      Expr inner = comparison();
      if (peek().kind != TokenKind::RParen) fail("')'");
      ++pos_;
      return inner;
    }
    case TokenKind::Name:
      return name_expression();
    case TokenKind::End:
      fail("operand at end of input");
    default:
      fail("operand");
    }
  }

  Expr name_expression() {
    const Token& tok = advance();
    if (peek().kind == TokenKind::LParen) {
      auto fn = function_from_name(tok.text);
      if (!fn) throw UnknownFunction("unsupported function '" + tok.text + "'");
      ++pos_;
      std::vector<Expr> args;
      if (peek().kind != TokenKind::RParen) {
        args.push_back(comparison());
        while (peek().kind == TokenKind::Comma) {
          ++pos_;
          args.push_back(comparison());
        }
        if (peek().kind != TokenKind::RParen) fail("',' or ')'");
      }
      ++pos_;
      Arity arity = function_arity(*fn);
      if (args.size() < arity.min || (arity.max && args.size() > *arity.max)) {
        std::string want = std::to_string(arity.min);
        if (!arity.max) want = "at least " + want;
        else if (*arity.max != arity.min) want += " or " + std::to_string(*arity.max);
        throw ArityError(std::string(function_name(*fn)) + " takes " + want +
                         " argument(s), got " + std::to_string(args.size()));
      }
      return call(*fn, std::move(args));
    }
    if (auto ref = parse_cell_ref(tok.text)) {
      if (peek().kind == TokenKind::Colon) {
        ++pos_;
        const Token& end_tok = peek();
        if (end_tok.kind != TokenKind::Name) fail("cell reference after ':'");
        ++pos_;
        return make_range(*ref, expect_cell(end_tok));
      }
      return *ref;
    }
    std::string upper;
    for (char c : tok.text) upper += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (upper == "TRUE") return boolean(true);
    if (upper == "FALSE") return boolean(false);
    throw SyntaxError(tok.position, "cell reference, function call or TRUE/FALSE, got '" + tok.text + "'");
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

} // namespace detail

/// Parses formula text. A single leading '=' is a formula marker and is
/// stripped; any further '=' is the equality operator.
inline FormulaAst parse(std::string_view source) {
  std::size_t offset = 0;
  while (offset < source.size() &&
         std::isspace(static_cast<unsigned char>(source[offset])))
    ++offset;
  if (offset < source.size() && source[offset] == '=') ++offset;
  auto tokens = detail::lex(source.substr(offset), offset);

  // Unknown functions win over every other diagnostic.
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    if (tokens[i].kind == detail::TokenKind::Name &&
        tokens[i + 1].kind == detail::TokenKind::LParen &&
        !function_from_name(tokens[i].text))
      throw UnknownFunction("unsupported function '" + tokens[i].text + "'");
  }
  if (tokens.size() == 1) throw SyntaxError(tokens[0].position, "formula body");

  detail::Parser parser(std::move(tokens));
  return FormulaAst{parser.parse_formula()};
}

namespace detail {

inline int node_precedence(const Expr& e) {
  if (const auto* b = std::get_if<BinaryOp>(&e.node)) return precedence(b->op);
  if (std::holds_alternative<UnaryOp>(e.node)) return kUnaryPrecedence;
  // A negative literal renders with a leading '-' and reads back as negation.
  if (const auto* n = std::get_if<NumberLiteral>(&e.node); n && std::signbit(n->value))
    return kUnaryPrecedence;
  return kPrimaryPrecedence;
}

inline std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline void render_into(const Expr& e, std::string& out);

inline void render_child(const Expr& child, bool parenthesize, std::string& out) {
  if (parenthesize) out += '(';
  render_into(child, out);
  if (parenthesize) out += ')';
}

inline void render_into(const Expr& e, std::string& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, NumberLiteral>) {
          out += format_number(n.value);
        } else if constexpr (std::is_same_v<T, TextLiteral>) {
          out += quote(n.value);
        } else if constexpr (std::is_same_v<T, BooleanLiteral>) {
          out += n.value ? "TRUE" : "FALSE";
        } else if constexpr (std::is_same_v<T, CellRef>) {
          out += n.text();
        } else if constexpr (std::is_same_v<T, RangeRef>) {
          out += n.text();
        } else if constexpr (std::is_same_v<T, FunctionCall>) {
          out += function_name(n.function);
          out += '(';
          for (std::size_t i = 0; i < n.args.size(); ++i) {
            if (i) out += ',';
            render_into(n.args[i], out);
          }
          out += ')';
        } else if constexpr (std::is_same_v<T, BinaryOp>) {
          int p = precedence(n.op);
          render_child(*n.lhs, node_precedence(*n.lhs) < p, out);
          out += operator_symbol(n.op);
          render_child(*n.rhs, node_precedence(*n.rhs) <= p, out);
        } else if constexpr (std::is_same_v<T, UnaryOp>) {
          out += '-';
          render_child(*n.operand, node_precedence(*n.operand) < kUnaryPrecedence, out);
        }
      },
      e.node);
}

} // namespace detail

/// Expression text without the leading '='.
inline std::string render(const Expr& e) {
  std::string out;
  detail::render_into(e, out);
  return out;
}

/// Canonical formula text: leading '=', uppercase names, no whitespace and
/// only the parentheses precedence requires.
inline std::string render(const FormulaAst& ast) { return "=" + render(ast.root); }

} // namespace sheetsmith
