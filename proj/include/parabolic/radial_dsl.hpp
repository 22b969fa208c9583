#pragma once

// Expression language for radial functions phi(s, omega).
//
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := base ('^' intliteral)?
//   base   := number | ident | '(' expr ')' | func '(' expr ')'
//   func   := sin | cos | sqrt | abs | neg
//   ident  := s | w1 .. w9          (wk is the k-th Cartesian component of omega)

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include "parabolic/sampling.hpp"
#include "parabolic/starlike_domain.hpp"

namespace parabolic::dsl {

struct Position {
  int line = 1;
  int column = 1;
};

enum class ParseErrorKind { Lexical, UnexpectedToken, UnknownIdentifier, Arity };

inline const char* to_string(ParseErrorKind k) {
  switch (k) {
    case ParseErrorKind::Lexical: return "lexical error";
    case ParseErrorKind::UnexpectedToken: return "unexpected token";
    case ParseErrorKind::UnknownIdentifier: return "unknown identifier";
    case ParseErrorKind::Arity: return "arity error";
  }
  return "error";
}

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, Position pos, std::string detail,
             std::vector<std::string> expected = {})
      : std::runtime_error(format(kind, pos, detail, expected)),
        kind_(kind),
        pos_(pos),
        detail_(std::move(detail)),
        expected_(std::move(expected)) {}

  ParseErrorKind kind() const { return kind_; }
  Position position() const { return pos_; }
  int line() const { return pos_.line; }
  int column() const { return pos_.column; }
  const std::string& detail() const { return detail_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  static std::string format(ParseErrorKind kind, Position pos,
                            const std::string& detail,
                            const std::vector<std::string>& expected) {
    std::string msg = std::to_string(pos.line) + ":" +
                      std::to_string(pos.column) + ": " + to_string(kind) +
                      ": " + detail;
    if (!expected.empty()) {
      msg += " (expected ";
      for (std::size_t i = 0; i < expected.size(); ++i) {
        if (i) msg += ", ";
        msg += expected[i];
      }
      msg += ")";
    }
    return msg;
  }

  ParseErrorKind kind_;
  Position pos_;
  std::string detail_;
  std::vector<std::string> expected_;
};

class EvalError : public std::runtime_error {
 public:
  EvalError(const std::string& what, std::string subexpr)
      : std::runtime_error(what + " in '" + subexpr + "'"),
        subexpression(std::move(subexpr)) {}
  std::string subexpression;
};

// ---------------------------------------------------------------------------
// AST

enum class UnaryOp { Neg, Sin, Cos, Sqrt, Abs };
enum class BinaryOp { Add, Sub, Mul, Div };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Literal {
  double value = 0.0;
};
/// index 0 is s, index k >= 1 is w_k.
struct Variable {
  int index = 0;
};
struct Unary {
  UnaryOp op;
  ExprPtr arg;
};
struct Binary {
  BinaryOp op;
  ExprPtr lhs;
  ExprPtr rhs;
};
struct Power {
  ExprPtr base;
  int exponent = 1;
};
struct Group {
  ExprPtr inner;
};

struct Expr {
  std::variant<Literal, Variable, Unary, Binary, Power, Group> node;
  Position pos;
};

/// Structural equality; source positions are ignored.
inline bool same_structure(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, Literal>) {
          return x.value == y.value;
        } else if constexpr (std::is_same_v<T, Variable>) {
          return x.index == y.index;
        } else if constexpr (std::is_same_v<T, Unary>) {
          return x.op == y.op && same_structure(*x.arg, *y.arg);
        } else if constexpr (std::is_same_v<T, Binary>) {
          return x.op == y.op && same_structure(*x.lhs, *y.lhs) &&
                 same_structure(*x.rhs, *y.rhs);
        } else if constexpr (std::is_same_v<T, Power>) {
          return x.exponent == y.exponent && same_structure(*x.base, *y.base);
        } else {
          return same_structure(*x.inner, *y.inner);
        }
      },
      a.node);
}

/// Highest w-index referenced (0 when only s or constants appear).
inline int max_variable_index(const Expr& e) {
  return std::visit(
      [](const auto& x) -> int {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Literal>) {
          return 0;
        } else if constexpr (std::is_same_v<T, Variable>) {
          return x.index;
        } else if constexpr (std::is_same_v<T, Unary>) {
          return max_variable_index(*x.arg);
        } else if constexpr (std::is_same_v<T, Binary>) {
          return std::max(max_variable_index(*x.lhs), max_variable_index(*x.rhs));
        } else if constexpr (std::is_same_v<T, Power>) {
          return max_variable_index(*x.base);
        } else {
          return max_variable_index(*x.inner);
        }
      },
      e.node);
}

// ---------------------------------------------------------------------------
// Printing

inline const char* function_name(UnaryOp op) {
  switch (op) {
    case UnaryOp::Neg: return "neg";
    case UnaryOp::Sin: return "sin";
    case UnaryOp::Cos: return "cos";
    case UnaryOp::Sqrt: return "sqrt";
    case UnaryOp::Abs: return "abs";
  }
  return "?";
}

inline std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline int precedence(const Expr& e) {
  if (const auto* b = std::get_if<Binary>(&e.node)) {
    return (b->op == BinaryOp::Add || b->op == BinaryOp::Sub) ? 1 : 2;
  }
  return 4;
}

}  // namespace detail

/// Source text that reparses to the same tree (for trees produced by parse).
inline std::string to_source(const Expr& e) {
  return std::visit(
      [&](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Literal>) {
          if (x.value < 0.0 || std::signbit(x.value)) {
            return "neg(" + format_number(-x.value) + ")";
          }
          return format_number(x.value);
        } else if constexpr (std::is_same_v<T, Variable>) {
          return x.index == 0 ? std::string("s") : "w" + std::to_string(x.index);
        } else if constexpr (std::is_same_v<T, Unary>) {
          return std::string(function_name(x.op)) + "(" + to_source(*x.arg) + ")";
        } else if constexpr (std::is_same_v<T, Binary>) {
          const int p = detail::precedence(e);
          std::string lhs = to_source(*x.lhs);
          std::string rhs = to_source(*x.rhs);
          if (detail::precedence(*x.lhs) < p) lhs = "(" + lhs + ")";
          if (detail::precedence(*x.rhs) <= p) rhs = "(" + rhs + ")";
          const char* op = x.op == BinaryOp::Add   ? " + "
                           : x.op == BinaryOp::Sub ? " - "
                           : x.op == BinaryOp::Mul ? " * "
                                                   : " / ";
          return lhs + op + rhs;
        } else if constexpr (std::is_same_v<T, Power>) {
          std::string base = to_source(*x.base);
          if (detail::precedence(*x.base) < 4 ||
              std::holds_alternative<Power>(x.base->node)) {
            base = "(" + base + ")";
          }
          return base + "^" + std::to_string(x.exponent);
        } else {
          return "(" + to_source(*x.inner) + ")";
        }
      },
      e.node);
}

// ---------------------------------------------------------------------------
// Lexer

enum class TokenKind { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;
  double number = 0.0;
  bool integral = false;
  Position pos;
};

inline std::string describe(const Token& t) {
  if (t.kind == TokenKind::End) return "end of input";
  return "'" + t.text + "'";
}

inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  Position pos;
  std::size_t i = 0;
  auto advance = [&](std::size_t k) {
    for (std::size_t j = 0; j < k; ++j) {
      if (src[i + j] == '\n') {
        ++pos.line;
        pos.column = 1;
      } else {
        ++pos.column;
      }
    }
    i += k;
  };
  auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
  auto is_alpha = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  };
  while (i < src.size()) {
    const char c = src[i];
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      advance(1);
      continue;
    }
    Token tok;
    tok.pos = pos;
    if (is_digit(c) || c == '.') {
      std::size_t j = i;
      bool integral = true;
      while (j < src.size() && is_digit(src[j])) ++j;
      if (j < src.size() && src[j] == '.') {
        integral = false;
        ++j;
        while (j < src.size() && is_digit(src[j])) ++j;
      }
      const bool has_mantissa_digit =
          std::any_of(src.begin() + static_cast<std::ptrdiff_t>(i),
                      src.begin() + static_cast<std::ptrdiff_t>(j), is_digit);
      if (!has_mantissa_digit) {
        throw ParseError(ParseErrorKind::Lexical, pos, "malformed number");
      }
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        integral = false;
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k >= src.size() || !is_digit(src[k])) {
          throw ParseError(ParseErrorKind::Lexical, pos,
                           "malformed number exponent");
        }
        while (k < src.size() && is_digit(src[k])) ++k;
        j = k;
      }
      tok.kind = TokenKind::Number;
      tok.text = std::string(src.substr(i, j - i));
      tok.integral = integral;
      auto res = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(),
                                 tok.number);
      if (res.ec != std::errc() || !std::isfinite(tok.number)) {
        throw ParseError(ParseErrorKind::Lexical, pos, "number out of range");
      }
      out.push_back(std::move(tok));
      advance(j - i);
      continue;
    }
    if (is_alpha(c)) {
      std::size_t j = i;
      while (j < src.size() && (is_alpha(src[j]) || is_digit(src[j]))) ++j;
      tok.kind = TokenKind::Ident;
      tok.text = std::string(src.substr(i, j - i));
      out.push_back(std::move(tok));
      advance(j - i);
      continue;
    }
    switch (c) {
      case '+': tok.kind = TokenKind::Plus; break;
      case '-': tok.kind = TokenKind::Minus; break;
      case '*': tok.kind = TokenKind::Star; break;
      case '/': tok.kind = TokenKind::Slash; break;
      case '^': tok.kind = TokenKind::Caret; break;
      case '(': tok.kind = TokenKind::LParen; break;
      case ')': tok.kind = TokenKind::RParen; break;
      case ',': tok.kind = TokenKind::Comma; break;
      default: {
        const unsigned char uc = static_cast<unsigned char>(c);
        std::string shown = (uc >= 0x20 && uc < 0x7f)
                                ? std::string(1, c)
                                : "byte 0x" + std::to_string(static_cast<int>(uc));
        throw ParseError(ParseErrorKind::Lexical, pos,
                         "unexpected character '" + shown + "'");
      }
    }
    tok.text = std::string(1, c);
    out.push_back(std::move(tok));
    advance(1);
  }
  Token end;
  end.kind = TokenKind::End;
  end.pos = pos;
  out.push_back(end);
  return out;
}

// ---------------------------------------------------------------------------
// Parser

namespace detail {

inline const std::vector<std::string>& factor_starts() {
  static const std::vector<std::string> v{"number", "identifier", "'('"};
  return v;
}

class Parser {
 public:
  Parser(std::vector<Token> toks, int max_w) : toks_(std::move(toks)), max_w_(max_w) {}

  ExprPtr parse_all() {
    auto e = expr();
    if (peek().kind != TokenKind::End) {
      throw ParseError(ParseErrorKind::UnexpectedToken, peek().pos,
                       "unexpected " + describe(peek()),
                       {"'+'", "'-'", "'*'", "'/'", "'^'", "end of input"});
    }
    return e;
  }

 private:
  const Token& peek() const { return toks_[i_]; }
  const Token& take() { return toks_[i_++]; }

  static ExprPtr make(decltype(Expr::node) node, Position pos) {
    return std::make_shared<const Expr>(Expr{std::move(node), pos});
  }

  ExprPtr expr() {
    auto lhs = term();
    while (peek().kind == TokenKind::Plus || peek().kind == TokenKind::Minus) {
      const Token& op = take();
      auto rhs = term();
      lhs = make(Binary{op.kind == TokenKind::Plus ? BinaryOp::Add : BinaryOp::Sub,
                        lhs, rhs},
                 op.pos);
    }
    return lhs;
  }

  ExprPtr term() {
    auto lhs = factor();
    while (peek().kind == TokenKind::Star || peek().kind == TokenKind::Slash) {
      const Token& op = take();
      auto rhs = factor();
      if (op.kind == TokenKind::Slash) {
        const Expr* d = rhs.get();
        while (const auto* g = std::get_if<Group>(&d->node)) d = g->inner.get();
        if (const auto* lit = std::get_if<Literal>(&d->node); lit && lit->value == 0.0) {
          throw ParseError(ParseErrorKind::UnexpectedToken, d->pos,
                           "division by the literal 0");
        }
      }
      lhs = make(Binary{op.kind == TokenKind::Star ? BinaryOp::Mul : BinaryOp::Div,
                        lhs, rhs},
                 op.pos);
    }
    return lhs;
  }

  ExprPtr factor() {
    auto b = base();
    if (peek().kind == TokenKind::Caret) {
      const Token& caret = take();
      const Token& ex = peek();
      if (ex.kind != TokenKind::Number || !ex.integral) {
        throw ParseError(ParseErrorKind::UnexpectedToken, ex.pos,
                         "unexpected " + describe(ex) + " after '^'",
                         {"integer literal"});
      }
      if (ex.number > 64.0) {
        throw ParseError(ParseErrorKind::UnexpectedToken, ex.pos,
                         "exponent too large (max 64)", {"integer literal"});
      }
      take();
      b = make(Power{b, static_cast<int>(ex.number)}, caret.pos);
    }
    return b;
  }

  ExprPtr base() {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::Number:
        take();
        return make(Literal{t.number}, t.pos);
      case TokenKind::LParen: {
        take();
        auto inner = expr();
        expect_rparen();
        return make(Group{inner}, t.pos);
      }
      case TokenKind::Ident:
        return identifier();
      default:
        throw ParseError(ParseErrorKind::UnexpectedToken, t.pos,
                         "unexpected " + describe(t), factor_starts());
    }
  }

  void expect_rparen() {
    const Token& t = peek();
    if (t.kind != TokenKind::RParen) {
      throw ParseError(ParseErrorKind::UnexpectedToken, t.pos,
                       "unexpected " + describe(t),
                       {"')'", "'+'", "'-'", "'*'", "'/'", "'^'"});
    }
    take();
  }

  static bool function_op(const std::string& name, UnaryOp& op) {
    if (name == "sin") op = UnaryOp::Sin;
    else if (name == "cos") op = UnaryOp::Cos;
    else if (name == "sqrt") op = UnaryOp::Sqrt;
    else if (name == "abs") op = UnaryOp::Abs;
    else if (name == "neg") op = UnaryOp::Neg;
    else return false;
    return true;
  }

  ExprPtr identifier() {
    const Token& t = take();
    UnaryOp op{};
    if (function_op(t.text, op)) {
      if (peek().kind != TokenKind::LParen) {
        throw ParseError(ParseErrorKind::Arity, t.pos,
                         "function '" + t.text + "' takes exactly one argument",
                         {"'('"});
      }
      take();
      if (peek().kind == TokenKind::RParen) {
        throw ParseError(ParseErrorKind::Arity, peek().pos,
                         "function '" + t.text + "' takes exactly one argument",
                         factor_starts());
      }
      auto arg = expr();
      if (peek().kind == TokenKind::Comma) {
        throw ParseError(ParseErrorKind::Arity, peek().pos,
                         "function '" + t.text + "' takes exactly one argument",
                         {"')'"});
      }
      expect_rparen();
      return make(Unary{op, arg}, t.pos);
    }
    if (t.text == "s") return make(Variable{0}, t.pos);
    if (t.text.size() == 2 && t.text[0] == 'w' && t.text[1] >= '1' && t.text[1] <= '9') {
      const int k = t.text[1] - '0';
      if (k > max_w_) {
        throw ParseError(ParseErrorKind::UnknownIdentifier, t.pos,
                         "'" + t.text + "' exceeds the spatial dimension " +
                             std::to_string(max_w_));
      }
      return make(Variable{k}, t.pos);
    }
    throw ParseError(ParseErrorKind::UnknownIdentifier, t.pos,
                     "unknown identifier '" + t.text + "'",
                     {"s", "w1..w" + std::to_string(max_w_), "sin", "cos",
                      "sqrt", "abs", "neg"});
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
  int max_w_;
};

}  // namespace detail

/// Parses `source`; `dimension` (1..9) limits which w_k may appear.
inline ExprPtr parse(std::string_view source, int dimension = 9) {
  if (dimension < 1 || dimension > 9) {
    throw std::invalid_argument("parse: dimension must be in 1..9");
  }
  return detail::Parser(tokenize(source), dimension).parse_all();
}

// ---------------------------------------------------------------------------
// Evaluation

inline double evaluate(const Expr& e, double s, std::span<const double> omega) {
  return std::visit(
      [&](const auto& x) -> double {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Literal>) {
          return x.value;
        } else if constexpr (std::is_same_v<T, Variable>) {
          if (x.index == 0) return s;
          if (static_cast<std::size_t>(x.index) > omega.size()) {
            throw EvalError("unbound variable", to_source(e));
          }
          return omega[static_cast<std::size_t>(x.index - 1)];
        } else if constexpr (std::is_same_v<T, Unary>) {
          const double a = evaluate(*x.arg, s, omega);
          switch (x.op) {
            case UnaryOp::Neg: return -a;
            case UnaryOp::Sin: return std::sin(a);
            case UnaryOp::Cos: return std::cos(a);
            case UnaryOp::Abs: return std::abs(a);
            case UnaryOp::Sqrt:
              if (a < 0.0) throw EvalError("sqrt of negative value", to_source(e));
              return std::sqrt(a);
          }
          return a;
        } else if constexpr (std::is_same_v<T, Binary>) {
          const double a = evaluate(*x.lhs, s, omega);
          const double b = evaluate(*x.rhs, s, omega);
          switch (x.op) {
            case BinaryOp::Add: return a + b;
            case BinaryOp::Sub: return a - b;
            case BinaryOp::Mul: return a * b;
            case BinaryOp::Div:
              if (b == 0.0) throw EvalError("division by zero", to_source(e));
              return a / b;
          }
          return a;
        } else if constexpr (std::is_same_v<T, Power>) {
          const double b = evaluate(*x.base, s, omega);
          double r = 1.0;
          for (int k = 0; k < x.exponent; ++k) r *= b;
          return r;
        } else {
          return evaluate(*x.inner, s, omega);
        }
      },
      e.node);
}

// ---------------------------------------------------------------------------
// Radial specs

struct RadialSpec {
  std::string source;
  ExprPtr expr;
  std::size_t n = 2;
  Interval window{0.0, 1.0};
  double delta0 = 0.0;
  double k0 = 0.0;
  double M = 0.0;
};

/// Parses and checks the structural invariants; throws ConfigError.
inline RadialSpec make_spec(std::string source, std::size_t n, Interval window,
                            double delta0, double k0, double M) {
  if (n < 2 || n > 9) throw ConfigError("n must be between 2 and 9");
  if (!(window.lo < window.hi)) throw ConfigError("window must satisfy T0 < T1");
  if (!(delta0 > 0.0)) throw ConfigError("delta0 must be positive");
  if (!(delta0 < k0)) throw ConfigError("invariant violated: delta0 < k0 required");
  if (!std::isfinite(k0)) throw ConfigError("k0 must be finite");
  if (!(M >= 0.0) || !std::isfinite(M)) throw ConfigError("M must be >= 0");
  ExprPtr expr;
  try {
    expr = parse(source, static_cast<int>(n));
  } catch (const ParseError& e) {
    throw ConfigError(std::string("phi: ") + e.what());
  }
  return RadialSpec{std::move(source), std::move(expr), n, window, delta0, k0, M};
}

inline StarlikeDomain make_domain(const RadialSpec& spec) {
  return StarlikeDomain(
      [expr = spec.expr](double s, std::span<const double> w) {
        return evaluate(*expr, s, w);
      },
      spec.n, spec.window, spec.delta0, spec.k0, spec.M);
}

struct ValidationWitness {
  double s = 0.0;
  std::vector<double> omega;
  double value = 0.0;
  std::string message;
};

struct ValidationReport {
  std::size_t samples = 0;
  double min_value = std::numeric_limits<double>::infinity();
  double max_value = -std::numeric_limits<double>::infinity();
  std::size_t range_violations = 0;
  std::size_t eval_errors = 0;
  double lip_estimate = 0.0;
  bool lip_ok = true;
  std::vector<ValidationWitness> witnesses;  ///< first few violations

  bool passed() const {
    return range_violations == 0 && eval_errors == 0 && lip_ok;
  }
};

struct ValidationOptions {
  std::size_t points = 10000;
  std::uint64_t seed = 42;
  int refinement_levels = 20;
  std::size_t max_witnesses = 5;
};

/// Sample-based check of delta0 < phi < k0 and of the Lip(1,1/2) constant M
/// in the metric |s1 - s2|^{1/2} + |w1 - w2| (chordal on the sphere).
inline ValidationReport validate_spec(const RadialSpec& spec,
                                      const ValidationOptions& opt = {}) {
  ValidationReport rep;
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t count = std::max<std::size_t>(opt.points, 2);
  auto add_witness = [&](double s, const std::vector<double>& w, double v,
                         std::string msg) {
    if (rep.witnesses.size() < opt.max_witnesses) {
      rep.witnesses.push_back({s, w, v, std::move(msg)});
    }
  };
  auto eval = [&](double s, const std::vector<double>& w) -> std::optional<double> {
    try {
      return evaluate(*spec.expr, s, w);
    } catch (const EvalError& e) {
      ++rep.eval_errors;
      add_witness(s, w, std::numeric_limits<double>::quiet_NaN(), e.what());
      return std::nullopt;
    }
  };
  auto lip_pair = [&](double s1, const std::vector<double>& w1, double v1,
                      double s2, const std::vector<double>& w2) {
    const double den = std::sqrt(std::abs(s1 - s2)) + euclidean_distance(w1, w2);
    if (den == 0.0) return;
    auto v2 = eval(s2, w2);
    if (!v2) return;
    const double ratio = std::abs(v1 - *v2) / den;
    if (ratio > rep.lip_estimate) {
      rep.lip_estimate = ratio;
      if (ratio > spec.M + 1e-9) {
        add_witness(s1, w1, v1, "Lipschitz ratio " + std::to_string(ratio) +
                                    " exceeds M against s=" + std::to_string(s2));
      }
    }
  };

  double prev_s = 0.0;
  std::vector<double> prev_w;
  for (std::size_t i = 0; i < count; ++i) {
    const double u = (static_cast<double>(i) + unit(rng)) / static_cast<double>(count);
    const double s = std::clamp(spec.window.lo + u * spec.window.width(),
                                spec.window.lo, spec.window.hi);
    const auto w = random_unit_vector(spec.n, rng);
    ++rep.samples;
    auto v = eval(s, w);
    if (!v) continue;
    rep.min_value = std::min(rep.min_value, *v);
    rep.max_value = std::max(rep.max_value, *v);
    if (!(*v > spec.delta0 && *v < spec.k0)) {
      ++rep.range_violations;
      add_witness(s, w, *v, "value outside (delta0, k0)");
    }
    if (!prev_w.empty()) lip_pair(s, w, *v, prev_s, prev_w);
    for (int k = 1; k <= opt.refinement_levels; ++k) {
      const double h = std::ldexp(1.0, -k);
      auto w2 = random_unit_vector(spec.n, rng);
      for (std::size_t j = 0; j < w2.size(); ++j) w2[j] = w[j] + h * w2[j];
      const double len = euclidean_norm(w2);
      for (double& c : w2) c /= len;
      const double ds = (unit(rng) < 0.5 ? -1.0 : 1.0) * h * spec.window.width();
      double s2 = s + ds;
      if (!spec.window.contains(s2)) s2 = s - ds;
      s2 = std::clamp(s2, spec.window.lo, spec.window.hi);
      lip_pair(s, w, *v, s2, w2);
    }
    prev_s = s;
    prev_w = w;
  }
  rep.lip_ok = rep.lip_estimate <= spec.M + 1e-9;
  return rep;
}

}  // namespace parabolic::dsl
