#pragma once

// Expressions over chart coordinates. An expression evaluates to a scalar or a
// real matrix; evaluation always carries forward-mode tangents, so values and
// exact directional derivatives come out of the same pass.

#include <lcf/error.hpp>
#include <lcf/matrix.hpp>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lcf {

using ParamMap = std::map<std::string, double>;

struct Shape {
  int rows = 1;
  int cols = 1;
  bool scalar = true;

  static Shape matrix(int r, int c) { return {r, c, false}; }
  bool square() const { return !scalar && rows == cols; }
  bool operator==(const Shape&) const = default;
  std::string str() const {
    return scalar ? std::string("scalar")
                  : std::to_string(rows) + "x" + std::to_string(cols) + " matrix";
  }
};

struct MatrixSymbol {
  std::string name;
  int rows;
  int cols;
};

/// Names an expression may refer to. Coordinates and parameters are scalars;
/// matrix symbols carry a declared shape.
struct Symbols {
  std::vector<std::string> coords;
  std::vector<std::string> params;
  std::vector<MatrixSymbol> matrices;
};

namespace ast {

enum class Op { Number, Coord, Param, MatrixVar, Neg, Add, Sub, Mul, Div, Pow, Call, Literal };
enum class Fn { Sin, Cos, Tan, Exp, Log, Sqrt, Atan2, Mexp, Transpose, Inv, Det, Tr, Eye, Block, Entry };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Op op = Op::Number;
  Fn fn = Fn::Sin;
  double number = 0.0;
  int index = -1;          // symbol slot for Coord/Param/MatrixVar
  int exponent = 0;        // Pow
  int rows = 0, cols = 0;  // Literal
  std::vector<int> ints;   // integer arguments of eye/block/entry
  std::vector<NodePtr> args;
  Shape shape;
};

struct FnInfo {
  std::string_view name;
  Fn fn;
  int exprs;  // expression arguments
  int ints;   // trailing integer-literal arguments
};

inline constexpr FnInfo kFunctions[] = {
    {"sin", Fn::Sin, 1, 0},         {"cos", Fn::Cos, 1, 0},   {"tan", Fn::Tan, 1, 0},
    {"exp", Fn::Exp, 1, 0},         {"log", Fn::Log, 1, 0},   {"sqrt", Fn::Sqrt, 1, 0},
    {"atan2", Fn::Atan2, 2, 0},     {"mexp", Fn::Mexp, 1, 0}, {"transpose", Fn::Transpose, 1, 0},
    {"inv", Fn::Inv, 1, 0},         {"det", Fn::Det, 1, 0},   {"tr", Fn::Tr, 1, 0},
    {"eye", Fn::Eye, 0, 1},         {"block", Fn::Block, 1, 4}, {"entry", Fn::Entry, 1, 2},
};

inline const FnInfo* find_function(std::string_view name) {
  for (const auto& f : kFunctions)
    if (f.name == name) return &f;
  return nullptr;
}

inline const FnInfo& function_info(Fn fn) {
  for (const auto& f : kFunctions)
    if (f.fn == fn) return f;
  throw Error("unknown function id");
}

inline bool equal(const Node& a, const Node& b) {
  if (a.op != b.op || a.args.size() != b.args.size() || !(a.shape == b.shape)) return false;
  switch (a.op) {
    case Op::Number:
      if (!(a.number == b.number)) return false;
      break;
    case Op::Coord:
    case Op::Param:
    case Op::MatrixVar:
      if (a.index != b.index) return false;
      break;
    case Op::Pow:
      if (a.exponent != b.exponent) return false;
      break;
    case Op::Call:
      if (a.fn != b.fn || a.ints != b.ints) return false;
      break;
    case Op::Literal:
      if (a.rows != b.rows || a.cols != b.cols) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!equal(*a.args[i], *b.args[i])) return false;
  return true;
}

}  // namespace ast

/// An immutable, validated expression tree.
class Expr {
 public:
  Expr() = default;
  Expr(ast::NodePtr root, std::shared_ptr<const Symbols> symbols)
      : root_(std::move(root)), symbols_(std::move(symbols)) {}

  const ast::Node& root() const { return *root_; }
  const Symbols& symbols() const { return *symbols_; }
  Shape shape() const { return root_->shape; }
  bool empty() const { return !root_; }

  /// Canonical text form; parses back to a structurally identical tree.
  std::string str() const;

  friend bool operator==(const Expr& a, const Expr& b) { return ast::equal(*a.root_, *b.root_); }

 private:
  ast::NodePtr root_;
  std::shared_ptr<const Symbols> symbols_;
};

namespace detail {

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, LBracket, RBracket, Comma, End };

struct Token {
  Tok kind;
  std::string text;
  double number = 0.0;
  int line = 1;
  int column = 1;
};

inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    const unsigned char c = static_cast<unsigned char>(src[i]);
    if (std::isspace(c)) {
      advance(1);
      continue;
    }
    Token t{Tok::End, "", 0.0, line, col};
    if (std::isdigit(c) || (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i;
      while (j < src.size() && (std::isdigit(static_cast<unsigned char>(src[j])) || src[j] == '.')) ++j;
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          while (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) ++k;
          j = k;
        }
      }
      t.kind = Tok::Number;
      t.text = std::string(src.substr(i, j - i));
      char* end = nullptr;
      t.number = std::strtod(t.text.c_str(), &end);
      if (end != t.text.c_str() + t.text.size()) throw SyntaxError("malformed number '" + t.text + "'", line, col);
      out.push_back(t);
      advance(j - i);
      continue;
    }
    if (std::isalpha(c) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      t.kind = Tok::Ident;
      t.text = std::string(src.substr(i, j - i));
      out.push_back(t);
      advance(j - i);
      continue;
    }
    switch (c) {
      case '+': t.kind = Tok::Plus; break;
      case '-': t.kind = Tok::Minus; break;
      case '*': t.kind = Tok::Star; break;
      case '/': t.kind = Tok::Slash; break;
      case '^': t.kind = Tok::Caret; break;
      case '(': t.kind = Tok::LParen; break;
      case ')': t.kind = Tok::RParen; break;
      case '[': t.kind = Tok::LBracket; break;
      case ']': t.kind = Tok::RBracket; break;
      case ',': t.kind = Tok::Comma; break;
      default:
        throw SyntaxError(std::string("unexpected character '") + static_cast<char>(c) + "'", line, col);
    }
    t.text = std::string(1, static_cast<char>(c));
    out.push_back(t);
    advance(1);
  }
  out.push_back(Token{Tok::End, "", 0.0, line, col});
  return out;
}

class Parser {
 public:
  Parser(std::string_view src, const Symbols& symbols) : tokens_(tokenize(src)), symbols_(symbols) {}

  ast::NodePtr parse() {
    auto root = expression();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
    return root;
  }

 private:
  using Node = ast::Node;
  using Op = ast::Op;
  using Fn = ast::Fn;

  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() { return tokens_[pos_++]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }
  [[noreturn]] void fail(const std::string& what) const {
    const auto& t = peek();
    throw SyntaxError(t.kind == Tok::End ? "unexpected end of input" : what, t.line, t.column);
  }
  void expect(Tok k, const char* what) {
    if (!accept(k)) fail(std::string("expected ") + what);
  }
  [[noreturn]] static void invalid(const Token& at, const std::string& what) {
    throw ValidationError(what + " (line " + std::to_string(at.line) + ", column " +
                          std::to_string(at.column) + ")");
  }

  static ast::NodePtr make(Node n) { return std::make_shared<const Node>(std::move(n)); }

  ast::NodePtr binary(Op op, ast::NodePtr lhs, ast::NodePtr rhs, const Token& at) {
    Node n;
    n.op = op;
    const Shape a = lhs->shape, b = rhs->shape;
    switch (op) {
      case Op::Add:
      case Op::Sub:
        if (!(a == b)) invalid(at, "cannot add " + a.str() + " and " + b.str());
        n.shape = a;
        break;
      case Op::Mul:
        if (a.scalar) {
          n.shape = b;
        } else if (b.scalar) {
          n.shape = a;
        } else {
          if (a.cols != b.rows) invalid(at, "cannot multiply " + a.str() + " by " + b.str());
          n.shape = Shape::matrix(a.rows, b.cols);
        }
        break;
      case Op::Div:
        if (!b.scalar) invalid(at, "division by a " + b.str());
        n.shape = a;
        break;
      default:
        break;
    }
    n.args = {std::move(lhs), std::move(rhs)};
    return make(std::move(n));
  }

  ast::NodePtr expression() {
    auto lhs = term();
    for (;;) {
      const Token& t = peek();
      if (t.kind == Tok::Plus || t.kind == Tok::Minus) {
        next();
        lhs = binary(t.kind == Tok::Plus ? Op::Add : Op::Sub, lhs, term(), t);
      } else {
        return lhs;
      }
    }
  }

  ast::NodePtr term() {
    auto lhs = unary();
    for (;;) {
      const Token& t = peek();
      if (t.kind == Tok::Star || t.kind == Tok::Slash) {
        next();
        lhs = binary(t.kind == Tok::Star ? Op::Mul : Op::Div, lhs, unary(), t);
      } else {
        return lhs;
      }
    }
  }

  ast::NodePtr unary() {
    if (accept(Tok::Plus)) return unary();
    if (accept(Tok::Minus)) {
      auto arg = unary();
      Node n;
      n.op = Op::Neg;
      n.shape = arg->shape;
      n.args = {std::move(arg)};
      return make(std::move(n));
    }
    return power();
  }

  int integer_literal(bool allow_negative) {
    const bool negative = allow_negative && accept(Tok::Minus);
    const Token& t = peek();
    if (t.kind != Tok::Number) fail("expected an integer literal");
    next();
    if (t.number != std::floor(t.number) || std::abs(t.number) > 1e6)
      invalid(t, "'" + t.text + "' is not an integer");
    const int v = static_cast<int>(t.number);
    return negative ? -v : v;
  }

  ast::NodePtr power() {
    auto base = primary();
    const Token& t = peek();
    if (!accept(Tok::Caret)) return base;
    const int e = integer_literal(true);
    if (!base->shape.scalar && !base->shape.square()) invalid(t, "power of a non-square " + base->shape.str());
    Node n;
    n.op = Op::Pow;
    n.exponent = e;
    n.shape = base->shape;
    n.args = {std::move(base)};
    return make(std::move(n));
  }

  ast::NodePtr primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Number: {
        next();
        Node n;
        n.op = Op::Number;
        n.number = t.number;
        return make(std::move(n));
      }
      case Tok::Ident:
        next();
        if (peek().kind == Tok::LParen) return call(t);
        return identifier(t);
      case Tok::LParen: {
        next();
        auto e = expression();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::LBracket:
        return literal();
      default:
        fail("unexpected '" + t.text + "'");
    }
  }

  ast::NodePtr identifier(const Token& t) {
    Node n;
    for (std::size_t i = 0; i < symbols_.coords.size(); ++i)
      if (symbols_.coords[i] == t.text) {
        n.op = Op::Coord;
        n.index = static_cast<int>(i);
        return make(std::move(n));
      }
    for (std::size_t i = 0; i < symbols_.params.size(); ++i)
      if (symbols_.params[i] == t.text) {
        n.op = Op::Param;
        n.index = static_cast<int>(i);
        return make(std::move(n));
      }
    for (std::size_t i = 0; i < symbols_.matrices.size(); ++i)
      if (symbols_.matrices[i].name == t.text) {
        n.op = Op::MatrixVar;
        n.index = static_cast<int>(i);
        n.shape = Shape::matrix(symbols_.matrices[i].rows, symbols_.matrices[i].cols);
        return make(std::move(n));
      }
    if (t.text == "pi") {
      n.op = Op::Number;
      n.number = std::numbers::pi;
      return make(std::move(n));
    }
    if (ast::find_function(t.text))
      throw SyntaxError("expected '(' after '" + t.text + "'", t.line,
                        t.column + static_cast<int>(t.text.size()));
    invalid(t, "unknown identifier '" + t.text + "'");
  }

  ast::NodePtr call(const Token& name) {
    const auto* info = ast::find_function(name.text);
    if (!info) invalid(name, "unknown function '" + name.text + "'");
    expect(Tok::LParen, "'('");
    Node n;
    n.op = Op::Call;
    n.fn = info->fn;
    for (int i = 0; i < info->exprs; ++i) {
      if (i > 0) expect(Tok::Comma, "','");
      n.args.push_back(expression());
    }
    for (int i = 0; i < info->ints; ++i) {
      if (i > 0 || info->exprs > 0) expect(Tok::Comma, "','");
      n.ints.push_back(integer_literal(false));
    }
    expect(Tok::RParen, "')'");

    auto need_scalar = [&](std::size_t k) {
      if (!n.args[k]->shape.scalar)
        invalid(name, name.text + "() expects a scalar argument, got " + n.args[k]->shape.str());
    };
    auto need_square = [&] {
      if (!n.args[0]->shape.square())
        invalid(name, name.text + "() expects a square matrix, got " + n.args[0]->shape.str());
    };
    switch (info->fn) {
      case Fn::Sin: case Fn::Cos: case Fn::Tan: case Fn::Exp: case Fn::Log: case Fn::Sqrt:
        need_scalar(0);
        n.shape = Shape{};
        break;
      case Fn::Atan2:
        need_scalar(0);
        need_scalar(1);
        n.shape = Shape{};
        break;
      case Fn::Mexp: case Fn::Inv:
        need_square();
        n.shape = n.args[0]->shape;
        break;
      case Fn::Det: case Fn::Tr:
        need_square();
        n.shape = Shape{};
        break;
      case Fn::Transpose: {
        const Shape s = n.args[0]->shape;
        if (s.scalar) invalid(name, "transpose() expects a matrix");
        n.shape = Shape::matrix(s.cols, s.rows);
        break;
      }
      case Fn::Eye:
        if (n.ints[0] < 1) invalid(name, "eye() needs a positive size");
        n.shape = Shape::matrix(n.ints[0], n.ints[0]);
        break;
      case Fn::Block: {
        const Shape s = n.args[0]->shape;
        const int i = n.ints[0], j = n.ints[1], r = n.ints[2], c = n.ints[3];
        if (s.scalar || r < 1 || c < 1 || i + r > s.rows || j + c > s.cols)
          invalid(name, "block() out of range for " + s.str());
        n.shape = Shape::matrix(r, c);
        break;
      }
      case Fn::Entry: {
        const Shape s = n.args[0]->shape;
        if (s.scalar || n.ints[0] >= s.rows || n.ints[1] >= s.cols)
          invalid(name, "entry() out of range for " + s.str());
        n.shape = Shape{};
        break;
      }
    }
    return make(std::move(n));
  }

  ast::NodePtr literal() {
    const Token& open = next();
    Node n;
    n.op = Op::Literal;
    std::vector<int> row_sizes;
    do {
      const Token& row_start = peek();
      expect(Tok::LBracket, "'[' starting a matrix row");
      int count = 0;
      do {
        const Token& at = peek();
        auto e = expression();
        if (!e->shape.scalar) invalid(at, "matrix literal entries must be scalars");
        n.args.push_back(std::move(e));
        ++count;
      } while (accept(Tok::Comma));
      expect(Tok::RBracket, "']'");
      if (!row_sizes.empty() && count != row_sizes.front())
        invalid(row_start, "ragged matrix literal: row " + std::to_string(row_sizes.size() + 1) +
                               " has " + std::to_string(count) + " entries, expected " +
                               std::to_string(row_sizes.front()));
      row_sizes.push_back(count);
    } while (accept(Tok::Comma));
    expect(Tok::RBracket, "']'");
    (void)open;
    n.rows = static_cast<int>(row_sizes.size());
    n.cols = row_sizes.front();
    n.shape = Shape::matrix(n.rows, n.cols);
    return make(std::move(n));
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  const Symbols& symbols_;
};

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void print(const ast::Node& n, const Symbols& s, std::string& out) {
  using ast::Op;
  switch (n.op) {
    case Op::Number:
      out += format_number(n.number);
      return;
    case Op::Coord:
      out += s.coords[n.index];
      return;
    case Op::Param:
      out += s.params[n.index];
      return;
    case Op::MatrixVar:
      out += s.matrices[n.index].name;
      return;
    case Op::Neg:
      out += "(-";
      print(*n.args[0], s, out);
      out += ")";
      return;
    case Op::Add: case Op::Sub: case Op::Mul: case Op::Div: {
      const char* sym = n.op == Op::Add ? " + " : n.op == Op::Sub ? " - " : n.op == Op::Mul ? " * " : " / ";
      out += "(";
      print(*n.args[0], s, out);
      out += sym;
      print(*n.args[1], s, out);
      out += ")";
      return;
    }
    case Op::Pow:
      out += "(";
      print(*n.args[0], s, out);
      out += "^" + std::to_string(n.exponent) + ")";
      return;
    case Op::Call: {
      out += ast::function_info(n.fn).name;
      out += "(";
      bool first = true;
      for (const auto& a : n.args) {
        if (!first) out += ", ";
        first = false;
        print(*a, s, out);
      }
      for (int v : n.ints) {
        if (!first) out += ", ";
        first = false;
        out += std::to_string(v);
      }
      out += ")";
      return;
    }
    case Op::Literal:
      out += "[";
      for (int r = 0; r < n.rows; ++r) {
        if (r) out += ", ";
        out += "[";
        for (int c = 0; c < n.cols; ++c) {
          if (c) out += ", ";
          print(*n.args[r * n.cols + c], s, out);
        }
        out += "]";
      }
      out += "]";
      return;
  }
}

}  // namespace detail

inline std::string Expr::str() const {
  std::string out;
  detail::print(*root_, *symbols_, out);
  return out;
}

inline Expr parse(std::string_view source, Symbols symbols) {
  auto shared = std::make_shared<const Symbols>(std::move(symbols));
  detail::Parser p(source, *shared);
  return Expr(p.parse(), shared);
}

inline Expr parse(std::string_view source, std::vector<std::string> coords, std::vector<std::string> params = {}) {
  return parse(source, Symbols{std::move(coords), std::move(params), {}});
}

/// Constant expressions: no coordinates, parameters or matrix variables.
inline Expr parse(std::string_view source) { return parse(source, Symbols{}); }

// ---------------------------------------------------------------------------
// Evaluation

namespace detail {

inline Jet scalar_jet(double v, std::size_t order) {
  Jet j;
  j.scalar = true;
  j.value = Matrix::Constant(1, 1, v);
  j.tangents.assign(order, Matrix::Zero(1, 1));
  return j;
}

// f(x) with f'(x) for scalar arguments.
inline Jet chain(const Jet& x, double f, double df) {
  Jet j;
  j.scalar = true;
  j.value = Matrix::Constant(1, 1, f);
  j.tangents.reserve(x.order());
  for (const auto& t : x.tangents) j.tangents.push_back(t * df);
  return j;
}

inline Jet multiply(const Jet& a, const Jet& b) {
  Jet j;
  j.scalar = a.scalar && b.scalar;
  if (a.scalar && !b.scalar) {
    const double s = a.as_scalar();
    j.value = s * b.value;
    for (std::size_t k = 0; k < a.order(); ++k) j.tangents.push_back(a.tangents[k](0, 0) * b.value + s * b.tangents[k]);
  } else if (b.scalar && !a.scalar) {
    const double s = b.as_scalar();
    j.value = a.value * s;
    for (std::size_t k = 0; k < a.order(); ++k) j.tangents.push_back(a.tangents[k] * s + a.value * b.tangents[k](0, 0));
  } else {
    j.value = a.value * b.value;
    for (std::size_t k = 0; k < a.order(); ++k) j.tangents.push_back(a.tangents[k] * b.value + a.value * b.tangents[k]);
  }
  return j;
}

inline Matrix checked_inverse(const Matrix& a) {
  Eigen::PartialPivLU<Matrix> lu(a);
  const double d = lu.determinant();
  if (!(std::abs(d) > 1e-300) || !std::isfinite(d)) throw DomainError("inverse of a singular matrix");
  return lu.inverse();
}

inline Jet inverse(const Jet& a) {
  Jet j;
  j.value = checked_inverse(a.value);
  for (const auto& t : a.tangents) j.tangents.push_back(-j.value * t * j.value);
  return j;
}

inline Jet power(const Jet& base, int e) {
  const std::size_t order = base.order();
  if (base.scalar) {
    const double x = base.as_scalar();
    if (e < 0 && x == 0.0) throw DomainError("negative power of zero");
    const double v = std::pow(x, e);
    const double dv = e == 0 ? 0.0 : e * std::pow(x, e - 1);
    return chain(base, v, dv);
  }
  const auto n = base.value.rows();
  Jet acc;
  acc.value = Matrix::Identity(n, n);
  acc.tangents.assign(order, Matrix::Zero(n, n));
  const Jet b = e < 0 ? inverse(base) : base;
  for (int i = 0; i < std::abs(e); ++i) acc = multiply(acc, b);
  return acc;
}

inline Jet determinant(const Jet& a) {
  const auto n = a.value.cols();
  Jet j = scalar_jet(a.value.determinant(), a.order());
  // d det(A)[E] = sum over columns of det(A with that column replaced by E's).
  for (std::size_t k = 0; k < a.order(); ++k) {
    double d = 0.0;
    for (Eigen::Index c = 0; c < n; ++c) {
      Matrix m = a.value;
      m.col(c) = a.tangents[k].col(c);
      d += m.determinant();
    }
    j.tangents[k](0, 0) = d;
  }
  return j;
}

struct EvalContext {
  const Vector& point;
  std::span<const Vector> seeds;
  const ParamMap& params;
  const std::map<std::string, Jet>* matrices;
  const Symbols& symbols;
};

inline Jet eval_node(const ast::Node& n, const EvalContext& ctx) {
  using ast::Fn;
  using ast::Op;
  const std::size_t order = ctx.seeds.size();
  switch (n.op) {
    case Op::Number:
      return scalar_jet(n.number, order);
    case Op::Coord: {
      Jet j = scalar_jet(ctx.point[n.index], order);
      for (std::size_t k = 0; k < order; ++k) j.tangents[k](0, 0) = ctx.seeds[k][n.index];
      return j;
    }
    case Op::Param: {
      const auto& name = ctx.symbols.params[n.index];
      auto it = ctx.params.find(name);
      if (it == ctx.params.end()) throw ValidationError("parameter '" + name + "' is not bound");
      return scalar_jet(it->second, order);
    }
    case Op::MatrixVar: {
      const auto& sym = ctx.symbols.matrices[n.index];
      if (!ctx.matrices) throw ValidationError("matrix variable '" + sym.name + "' is not bound");
      auto it = ctx.matrices->find(sym.name);
      if (it == ctx.matrices->end()) throw ValidationError("matrix variable '" + sym.name + "' is not bound");
      const Jet& j = it->second;
      if (j.value.rows() != sym.rows || j.value.cols() != sym.cols)
        throw ShapeError("matrix variable '" + sym.name + "' bound with wrong shape");
      if (j.order() != order) throw ShapeError("matrix variable '" + sym.name + "' has wrong tangent count");
      return j;
    }
    case Op::Neg: {
      Jet j = eval_node(*n.args[0], ctx);
      j.value = -j.value;
      for (auto& t : j.tangents) t = -t;
      return j;
    }
    case Op::Add:
    case Op::Sub: {
      Jet a = eval_node(*n.args[0], ctx);
      const Jet b = eval_node(*n.args[1], ctx);
      if (a.value.rows() != b.value.rows() || a.value.cols() != b.value.cols())
        throw ShapeError("operand shapes differ");
      const double s = n.op == Op::Add ? 1.0 : -1.0;
      a.value += s * b.value;
      for (std::size_t k = 0; k < order; ++k) a.tangents[k] += s * b.tangents[k];
      return a;
    }
    case Op::Mul:
      return multiply(eval_node(*n.args[0], ctx), eval_node(*n.args[1], ctx));
    case Op::Div: {
      const Jet a = eval_node(*n.args[0], ctx);
      const Jet b = eval_node(*n.args[1], ctx);
      const double s = b.as_scalar();
      if (s == 0.0) throw DomainError("division by zero");
      Jet j;
      j.scalar = a.scalar;
      j.value = a.value / s;
      for (std::size_t k = 0; k < order; ++k)
        j.tangents.push_back(a.tangents[k] / s - a.value * (b.tangents[k](0, 0) / (s * s)));
      return j;
    }
    case Op::Pow:
      return power(eval_node(*n.args[0], ctx), n.exponent);
    case Op::Literal: {
      Jet j;
      j.value.resize(n.rows, n.cols);
      j.tangents.assign(order, Matrix(n.rows, n.cols));
      for (int r = 0; r < n.rows; ++r)
        for (int c = 0; c < n.cols; ++c) {
          const Jet e = eval_node(*n.args[r * n.cols + c], ctx);
          j.value(r, c) = e.as_scalar();
          for (std::size_t k = 0; k < order; ++k) j.tangents[k](r, c) = e.tangents[k](0, 0);
        }
      return j;
    }
    case Op::Call:
      break;
  }

  if (n.fn == Fn::Eye) {
    Jet j;
    j.value = Matrix::Identity(n.ints[0], n.ints[0]);
    j.tangents.assign(order, Matrix::Zero(n.ints[0], n.ints[0]));
    return j;
  }
  const Jet a = eval_node(*n.args[0], ctx);
  switch (n.fn) {
    case Fn::Sin:
      return chain(a, std::sin(a.as_scalar()), std::cos(a.as_scalar()));
    case Fn::Cos:
      return chain(a, std::cos(a.as_scalar()), -std::sin(a.as_scalar()));
    case Fn::Tan: {
      const double c = std::cos(a.as_scalar());
      if (c == 0.0) throw DomainError("tan() at a pole");
      return chain(a, std::tan(a.as_scalar()), 1.0 / (c * c));
    }
    case Fn::Exp: {
      const double e = std::exp(a.as_scalar());
      return chain(a, e, e);
    }
    case Fn::Log: {
      const double x = a.as_scalar();
      if (!(x > 0.0)) throw DomainError("log() of a non-positive number");
      return chain(a, std::log(x), 1.0 / x);
    }
    case Fn::Sqrt: {
      const double x = a.as_scalar();
      if (x < 0.0) throw DomainError("sqrt() of a negative number");
      const double r = std::sqrt(x);
      if (r == 0.0) {
        for (const auto& t : a.tangents)
          if (t(0, 0) != 0.0) throw DomainError("sqrt() is not differentiable at zero");
        return chain(a, 0.0, 0.0);
      }
      return chain(a, r, 0.5 / r);
    }
    case Fn::Atan2: {
      const Jet b = eval_node(*n.args[1], ctx);
      const double y = a.as_scalar(), x = b.as_scalar();
      const double r2 = x * x + y * y;
      if (r2 == 0.0) throw DomainError("atan2(0, 0)");
      Jet j = scalar_jet(std::atan2(y, x), order);
      for (std::size_t k = 0; k < order; ++k)
        j.tangents[k](0, 0) = (x * a.tangents[k](0, 0) - y * b.tangents[k](0, 0)) / r2;
      return j;
    }
    case Fn::Mexp:
      return expm_jet(a);
    case Fn::Transpose: {
      Jet j;
      j.value = a.value.transpose();
      for (const auto& t : a.tangents) j.tangents.push_back(t.transpose());
      return j;
    }
    case Fn::Inv:
      return inverse(a);
    case Fn::Det:
      return determinant(a);
    case Fn::Tr: {
      Jet j = scalar_jet(a.value.trace(), order);
      for (std::size_t k = 0; k < order; ++k) j.tangents[k](0, 0) = a.tangents[k].trace();
      return j;
    }
    case Fn::Block: {
      const int i = n.ints[0], c0 = n.ints[1], r = n.ints[2], c = n.ints[3];
      Jet j;
      j.value = a.value.block(i, c0, r, c);
      for (const auto& t : a.tangents) j.tangents.push_back(t.block(i, c0, r, c));
      return j;
    }
    case Fn::Entry: {
      const int r = n.ints[0], c = n.ints[1];
      Jet j = scalar_jet(a.value(r, c), order);
      for (std::size_t k = 0; k < order; ++k) j.tangents[k](0, 0) = a.tangents[k](r, c);
      return j;
    }
    default:
      throw Error("unhandled function");
  }
}

}  // namespace detail

/// Evaluates `e` with tangents along `seeds` (each a coordinate-space direction).
/// Matrix variables are bound to jets whose tangent count equals `seeds.size()`.
inline Jet eval_jet(const Expr& e, const Vector& point, std::span<const Vector> seeds, const ParamMap& params,
                    const std::map<std::string, Jet>* matrices = nullptr) {
  const auto& sym = e.symbols();
  if (point.size() != static_cast<Eigen::Index>(sym.coords.size()))
    throw ShapeError("point has " + std::to_string(point.size()) + " coordinates, expression expects " +
                     std::to_string(sym.coords.size()));
  for (const auto& s : seeds)
    if (s.size() != point.size()) throw ShapeError("seed direction has wrong dimension");
  return detail::eval_node(e.root(), detail::EvalContext{point, seeds, params, matrices, sym});
}

inline Jet eval_dual(const Expr& e, const Vector& point, const ParamMap& params, std::span<const Vector> seeds) {
  return eval_jet(e, point, seeds, params);
}

/// Plain evaluation. Scalars come back as 1x1 matrices.
inline Matrix eval(const Expr& e, const Vector& point, const ParamMap& params = {}) {
  return eval_jet(e, point, {}, params).value;
}

inline double eval_scalar(const Expr& e, const Vector& point, const ParamMap& params = {}) {
  if (!e.shape().scalar) throw ShapeError("expression is not scalar");
  return eval(e, point, params)(0, 0);
}

}  // namespace lcf
